#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gnm/pipeline.hpp"
#include "gnm/version.hpp"

namespace {

struct CliOptions {
  std::string manifest;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::string label_kind;
  int k = 0;
  double lr = 0.0;
  int max_3p = 0;
  bool oracle = false;
};

void add_common(CLI::App *sub, CliOptions &opt) {
  sub->add_option("--manifest", opt.manifest, "run manifest (JSON)")->required();
  sub->add_option("--seed", opt.seed, "override the manifest seed");
  sub->add_option("--epsilon", opt.epsilon, "override the screening threshold (hartree)");
  sub->add_option("--label-kind", opt.label_kind, "training label source")
      ->check(CLI::IsMember({"srem", "ideal"}));
  sub->add_option("--k", opt.k, "override the graph layer width");
  sub->add_option("--lr", opt.lr, "override the learning rate");
  sub->add_option("--max-3p-snippets", opt.max_3p, "override the three-parameter snippet cap");
  sub->add_flag("--oracle", opt.oracle, "emit noiseless reference columns");
}

gnm::RunManifest resolve(const CLI::App *sub, const CliOptions &opt) {
  gnm::RunManifest m = gnm::load_manifest(opt.manifest);
  if (sub->count("--seed"))
    m.seed = opt.seed;
  if (sub->count("--epsilon"))
    m.epsilon = opt.epsilon;
  if (sub->count("--label-kind"))
    m.label_kind = opt.label_kind;
  if (sub->count("--k"))
    m.k = opt.k;
  if (sub->count("--lr"))
    m.learning_rate = opt.lr;
  if (sub->count("--max-3p-snippets"))
    m.max_3p_snippets = opt.max_3p;
  if (sub->count("--oracle"))
    m.oracle = true;
  m.validate();
  return m;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{std::string("gnm ") + gnm::version_string +
               " - noise-screened ansatz construction, reference-error labels, and "
               "graph-network energy mitigation"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App *select = app.add_subcommand("select", "screen the operator pool and build the ansatz");
  CLI::App *labels = app.add_subcommand("labels", "generate snippet labels and training data");
  CLI::App *train = app.add_subcommand("train", "fit the mitigation model from training data");
  CLI::App *mitigate = app.add_subcommand("mitigate", "predict the mitigated full-circuit energy");
  CLI::App *sweep = app.add_subcommand("sweep-noise", "full pipeline across a noise grid");
  for (CLI::App *sub : {select, labels, train, mitigate, sweep})
    add_common(sub, opt);

  CLI11_PARSE(app, argc, argv);

  CLI::App *sub = app.get_subcommands().front();
  try {
    gnm::RunManifest m = resolve(sub, opt);
    if (sub == select)
      return gnm::cmd_select(m);
    if (sub == labels)
      return gnm::cmd_labels(m);
    if (sub == train)
      return gnm::cmd_train(m);
    if (sub == mitigate)
      return gnm::cmd_mitigate(m);
    return gnm::cmd_sweep_noise(m);
  } catch (const gnm::io_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
