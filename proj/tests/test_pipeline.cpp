#include <catch2/catch_amalgamated.hpp>

#include <cctype>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "gnm/fixtures.hpp"
#include "gnm/pipeline.hpp"
#include "gnm/sha1.hpp"
#include "test_util.hpp"

using namespace gnm;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const char *kDevice4 = R"({
  "name": "line4",
  "n_qubits": 4,
  "coupling": [[0, 1], [1, 2], [2, 3]],
  "s_err": {"0": 1e-4, "1": 1e-4, "2": 1e-4, "3": 1e-4},
  "t_err": {"0-1": 1e-3, "1-2": 1e-3, "2-3": 1e-3}
})";

std::string h2_manifest(const std::string &out_dir) {
  nlohmann::json j;
  j["hamiltonian"] = testutil::fixture_path("h2_0740.json");
  j["device"] = "device4.json";
  j["noise"] = {{"p1", 0.0}, {"p2", 0.0}};
  j["epsilon"] = 1e-5;
  j["seed"] = 42;
  j["output_dir"] = out_dir;
  j["k"] = 4;
  j["k_r"] = 8;
  j["epochs"] = 40;
  j["learning_rate"] = 0.02;
  return j.dump(2);
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ','))
    out.push_back(field);
  return out;
}

std::vector<std::string> csv_lines(const std::string &text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty())
      lines.push_back(line);
  return lines;
}

void check_trailer(const std::string &csv_text, std::uint64_t seed) {
  auto lines = csv_lines(csv_text);
  REQUIRE(!lines.empty());
  const std::string &t = lines.back();
  const std::string prefix = "# seed=" + std::to_string(seed) + " inputs=";
  REQUIRE(t.rfind(prefix, 0) == 0);
  std::string rest = t.substr(prefix.size());
  REQUIRE(rest.size() > 40);
  for (int i = 0; i < 40; ++i)
    CHECK(std::isxdigit(static_cast<unsigned char>(rest[static_cast<std::size_t>(i)])));
  CHECK(rest.substr(40) == std::string(" version=") + version_string);
}

} // namespace

TEST_CASE("git blob hashing matches the reference values") {
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("manifest parsing, path resolution and validation") {
  nlohmann::json j;
  j["hamiltonian"] = "h.json";
  j["device"] = "/abs/dev.json";
  j["noise"] = "device";
  j["output_dir"] = "sub/out";
  RunManifest m = manifest_from_json(j, fs::path("/x/y"));
  CHECK(m.hamiltonian_path == "/x/y/h.json");
  CHECK(m.device_path == "/abs/dev.json");
  CHECK(m.noise_from_device);
  CHECK(m.output_dir == "/x/y/sub/out");

  NoiseSpec ns = resolve_noise(m, testutil::line_device(4, 1e-4, 2e-3));
  CHECK(ns.p2.at({0, 1}) == 2e-3);
  CHECK(ns.p2.at({1, 0}) == 2e-3); // device noise applies in both directions

  j["noise"] = "bogus";
  CHECK_THROWS_AS(manifest_from_json(j, fs::path("/x/y")), std::invalid_argument);

  j["noise"] = {{"p1", 1.5}, {"p2", 0.0}};
  RunManifest bad = manifest_from_json(j, fs::path("/x/y"));
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  j["noise"] = {{"p1", 0.0}, {"p2", 0.0}};
  j["label_kind"] = "ideal";
  RunManifest ideal = manifest_from_json(j, fs::path("/x/y"));
  CHECK_THROWS_AS(ideal.validate(), std::invalid_argument); // ideal labels need oracle mode
  ideal.oracle = true;
  CHECK_NOTHROW(ideal.validate());
}

TEST_CASE("sweep grids are log-spaced with a fixed ratio") {
  SweepGridSpec spec;
  auto grid = sweep_grid(spec);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front().second == Approx(1e-3).margin(1e-18));
  CHECK(grid.back().second == Approx(1e-2).margin(1e-17));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid[i].first == Approx(0.1 * grid[i].second).margin(1e-18));
    if (i > 0)
      CHECK(grid[i].second > grid[i - 1].second);
  }
  SweepGridSpec ex;
  ex.explicit_grid = {{1e-4, 1e-3}};
  CHECK(sweep_grid(ex).size() == 1);
  SweepGridSpec bad;
  bad.p2_min = 0.0;
  CHECK_THROWS_AS(sweep_grid(bad), std::invalid_argument);
}

TEST_CASE("cli pipeline end to end with reproducible outputs") {
  testutil::ScratchDir scratch("pipeline_e2e");
  testutil::write_file(scratch.file("device4.json"), kDevice4);
  testutil::write_file(scratch.file("manifest.json"), h2_manifest("out"));
  const std::string manifest = scratch.file("manifest.json");
  const fs::path out = scratch.path() / "out";
  QubitHamiltonian h = load_hamiltonian(testutil::fixture_path("h2_0740.json"));
  REQUIRE(h.fci_energy.has_value());

  auto sel = testutil::run_cli(scratch, "select --manifest " + manifest);
  INFO(sel.err);
  REQUIRE(sel.exit_code == 0);
  REQUIRE(fs::exists(out / "ansatz.json"));
  AnsatzSpec ansatz = load_ansatz((out / "ansatz.json").string());
  CHECK(ansatz.n_doubles == 1);
  CHECK(ansatz.n_singles == 0); // singles are parity-forbidden for this molecule
  check_trailer(testutil::slurp((out / "screening.csv").string()), 42);

  auto lab = testutil::run_cli(scratch, "labels --manifest " + manifest);
  INFO(lab.err);
  REQUIRE(lab.exit_code == 0);
  REQUIRE(fs::exists(out / "training.jsonl"));
  auto samples = load_samples((out / "training.jsonl").string());
  REQUIRE(samples.size() == 1); // one operator, one snippet
  CHECK(samples[0].label_kind == "srem");
  check_trailer(testutil::slurp((out / "labels.csv").string()), 42);

  // label generation is byte-stable across worker counts
  const std::string labels_bytes = testutil::slurp((out / "labels.csv").string());
  const std::string samples_bytes = testutil::slurp((out / "training.jsonl").string());
  auto lab3 = testutil::run_cli(scratch, "labels --manifest " + manifest, "GNM_THREADS=3 ");
  REQUIRE(lab3.exit_code == 0);
  CHECK(testutil::slurp((out / "labels.csv").string()) == labels_bytes);
  CHECK(testutil::slurp((out / "training.jsonl").string()) == samples_bytes);

  auto tr = testutil::run_cli(scratch, "train --manifest " + manifest);
  INFO(tr.err);
  REQUIRE(tr.exit_code == 0);
  REQUIRE(fs::exists(out / "model.json"));
  auto loss_lines = csv_lines(testutil::slurp((out / "loss.csv").string()));
  CHECK(loss_lines.size() == 1 + 40 + 1); // header, one row per epoch, trailer

  auto mit = testutil::run_cli(scratch, "mitigate --manifest " + manifest + " --oracle");
  INFO(mit.err);
  REQUIRE(mit.exit_code == 0);
  auto result_lines = csv_lines(testutil::slurp((out / "result.csv").string()));
  REQUIRE(result_lines.size() == 3);
  auto header = split_csv_line(result_lines[0]);
  REQUIRE(header.size() == 6);
  CHECK(header[0] == "E_noisy");
  CHECK(header[3] == "E_ideal");
  auto row = split_csv_line(result_lines[1]);
  double e_noisy = std::stod(row[0]);
  double e_pred = std::stod(row[1]);
  double e_ideal = std::stod(row[3]);
  CHECK(e_noisy == Approx(*h.fci_energy).margin(1e-6)); // noiseless job
  CHECK(e_ideal == Approx(*h.fci_energy).margin(1e-6));
  CHECK(e_pred == Approx(*h.fci_energy).margin(5e-3));

  // identical manifest and seed give byte-identical results
  const std::string result_bytes = testutil::slurp((out / "result.csv").string());
  auto mit2 = testutil::run_cli(scratch, "mitigate --manifest " + manifest + " --oracle");
  REQUIRE(mit2.exit_code == 0);
  CHECK(testutil::slurp((out / "result.csv").string()) == result_bytes);
  auto mit3 =
      testutil::run_cli(scratch, "mitigate --manifest " + manifest + " --oracle", "GNM_THREADS=2 ");
  REQUIRE(mit3.exit_code == 0);
  CHECK(testutil::slurp((out / "result.csv").string()) == result_bytes);
}

TEST_CASE("cli sweep over an explicit grid") {
  testutil::ScratchDir scratch("pipeline_sweep");
  testutil::write_file(scratch.file("device4.json"), kDevice4);
  nlohmann::json j = nlohmann::json::parse(h2_manifest("out_sweep"));
  j["epochs"] = 25;
  j["sweep"] = {{"grid", {{1e-4, 1e-3}, {5e-4, 5e-3}}}};
  testutil::write_file(scratch.file("manifest.json"), j.dump(2));

  auto res = testutil::run_cli(scratch, "sweep-noise --manifest " + scratch.file("manifest.json"));
  INFO(res.err);
  REQUIRE(res.exit_code == 0);
  auto lines = csv_lines(testutil::slurp((scratch.path() / "out_sweep" / "sweep.csv").string()));
  REQUIRE(lines.size() == 4); // header + 2 points + trailer
  CHECK(split_csv_line(lines[0]) ==
        std::vector<std::string>{"p1", "p2", "E_noisy", "E_pred", "E_ideal"});
  QubitHamiltonian h = load_hamiltonian(testutil::fixture_path("h2_0740.json"));
  double expected_p1[2] = {1e-4, 5e-4};
  double expected_p2[2] = {1e-3, 5e-3};
  for (int i = 0; i < 2; ++i) {
    auto row = split_csv_line(lines[static_cast<std::size_t>(1 + i)]);
    REQUIRE(row.size() == 5);
    CHECK(std::stod(row[1]) == expected_p2[i]);
    CHECK(std::stod(row[0]) == expected_p1[i]);
    CHECK(std::stod(row[4]) == Approx(*h.fci_energy).margin(1e-4)); // ideal is noise-free
    CHECK(std::isfinite(std::stod(row[2])));
    CHECK(std::isfinite(std::stod(row[3])));
  }
}

TEST_CASE("cli maps failure classes to distinct exit codes") {
  testutil::ScratchDir scratch("pipeline_errors");
  testutil::write_file(scratch.file("device4.json"), kDevice4);
  testutil::write_file(scratch.file("manifest.json"), h2_manifest("out"));
  const std::string manifest = scratch.file("manifest.json");

  // threshold nothing can clear: clean run, empty selection
  auto eps = testutil::run_cli(scratch, "select --manifest " + manifest + " --epsilon 1000000");
  CHECK(eps.exit_code == 2);
  // the empty ansatz it wrote makes labeling a no-op failure too
  CHECK(testutil::run_cli(scratch, "labels --manifest " + manifest).exit_code == 2);

  nlohmann::json bad_h = nlohmann::json::parse(h2_manifest("out"));
  bad_h["hamiltonian"] = "no_such_file.json";
  testutil::write_file(scratch.file("bad_h.json"), bad_h.dump());
  CHECK(testutil::run_cli(scratch, "select --manifest " + scratch.file("bad_h.json")).exit_code ==
        4);

  testutil::write_file(scratch.file("broken.json"), "{oops");
  CHECK(testutil::run_cli(scratch, "select --manifest " + scratch.file("broken.json")).exit_code ==
        4);

  CHECK(testutil::run_cli(scratch, "select --manifest " + scratch.file("missing_manifest.json"))
            .exit_code == 4);

  // configuration error, not an io error
  auto ideal = testutil::run_cli(scratch, "labels --manifest " + manifest + " --label-kind ideal");
  CHECK(ideal.exit_code == 1);

  // dependency files produced by earlier stages are absent
  CHECK(testutil::run_cli(scratch, "train --manifest " + manifest).exit_code == 4);
  auto sel = testutil::run_cli(scratch, "select --manifest " + manifest);
  REQUIRE(sel.exit_code == 0);
  CHECK(testutil::run_cli(scratch, "mitigate --manifest " + manifest).exit_code == 4);

  CHECK(testutil::run_cli(scratch, "bogus --manifest " + manifest).exit_code != 0);
  CHECK(testutil::run_cli(scratch, "select").exit_code != 0);
}
