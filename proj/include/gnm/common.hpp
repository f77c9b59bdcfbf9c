#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gnm {

// File-level failures (missing, unreadable, unparseable input or a failed
// write) get their own type so the CLI can map them to a distinct exit code.
struct io_error : std::runtime_error {
  explicit io_error(const std::string &msg) : std::runtime_error(msg) {}
};

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw io_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw io_error("read failed: " + path);
  return ss.str();
}

// Worker count used by parallel_for. Resolved once per call so tests can
// flip GNM_THREADS between invocations of the same binary.
inline int thread_count() {
  const char *env = std::getenv("GNM_THREADS");
  if (env && *env) {
    char *end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 256)
      return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Deterministic parallel map over [0, n). Each index writes only its own
// output slot, so the result is identical for any worker count. Reductions
// over the slots must be done sequentially by the caller.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn) {
  int workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  int spawn = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  pool.reserve(static_cast<std::size_t>(spawn));
  std::exception_ptr err;
  std::mutex err_mu;
  for (int t = 0; t < spawn; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n)
          return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err)
            err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto &th : pool)
    th.join();
  if (err)
    std::rethrow_exception(err);
}

// Uniform double in [lo, hi) built from the top 53 bits of the engine
// output. std::uniform_real_distribution is implementation-defined, which
// would break cross-platform reproducibility of seeded runs.
inline double uniform_double(std::mt19937_64 &rng, double lo, double hi) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

// Printf %.17g, enough digits to round-trip an IEEE double exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline double median(std::vector<double> v) {
  if (v.empty())
    throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1)
    return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string trim(const std::string &s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return s.substr(b, e - b);
}

} // namespace gnm
