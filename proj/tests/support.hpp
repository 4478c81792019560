#pragma once

#include <sys/resource.h>
#include <sys/wait.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "shor_ttn/shor_ttn.hpp"

namespace testing_support {

using u64 = std::uint64_t;

inline const std::vector<u64> kSuite{15, 21, 33, 35, 39, 55, 57};

inline u64 gcd(u64 a, u64 b) {
  while (b) {
    u64 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Order by repeated multiplication, no library code involved.
inline u64 brute_order(u64 x, u64 n) {
  u64 y = x % n, r = 1;
  while (y != 1) {
    y = y * x % n;
    ++r;
  }
  return r;
}

inline u64 odd_part(u64 r) {
  while (r % 2 == 0) r /= 2;
  return r;
}

inline std::vector<u64> valid_bases(u64 n) {
  std::vector<u64> xs;
  for (u64 x = 2; x < n; ++x)
    if (gcd(x, n) == 1) xs.push_back(x);
  return xs;
}

// Values x^t mod N for t < 2^bits, counted per bottom value.
inline std::map<u64, u64> bottom_counts(u64 x, u64 n, unsigned bits) {
  std::map<u64, u64> c;
  u64 y = 1;
  for (u64 t = 0; t < (u64{1} << bits); ++t) {
    ++c[y];
    y = y * x % n;
  }
  return c;
}

// Pearson statistic against expected probabilities; bins with expected
// count below 5 are pooled.
inline double chi_square_p(const std::vector<double>& expected_prob, const std::vector<u64>& observed) {
  double total = 0;
  for (u64 o : observed) total += static_cast<double>(o);
  double stat = 0, pooled_e = 0, pooled_o = 0;
  int bins = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_prob[i] * total;
    if (e < 5) {
      pooled_e += e;
      pooled_o += static_cast<double>(observed[i]);
      continue;
    }
    stat += (observed[i] - e) * (observed[i] - e) / e;
    ++bins;
  }
  if (pooled_e > 0) {
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++bins;
  }
  if (bins < 2) return 1.0;
  boost::math::chi_squared dist(bins - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

struct CommandResult {
  int exit_code = -1;
  double seconds = 0;
  double max_rss_bytes = 0;
  std::string out;
};

// Runs a shell command, capturing stdout. max_rss is the peak over all
// children reaped so far, so it is an upper bound for this command.
inline CommandResult run(const std::string& cmd) {
  CommandResult res;
  const auto t0 = std::chrono::steady_clock::now();
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
  const int status = pclose(pipe);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  rusage ru{};
  getrusage(RUSAGE_CHILDREN, &ru);
  res.max_rss_bytes = static_cast<double>(ru.ru_maxrss) * 1024.0;
  return res;
}

inline std::string cli() { return SHOR_TTN_CLI; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("shor_ttn_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace testing_support
