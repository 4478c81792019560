#pragma once

// End-to-end runs: tree construction, measurement, MPS conversion, QFT,
// sampling and classical post-processing, plus the report files.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shor_ttn/errors.hpp"
#include "shor_ttn/modmath.hpp"
#include "shor_ttn/mps.hpp"
#include "shor_ttn/ttn.hpp"

namespace shor_ttn::pipeline {

using json = nlohmann::ordered_json;
using modmath::u64;

inline constexpr int kSchemaVersion = 1;

// Bad command-line input (maps to exit status 2).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline void check_modulus(u64 n) {
  if (n < 15 || n > modmath::kMaxModulus)
    throw UsageError("N must satisfy 15 <= N < 2^31, got " + std::to_string(n));
  if (is_prime(n)) throw UsageError("N = " + std::to_string(n) + " is prime");
}

// Rank of the contiguous top-register block [a, a + n) before measurement.
inline u64 block_rank(const modmath::ShorInstance& inst, unsigned a, unsigned n) {
  const unsigned shift = std::min(a, inst.m);
  const u64 sat = inst.r >> shift;
  if (n >= 63) return sat;
  return std::min<u64>(u64{1} << n, sat);
}

// Peak working set of construction: a few copies of the top node after
// the last gates, (2r) x left-half bond x right-half bond doubles.
inline double estimate_peak_bytes(const modmath::ShorInstance& inst) {
  const unsigned n = inst.top_width;
  const unsigned left = (n + 1) / 2;
  const double l0 = static_cast<double>(block_rank(inst, 0, left));
  const double r0 = static_cast<double>(block_rank(inst, left, n - left));
  const double theta = 2.0 * static_cast<double>(inst.r) * l0 * r0;
  return 8.0 * 3.0 * theta + 8.0 * 2.0 * static_cast<double>(inst.qudit_dim());
}

// Independent stream per pipeline stage.
inline std::mt19937_64 stage_rng(u64 seed, u64 stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage)};
  return std::mt19937_64(seq);
}

enum Stage : u64 { kDrawX = 1, kMeasure = 2, kSample = 3, kSweepX = 4 };

inline u64 draw_x(u64 n, u64 seed) {
  auto rng = stage_rng(seed, kDrawX);
  std::uniform_int_distribution<u64> dist(2, n - 1);
  return dist(rng);
}

struct SimulateOptions {
  u64 N = 0;
  std::optional<u64> x;
  unsigned l = 0;
  u64 seed = 1;
  double tol = 1e-12;
  double qft_tol = 1e-10;
  unsigned samples = 32;
  double mem_cap_bytes = 8.0 * 1024 * 1024 * 1024;
  std::optional<std::string> out_dir;
};

struct RunReport {
  u64 N = 0, x = 0;
  std::optional<modmath::ShorInstance> instance;
  std::string status;  // ok | gcd_shortcut | no_period | no_factors | resource_abort
  std::string message;
  u64 root_bond = 0;
  std::vector<ttn::EdgeInfo> edges;
  std::optional<ttn::MeasurementRecord> measurement;
  std::vector<std::size_t> mps_profile;
  double qft_truncation_weight = 0.0;
  std::size_t qft_max_bond = 0;
  std::vector<u64> samples;
  std::optional<u64> recovered_period;
  std::optional<std::pair<u64, u64>> factors;
  std::vector<std::pair<std::string, double>> timings;  // stage -> ms
  u64 seed = 0;
  double estimated_peak_bytes = 0.0;
  std::string dot;
};

// Every sample's convergent denominator, then pairwise lcms; the first
// candidate with x^c = 1 wins.
inline std::optional<u64> period_from_samples(const std::vector<u64>& samples, u64 q_total,
                                              u64 x, u64 n) {
  std::vector<u64> cands;
  for (u64 y : samples) {
    auto c = modmath::recover_period(y, q_total, n);
    if (!c) continue;
    if (modmath::mod_pow(x, *c, n) == 1) return c;
    if (std::find(cands.begin(), cands.end(), *c) == cands.end()) cands.push_back(*c);
  }
  for (std::size_t i = 0; i < cands.size(); ++i)
    for (std::size_t j = i + 1; j < cands.size(); ++j) {
      u64 c = modmath::lcm(cands[i], cands[j]);
      if (c <= n && modmath::mod_pow(x, c, n) == 1) return c;
    }
  return std::nullopt;
}

inline json spectrum_json(const SchmidtSpectrum& s) {
  json j;
  j["rank"] = s.rank();
  j["value"] = s.values.empty() ? 0.0 : s.values.front();
  j["min_value"] = s.values.empty() ? 0.0 : s.values.back();
  return j;
}

inline json to_json(const RunReport& rep, bool with_timings = true) {
  json j;
  j["schema"] = kSchemaVersion;
  json inst;
  inst["N"] = rep.N;
  inst["x"] = rep.x;
  if (rep.instance) {
    const auto& in = *rep.instance;
    inst["l"] = in.l;
    inst["top_width"] = in.top_width;
    inst["r"] = in.r;
    inst["m"] = in.m;
    inst["r_tilde"] = in.r_tilde;
    inst["l_r"] = in.l_r;
    inst["l_r_tilde"] = in.l_r_tilde;
    inst["degenerate"] = in.r == 1;
  }
  j["instance"] = inst;
  j["status"] = rep.status;
  if (!rep.message.empty()) j["message"] = rep.message;
  j["root_bond"] = rep.root_bond;
  json spectra = json::object();
  for (const auto& e : rep.edges) spectra[e.id] = spectrum_json(e.spectrum);
  j["edge_spectra"] = spectra;
  if (rep.measurement) {
    j["measurement"] = {{"outcome_index", rep.measurement->outcome_index},
                        {"bottom_value", rep.measurement->bottom_value},
                        {"probability", rep.measurement->probability}};
  } else {
    j["measurement"] = nullptr;
  }
  j["mps_profile"] = rep.mps_profile;
  j["qft_truncation_weight"] = rep.qft_truncation_weight;
  j["qft_max_bond"] = rep.qft_max_bond;
  j["samples"] = rep.samples;
  j["recovered_period"] = rep.recovered_period ? json(*rep.recovered_period) : json(nullptr);
  j["factors"] = rep.factors ? json::array({rep.factors->first, rep.factors->second}) : json(nullptr);
  j["estimated_peak_bytes"] = rep.estimated_peak_bytes;
  if (with_timings) {
    json t = json::object();
    for (const auto& [k, v] : rep.timings) t[k] = v;
    j["timings"] = t;
  }
  j["seed"] = rep.seed;
  return j;
}

inline const char* kProfileHeader = "N,x,r,m,r_tilde,outcome_index,k,bond_dim";

inline void append_profile_rows(std::ostream& os, const modmath::ShorInstance& inst,
                                u64 outcome_index, const std::vector<std::size_t>& profile) {
  for (std::size_t j = 0; j < profile.size(); ++j)
    os << inst.N << ',' << inst.x << ',' << inst.r << ',' << inst.m << ',' << inst.r_tilde << ','
       << outcome_index << ',' << j + 1 << ',' << profile[j] << '\n';
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

inline void write_outputs(const RunReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(std::filesystem::path(dir) / "report.json", to_json(rep).dump(2) + "\n");
  if (!rep.dot.empty()) write_text(std::filesystem::path(dir) / "tree.dot", rep.dot);
  std::ostringstream csv;
  csv << kProfileHeader << '\n';
  if (rep.instance && rep.measurement)
    append_profile_rows(csv, *rep.instance, rep.measurement->outcome_index, rep.mps_profile);
  write_text(std::filesystem::path(dir) / "profile.csv", csv.str());
}

class StageClock {
 public:
  explicit StageClock(RunReport& rep) : rep_(rep), t_(std::chrono::steady_clock::now()) {}
  void lap(const std::string& stage) {
    auto now = std::chrono::steady_clock::now();
    rep_.timings.emplace_back(stage, std::chrono::duration<double, std::milli>(now - t_).count());
    t_ = now;
  }

 private:
  RunReport& rep_;
  std::chrono::steady_clock::time_point t_;
};

inline RunReport simulate(const SimulateOptions& opt) {
  check_modulus(opt.N);
  RunReport rep;
  rep.N = opt.N;
  rep.seed = opt.seed;
  rep.x = opt.x ? *opt.x : draw_x(opt.N, opt.seed);
  if (rep.x < 2 || rep.x >= opt.N) throw UsageError("x must satisfy 1 < x < N");

  const u64 g = modmath::gcd(rep.x, opt.N);
  if (g != 1) {
    // x already shares a factor with N; no quantum stage needed.
    rep.status = "gcd_shortcut";
    rep.factors = std::make_pair(std::min(g, opt.N / g), std::max(g, opt.N / g));
    if (opt.out_dir) write_outputs(rep, *opt.out_dir);
    return rep;
  }

  modmath::ShorInstance inst;
  try {
    inst = modmath::make_instance(opt.N, rep.x, opt.l);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  rep.instance = inst;
  rep.estimated_peak_bytes = estimate_peak_bytes(inst);
  if (rep.estimated_peak_bytes > opt.mem_cap_bytes) {
    rep.status = "resource_abort";
    std::ostringstream msg;
    msg << "estimated peak memory " << rep.estimated_peak_bytes / (1024.0 * 1024 * 1024)
        << " GiB exceeds cap " << opt.mem_cap_bytes / (1024.0 * 1024 * 1024) << " GiB";
    rep.message = msg.str();
    if (opt.out_dir) write_outputs(rep, *opt.out_dir);
    throw CapacityError(rep.message);
  }

  StageClock clock(rep);
  ttn::TreeNetwork tree = ttn::build_tree(inst, opt.tol);
  clock.lap("build_tree");
  ttn::canonicalize(tree, opt.tol);
  clock.lap("canonicalize");
  rep.root_bond = tree.support.size();
  rep.edges = ttn::edges(tree);
  rep.dot = ttn::export_dot(tree);

  auto mrng = stage_rng(opt.seed, kMeasure);
  rep.measurement = ttn::measure_bottom(tree, std::nullopt, mrng());
  clock.lap("measure_bottom");
  mps::MPS chain = mps::tree_to_mps(tree);
  rep.mps_profile = mps::bond_profile(chain);
  clock.lap("tree_to_mps");
  auto qft = mps::apply_qft(std::move(chain), opt.qft_tol);
  rep.qft_truncation_weight = qft.truncation_weight;
  rep.qft_max_bond = qft.max_bond;
  clock.lap("apply_qft");
  mps::move_center(qft.mps, 0);
  auto srng = stage_rng(opt.seed, kSample);
  for (unsigned s = 0; s < opt.samples; ++s) rep.samples.push_back(mps::sample_bitstring(qft.mps, srng));
  clock.lap("sampling");

  rep.recovered_period =
      period_from_samples(rep.samples, u64{1} << inst.top_width, inst.x, inst.N);
  if (!rep.recovered_period) {
    rep.status = "no_period";
  } else {
    rep.factors = modmath::factors_from_period(inst.x, *rep.recovered_period, inst.N);
    rep.status = rep.factors ? "ok" : "no_factors";
  }
  clock.lap("postprocess");
  if (opt.out_dir) write_outputs(rep, *opt.out_dir);
  return rep;
}

struct SweepOptions {
  u64 N = 0;
  unsigned count = 24;
  u64 seed = 7;
  unsigned l = 0;
  double tol = 1e-12;
  unsigned jobs = 1;
  double mem_cap_bytes = 8.0 * 1024 * 1024 * 1024;
  std::optional<std::string> out_dir;
};

struct SweepRun {
  modmath::ShorInstance inst;
  ttn::MeasurementRecord measurement;
  std::vector<std::size_t> profile;
  std::size_t plateau = 0;  // largest interior bond
  double millis = 0.0;
};

// `count` distinct units x in [2, N), drawn by rejection from a seeded stream.
inline std::vector<u64> sweep_bases(u64 n, unsigned count, u64 seed) {
  u64 units = 0;
  for (u64 x = 2; x < n; ++x)
    if (modmath::gcd(x, n) == 1) ++units;
  if (count > units)
    throw UsageError("only " + std::to_string(units) + " valid x values for N = " + std::to_string(n));
  auto rng = stage_rng(seed, kSweepX);
  std::uniform_int_distribution<u64> dist(2, n - 1);
  std::vector<u64> out;
  std::set<u64> seen;
  while (out.size() < count) {
    u64 x = dist(rng);
    if (modmath::gcd(x, n) != 1 || !seen.insert(x).second) continue;
    out.push_back(x);
  }
  return out;
}

// Construction, measurement and MPS profile per x; the QFT stage is not
// needed for the profile and is skipped.
inline SweepRun sweep_one(u64 n, u64 x, const SweepOptions& opt) {
  SweepRun run;
  auto t0 = std::chrono::steady_clock::now();
  run.inst = modmath::make_instance(n, x, opt.l);
  if (estimate_peak_bytes(run.inst) > opt.mem_cap_bytes)
    throw CapacityError("x = " + std::to_string(x) + ": estimated memory above cap");
  ttn::TreeNetwork tree = ttn::build_tree(run.inst, opt.tol);
  auto rng = stage_rng(opt.seed ^ (x * 0x9E3779B97F4A7C15ULL), kMeasure);
  run.measurement = ttn::measure_bottom(tree, std::nullopt, rng());
  run.profile = mps::bond_profile(mps::tree_to_mps(tree));
  run.plateau = run.profile.empty() ? 1 : *std::max_element(run.profile.begin(), run.profile.end());
  run.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

struct SweepResult {
  std::vector<SweepRun> runs;
  std::string csv;
  json summary;
};

inline SweepResult sweep(const SweepOptions& opt) {
  check_modulus(opt.N);
  SweepResult res;
  const auto xs = opt.count == 0 ? std::vector<u64>{} : sweep_bases(opt.N, opt.count, opt.seed);
  res.runs.resize(xs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i = next++; i < xs.size(); i = next++) {
      try {
        res.runs[i] = sweep_one(opt.N, xs[i], opt);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(xs.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);

  std::ostringstream csv;
  csv << kProfileHeader << '\n';
  json runs = json::array();
  for (const auto& r : res.runs) {
    append_profile_rows(csv, r.inst, r.measurement.outcome_index, r.profile);
    runs.push_back({{"x", r.inst.x},
                    {"r", r.inst.r},
                    {"m", r.inst.m},
                    {"r_tilde", r.inst.r_tilde},
                    {"outcome_index", r.measurement.outcome_index},
                    {"plateau", r.plateau},
                    {"plateau_equals_r_tilde", r.plateau == r.inst.r_tilde},
                    {"profile", r.profile}});
  }
  res.csv = csv.str();
  res.summary = {{"schema", kSchemaVersion},
                 {"N", opt.N},
                 {"l", res.runs.empty() ? (opt.l ? opt.l : modmath::ceil_log2(opt.N)) : res.runs[0].inst.l},
                 {"count", opt.count},
                 {"seed", opt.seed},
                 {"runs", runs}};
  if (opt.out_dir) {
    std::filesystem::create_directories(*opt.out_dir);
    write_text(std::filesystem::path(*opt.out_dir) / "profile.csv", res.csv);
    write_text(std::filesystem::path(*opt.out_dir) / "summary.json", res.summary.dump(2) + "\n");
  }
  return res;
}

}  // namespace shor_ttn::pipeline
