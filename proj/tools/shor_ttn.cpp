// shor-ttn: command-line front end.
//
//   shor-ttn simulate --N 3403 --x 346 --out run/
//   shor-ttn sweep --N 1763 --count 24 --seed 7 --out sweep/
//   shor-ttn verify --l-max 4
//   shor-ttn tree-dot --N 15 --x 7 > tree.dot

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shor_ttn/shor_ttn.hpp"

namespace {

using namespace shor_ttn;
using modmath::u64;

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kResource = 3, kVerify = 4 };

constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;

struct Common {
  u64 n = 0;
  unsigned l = 0;
  u64 seed = 1;
  double tol = 1e-12;
  double mem_cap_gib = 8.0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool need_n = true) {
  auto* opt = cmd->add_option("--N", c.n, "Modulus to factor (composite, 15 <= N < 2^31)");
  if (need_n) opt->required();
  cmd->add_option("--l", c.l, "Bottom register width in bits (default ceil(log2 N))");
  cmd->add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  cmd->add_option("--tol", c.tol, "Relative singular value cutoff in the tree")->capture_default_str();
  cmd->add_option("--mem-cap", c.mem_cap_gib, "Abort if the estimated peak exceeds this many GiB")
      ->capture_default_str();
}

int run_simulate(const Common& c, std::optional<u64> x, unsigned samples, double qft_tol) {
  pipeline::SimulateOptions opt;
  opt.N = c.n;
  opt.x = x;
  opt.l = c.l;
  opt.seed = c.seed;
  opt.tol = c.tol;
  opt.qft_tol = qft_tol;
  opt.samples = samples;
  opt.mem_cap_bytes = c.mem_cap_gib * kGiB;
  if (!c.out.empty()) opt.out_dir = c.out;
  auto rep = pipeline::simulate(opt);
  std::cout << pipeline::to_json(rep).dump(2) << '\n';
  return kOk;
}

int run_sweep(const Common& c, unsigned count, unsigned jobs) {
  pipeline::SweepOptions opt;
  opt.N = c.n;
  opt.count = count;
  opt.seed = c.seed;
  opt.l = c.l;
  opt.tol = c.tol;
  opt.jobs = jobs;
  opt.mem_cap_bytes = c.mem_cap_gib * kGiB;
  if (!c.out.empty()) opt.out_dir = c.out;
  auto res = pipeline::sweep(opt);
  if (c.out.empty()) {
    std::cout << res.csv;
  } else {
    std::cout << res.summary.dump(2) << '\n';
  }
  return kOk;
}

int run_verify(unsigned l_max, u64 seed, double tol, const std::string& out) {
  if (l_max > 7) throw pipeline::UsageError("--l-max must be at most 7");
  verify::VerifyOptions opt;
  opt.l_max = l_max;
  opt.seed = seed;
  opt.tol = tol;
  auto t0 = std::chrono::steady_clock::now();
  auto res = verify::run(opt);
  auto j = verify::to_json(res);
  j["elapsed_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
    std::cerr << (res.ok() ? "pass" : "FAIL") << ": " << res.checks << " checks, "
              << res.failures.size() << " failures\n";
  }
  return res.ok() ? kOk : kVerify;
}

int run_tree_dot(const Common& c, u64 x, bool measured) {
  if (c.n < 15) throw pipeline::UsageError("N must be at least 15");
  modmath::ShorInstance inst;
  try {
    inst = modmath::make_instance(c.n, x, c.l);
  } catch (const DomainError& e) {
    throw pipeline::UsageError(e.what());
  }
  if (pipeline::estimate_peak_bytes(inst) > c.mem_cap_gib * kGiB)
    throw CapacityError("estimated peak memory exceeds --mem-cap");
  auto tree = ttn::build_tree(inst, c.tol);
  ttn::canonicalize(tree, c.tol);
  if (measured) ttn::measure_bottom(tree, std::nullopt, pipeline::stage_rng(c.seed, pipeline::kMeasure)());
  const std::string dot = ttn::export_dot(tree);
  if (c.out.empty()) {
    std::cout << dot;
  } else {
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    f << dot;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shor wavefunctions as tree tensor networks"};
  app.require_subcommand(1);

  Common sim_c;
  std::optional<u64> sim_x;
  unsigned samples = 32;
  double qft_tol = 1e-10;
  auto* sim = app.add_subcommand("simulate", "Build, measure, transform and sample one instance");
  add_common(sim, sim_c);
  sim->add_option("--x", sim_x, "Base (drawn from [2, N) when omitted)");
  sim->add_option("--samples", samples, "Number of post-QFT samples")->capture_default_str();
  sim->add_option("--qft-tol", qft_tol, "Discarded weight allowed per QFT split")->capture_default_str();
  sim->add_option("--out", sim_c.out, "Directory for report.json, tree.dot and profile.csv");

  Common sw_c;
  sw_c.seed = 7;
  unsigned count = 24, jobs = 1;
  auto* sw = app.add_subcommand("sweep", "Bond profiles for many bases of one modulus");
  add_common(sw, sw_c);
  sw->add_option("--count", count, "Number of distinct bases")->capture_default_str();
  sw->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  sw->add_option("--out", sw_c.out, "Directory for profile.csv and summary.json");

  unsigned l_max = 7;
  u64 v_seed = 1;
  double v_tol = 1e-12;
  std::string v_out;
  auto* ver = app.add_subcommand("verify", "Check the built-in instance list against the dense oracle");
  ver->add_option("--l-max", l_max, "Largest register width to include (<= 7)")->capture_default_str();
  ver->add_option("--seed", v_seed, "Seed")->capture_default_str();
  ver->add_option("--tol", v_tol, "Relative singular value cutoff")->capture_default_str();
  ver->add_option("--out", v_out, "Write the JSON result here instead of stdout");

  Common dot_c;
  u64 dot_x = 0;
  bool measured = false;
  auto* dot = app.add_subcommand("tree-dot", "Graphviz rendering of the canonical tree");
  add_common(dot, dot_c);
  dot->add_option("--x", dot_x, "Base")->required();
  dot->add_flag("--measured", measured, "Render the tree after measuring the bottom register");
  dot->add_option("--out", dot_c.out, "Output file (stdout by default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return run_simulate(sim_c, sim_x, samples, qft_tol);
    if (*sw) return run_sweep(sw_c, count, jobs);
    if (*ver) return run_verify(l_max, v_seed, v_tol, v_out);
    if (*dot) return run_tree_dot(dot_c, dot_x, measured);
  } catch (const pipeline::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "resource abort: " << e.what() << '\n';
    return kResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource abort: out of memory\n";
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
