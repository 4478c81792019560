// Acceptance gate: one line per criterion, "criterion <k> PASS|FAIL <detail>".
//
//   acceptance --criterion 3
//   acceptance            (all criteria)

#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>

#include <json.hpp>

#include "support.hpp"

using namespace shor_ttn;
using namespace testing_support;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << "first failure: " << why << "; ";
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string id(u64 n, u64 x) { return "N=" + std::to_string(n) + " x=" + std::to_string(x); }

ttn::TreeNetwork canonical(const modmath::ShorInstance& inst) {
  auto tree = ttn::build_tree(inst);
  ttn::canonicalize(tree);
  return tree;
}

std::vector<unsigned> slots(const ttn::EdgeInfo& e) {
  std::vector<unsigned> s;
  for (std::size_t i = e.lo; i < e.hi; ++i) s.push_back(static_cast<unsigned>(i));
  return s;
}

u64 profile_law(const modmath::ShorInstance& inst, unsigned k) {
  const unsigned grow = k > inst.m ? k - inst.m : 0;
  u64 v = std::min<u64>(inst.r_tilde, u64{1} << grow);
  return std::min<u64>(v, u64{1} << (inst.top_width - k));
}

bool power_of_two(u64 v) { return v && !(v & (v - 1)); }

// 1. Oracle fidelity after every absorption, whole suite under two minutes.
void criterion_1(Outcome& o) {
  const auto t0 = Clock::now();
  std::size_t instances = 0, steps = 0;
  double worst = 0;
  for (u64 n : kSuite)
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = ttn::initial_tree(inst);
      ++instances;
      for (unsigned i = 0; i < inst.top_width; ++i) {
        ttn::absorb_qubit(tree, i);
        auto got = oracle::from_tensor(ttn::to_statevector(tree), i + 1, inst.l);
        const double f = oracle::fidelity(oracle::dense_partial_state(inst, i + 1), got);
        worst = std::max(worst, 1.0 - f);
        ++steps;
        if (f < 1.0 - 1e-10) o.fail(id(n, x) + " after qubit " + std::to_string(i));
      }
    }
  const double secs = seconds_since(t0);
  if (secs >= 120) o.fail("suite took " + std::to_string(secs) + " s");
  o.detail << instances << " instances, " << steps << " steps, max 1-F " << worst << ", " << std::fixed
           << std::setprecision(1) << secs << " s";
}

// 2. Root bond equals r, root values all 1/sqrt(r).
void criterion_2(Outcome& o) {
  std::size_t instances = 0, bond_ok = 0, values_ok = 0, exact_ok = 0;
  double worst_flat = 0, worst_exact = 0;
  for (u64 n : kSuite)
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = canonical(inst);
      const auto& s = ttn::schmidt_spectrum(tree, tree.parent_edge(tree.top));
      const u64 r = brute_order(x, n);
      ++instances;
      if (s.rank() == r) {
        ++bond_ok;
      } else {
        o.fail(id(n, x) + " root bond " + std::to_string(s.rank()));
      }
      double dev = 0;
      for (double v : s.values) dev = std::max(dev, std::abs(v - 1 / std::sqrt(static_cast<double>(r))));
      worst_flat = std::max(worst_flat, dev);
      if (dev <= 1e-10) {
        ++values_ok;
      } else {
        o.fail(id(n, x) + " root values deviate from 1/sqrt(r) by " + std::to_string(dev));
      }
      // exact values sqrt(#{t < Q : x^t = b} / Q)
      auto counts = bottom_counts(x, n, inst.top_width);
      std::vector<double> want;
      for (auto [b, c] : counts) want.push_back(std::sqrt(std::ldexp(double(c), -int(inst.top_width))));
      std::sort(want.rbegin(), want.rend());
      double ex = 0;
      for (std::size_t i = 0; i < std::min(want.size(), s.values.size()); ++i)
        ex = std::max(ex, std::abs(want[i] - s.values[i]));
      worst_exact = std::max(worst_exact, ex);
      if (ex <= 1e-10 && want.size() == s.rank()) ++exact_ok;
    }
  o.detail << "root bond = r in " << bond_ok << "/" << instances << "; values within 1e-10 of 1/sqrt(r) in "
           << values_ok << "/" << instances << " (max deviation " << worst_flat
           << "); values within 1e-10 of sqrt(count_b/Q) in " << exact_ok << "/" << instances
           << " (max deviation " << worst_exact << ")";
}

// 3. The 3403 headline run through the CLI: bond 410, < 10 min, < 8 GiB.
void criterion_3(Outcome& o) {
  auto dir = scratch_dir("c3");
  auto r = run(cli() + " simulate --N 3403 --x 346 --out " + dir.string());
  if (r.exit_code != 0) o.fail("exit code " + std::to_string(r.exit_code));
  json rep;
  try {
    rep = json::parse(slurp(dir / "report.json"));
  } catch (...) {
    o.fail("no report.json");
  }
  const u64 bond = rep.contains("root_bond") ? rep["root_bond"].get<u64>() : 0;
  if (bond != 410) o.fail("root bond " + std::to_string(bond));
  if (r.seconds >= 600) o.fail("wall time " + std::to_string(r.seconds) + " s");
  const double gib = r.max_rss_bytes / (1024.0 * 1024 * 1024);
  if (gib >= 8) o.fail("peak RSS " + std::to_string(gib) + " GiB");
  o.detail << "root_bond " << bond << ", status " << (rep.contains("status") ? rep["status"].dump() : "?")
           << ", " << std::fixed << std::setprecision(1) << r.seconds << " s, peak RSS " << std::setprecision(2)
           << gib << " GiB";
}

// 4. Cluster ranks: pure clusters on the suite, structural catalog for 3403.
void criterion_4(Outcome& o) {
  std::size_t clusters = 0;
  for (u64 n : kSuite)
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = canonical(inst);
      auto dense = oracle::dense_shor_state(inst);
      for (const auto& e : ttn::edges(tree)) {
        const auto region = ttn::region_of(e, inst);
        if (region == ttn::Region::Mixed) continue;
        ++clusters;
        const u64 want = ttn::predicted_rank(static_cast<unsigned>(e.cluster()), region, inst);
        const std::size_t oracle_rank = oracle::dense_schmidt_spectrum(dense, slots(e)).size();
        if (e.spectrum.rank() != want || oracle_rank != want)
          o.fail(id(n, x) + " " + e.id + " rank " + std::to_string(e.spectrum.rank()) + ", oracle " +
                 std::to_string(oracle_rank) + ", predicted " + std::to_string(want));
      }
    }
  o.detail << clusters << " suite clusters; ";

  auto inst = modmath::make_instance(3403, 346);
  auto tree = canonical(inst);
  std::size_t leaves = 0, pairs = 0, pure = 0;
  std::map<std::size_t, std::size_t> catalog;
  for (const auto& e : ttn::edges(tree)) {
    const std::size_t d = e.spectrum.rank();
    ++catalog[d];
    if (!(d == 410 || d == 205 || (power_of_two(d) && d <= 410)))
      o.fail("3403 edge " + e.id + " rank " + std::to_string(d));
    if (e.cluster() == 1) {
      ++leaves;
      if (d != 2) o.fail("3403 leaf " + e.id + " rank " + std::to_string(d));
    }
    if (e.cluster() == 2 && e.hi <= inst.l_r) {
      ++pairs;
      if (d != 4) o.fail("3403 pair " + e.id + " rank " + std::to_string(d));
    }
    const auto region = ttn::region_of(e, inst);
    if (region != ttn::Region::Mixed) {
      ++pure;
      const u64 want = ttn::predicted_rank(static_cast<unsigned>(e.cluster()), region, inst);
      if (d != want) o.fail("3403 " + e.id + " rank " + std::to_string(d) + " predicted " + std::to_string(want));
    }
  }
  if (pairs == 0) o.fail("3403 has no pair cluster inside the first l_r qubits");
  o.detail << "3403: " << leaves << " leaf edges, " << pairs << " low pairs, " << pure << " pure clusters; ranks";
  for (auto [d, c] : catalog) o.detail << " " << d << "x" << c;
}

// 5. Post-measurement MPS profile law at every cut, every outcome.
void criterion_5(Outcome& o) {
  std::size_t outcomes = 0, cuts = 0;
  for (u64 n : kSuite)
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = canonical(inst);
      for (u64 b : tree.support) {
        auto t = tree;
        ttn::measure_bottom(t, b, 0);
        ++outcomes;
        auto profile = mps::bond_profile(mps::tree_to_mps(t));
        auto dense = oracle::dense_projected_state(inst, b);
        for (unsigned k = 1; k < inst.top_width; ++k) {
          std::vector<unsigned> left;
          for (unsigned s = 0; s < k; ++s) left.push_back(s);
          const std::size_t oracle_rank = oracle::dense_schmidt_spectrum(dense, left).size();
          const u64 law = profile_law(inst, k);
          ++cuts;
          if (profile[k - 1] != law || oracle_rank != law)
            o.fail(id(n, x) + " b=" + std::to_string(b) + " cut " + std::to_string(k));
        }
        for (unsigned k = 1; k <= inst.m && k < inst.top_width; ++k)
          if (profile[k - 1] != 1) o.fail(id(n, x) + " low qubit bond at cut " + std::to_string(k));
        for (const auto& e : ttn::edges(t))
          if (e.cluster() == 1 && e.lo < inst.m && e.spectrum.rank() != 1)
            o.fail(id(n, x) + " leaf " + e.id + " not disentangled");
      }
    }
  o.detail << outcomes << " outcomes, " << cuts << " cuts";
}

// 6. The 1763 sweep: plateau = r_tilde, growth / flat / decay shape.
void criterion_6(Outcome& o) {
  auto dir = scratch_dir("c6");
  const auto t0 = Clock::now();
  auto r = run(cli() + " sweep --N 1763 --count 24 --seed 7 --out " + dir.string());
  if (r.exit_code != 0) {
    o.fail("exit code " + std::to_string(r.exit_code));
    return;
  }
  auto summary = json::parse(slurp(dir / "summary.json"));
  std::set<u64> xs, plateaus;
  for (const auto& run : summary["runs"]) {
    const u64 x = run["x"];
    xs.insert(x);
    const u64 rt = odd_part(brute_order(x, 1763));
    const auto prof = run["profile"].get<std::vector<u64>>();
    const u64 top = *std::max_element(prof.begin(), prof.end());
    plateaus.insert(top);
    if (top != rt) o.fail("x=" + std::to_string(x) + " plateau " + std::to_string(top) + " vs " + std::to_string(rt));
    std::size_t i = 0;
    while (i + 1 < prof.size() && prof[i] <= prof[i + 1] && prof[i] < top) ++i;
    while (i < prof.size() && prof[i] == top) ++i;
    for (; i < prof.size(); ++i)
      if (i > 0 && prof[i] > prof[i - 1]) break;
    if (i != prof.size()) o.fail("x=" + std::to_string(x) + " profile not rise-flat-fall");
  }
  if (xs.size() != 24) o.fail(std::to_string(xs.size()) + " distinct x");
  o.detail << xs.size() << " distinct x, plateaus {";
  for (u64 p : plateaus) o.detail << " " << p;
  o.detail << " }, " << std::fixed << std::setprecision(1) << seconds_since(t0) << " s";
}

// 7. QFT versus the dense transform, l <= 5.
void criterion_7(Outcome& o) {
  double worst = 0, worst_default = 0;
  std::size_t states = 0;
  for (u64 n : kSuite) {
    if (modmath::ceil_log2(n) > 5) continue;
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = canonical(inst);
      for (u64 b : tree.support) {
        auto t = tree;
        ttn::measure_bottom(t, b, 0);
        auto chain = mps::tree_to_mps(t);
        auto want = oracle::probabilities(oracle::dense_qft(oracle::dense_projected_state(inst, b)));
        auto tv = [&](double tol) {
          auto res = mps::apply_qft(chain, tol);
          auto got = oracle::probabilities(
              oracle::from_tensor(mps::mps_to_statevector(res.mps), inst.top_width, 0));
          double s = 0;
          for (std::size_t y = 0; y < want.size(); ++y) s += std::abs(want[y] - got[y]);
          return s / 2;
        };
        const double exact = tv(0.0);
        worst = std::max(worst, exact);
        worst_default = std::max(worst_default, tv(1e-10));
        ++states;
        if (exact >= 1e-8) o.fail(id(n, x) + " b=" + std::to_string(b) + " TV " + std::to_string(exact));
      }
    }
  }
  auto inst = modmath::make_instance(15, 7);
  auto tree = canonical(inst);
  for (u64 b : tree.support) {
    auto t = tree;
    ttn::measure_bottom(t, b, 0);
    auto res = mps::apply_qft(mps::tree_to_mps(t), 0.0);
    auto p = oracle::probabilities(oracle::from_tensor(mps::mps_to_statevector(res.mps), 8, 0));
    for (std::size_t y = 0; y < p.size(); ++y) {
      const bool in = y == 0 || y == 64 || y == 128 || y == 192;
      if (in && std::abs(p[y] - 0.25) > 1e-10) o.fail("15/7 p(" + std::to_string(y) + ") = " + std::to_string(p[y]));
      if (!in && p[y] > 1e-20) o.fail("15/7 support contains " + std::to_string(y));
    }
  }
  o.detail << states << " states, max TV " << worst << " at tol 0 (" << worst_default
           << " at tol 1e-10); 15/7 support {0,64,128,192}";
}

// 8. End-to-end factoring of 15 and 21 within 20 seeded attempts.
void criterion_8(Outcome& o) {
  for (u64 n : {15u, 21u}) {
    int used = 0;
    bool done = false;
    for (u64 seed = 1; seed <= 20 && !done; ++seed) {
      ++used;
      pipeline::SimulateOptions opt;
      opt.N = n;
      opt.seed = seed;
      auto rep = pipeline::simulate(opt);
      if (rep.status != "ok") continue;
      const u64 r = *rep.recovered_period;
      if (modmath::mod_pow(rep.x, r, n) != 1) {
        o.fail(id(n, rep.x) + " recovered r=" + std::to_string(r) + " is not a period");
        continue;
      }
      const auto [p, q] = *rep.factors;
      if (p * q != n || p == 1) {
        o.fail(id(n, rep.x) + " bad factors");
        continue;
      }
      o.detail << "N=" << n << " -> " << p << "x" << q << " (x=" << rep.x << ", r=" << r << ", attempt " << used
               << "); ";
      done = true;
    }
    if (!done) o.fail("N=" + std::to_string(n) + " not factored in 20 attempts");
  }
}

// 9. SVDs per absorption and tree depth.
void criterion_9(Outcome& o) {
  std::vector<std::pair<u64, u64>> cases;
  for (u64 n : {15u, 21u, 33u, 35u, 39u, 55u, 57u, 77u})
    for (u64 x : valid_bases(n)) cases.emplace_back(n, x);
  for (u64 x : {2u, 3u, 5u, 6u}) cases.emplace_back(1763, x);
  unsigned max_svd = 0;
  for (auto [n, x] : cases) {
    auto inst = modmath::make_instance(n, x);
    if (inst.r > 420) continue;
    auto tree = ttn::build_tree(inst);
    const unsigned lg = modmath::ceil_log2(inst.top_width);
    for (unsigned c : tree.svd_per_qubit) {
      max_svd = std::max(max_svd, c);
      if (c > lg + 2) o.fail(id(n, x) + " " + std::to_string(c) + " SVDs in one absorption");
    }
    if (ttn::depth(tree) > lg + 1) o.fail(id(n, x) + " depth " + std::to_string(ttn::depth(tree)));
  }
  o.detail << cases.size() << " instances, max SVDs per absorption " << max_svd;
}

// 10. Chi-square checks on bottom outcomes and post-QFT samples.
void criterion_10(Outcome& o) {
  double min_bottom = 1, min_qft = 1;
  for (auto [n, x] : std::vector<std::pair<u64, u64>>{{15, 7}, {21, 2}}) {
    auto inst = modmath::make_instance(n, x);
    auto tree = canonical(inst);
    std::map<u64, std::size_t> index;
    for (std::size_t i = 0; i < tree.support.size(); ++i) index[tree.support[i]] = i;
    std::vector<u64> counts(tree.support.size(), 0);
    for (u64 trial = 0; trial < 1000; ++trial) {
      auto t = tree;
      ++counts[index.at(ttn::measure_bottom(t, std::nullopt, 1000 + trial).bottom_value)];
    }
    const double p = chi_square_p(std::vector<double>(counts.size(), 1.0 / counts.size()), counts);
    min_bottom = std::min(min_bottom, p);
    if (p <= 1e-3) o.fail(id(n, x) + " bottom outcomes p=" + std::to_string(p));
  }
  for (u64 n : {15u, 21u}) {
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = canonical(inst);
      ttn::measure_bottom(tree, std::nullopt, x);
      const u64 b = tree.measurement->bottom_value;
      auto res = mps::apply_qft(mps::tree_to_mps(tree), 0.0);
      mps::move_center(res.mps, 0);
      auto want = oracle::probabilities(oracle::dense_qft(oracle::dense_projected_state(inst, b)));
      std::vector<u64> counts(want.size(), 0);
      std::mt19937_64 rng(n * 1000 + x);
      for (int s = 0; s < 10000; ++s) ++counts[mps::sample_bitstring(res.mps, rng)];
      const double p = chi_square_p(want, counts);
      min_qft = std::min(min_qft, p);
      if (p <= 1e-3) o.fail(id(n, x) + " post-QFT samples p=" + std::to_string(p));
    }
  }
  o.detail << "min p bottom " << min_bottom << ", min p post-QFT " << min_qft;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);
  const std::vector<std::function<void(Outcome&)>> all{criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8,
                                                       criterion_9, criterion_10};
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::cerr << "unknown criterion " << only << "\n";
    return 2;
  }
  bool ok = true;
  for (std::size_t k = 1; k <= all.size(); ++k) {
    if (only && static_cast<int>(k) != only) continue;
    Outcome o;
    try {
      all[k - 1](o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << k << " " << (o.pass ? "PASS" : "FAIL") << " " << o.detail.str() << std::endl;
    ok &= o.pass;
  }
  return ok ? 0 : 1;
}
