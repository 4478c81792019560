#pragma once

// Regression gate: rebuilds a fixed list of small instances and checks the
// tree, measurement, MPS and QFT stages against the dense oracle.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shor_ttn/modmath.hpp"
#include "shor_ttn/mps.hpp"
#include "shor_ttn/oracle.hpp"
#include "shor_ttn/svd.hpp"
#include "shor_ttn/ttn.hpp"

namespace shor_ttn::verify {

using json = nlohmann::ordered_json;
using modmath::u64;

inline const std::vector<u64> kModuli{15, 21, 33, 35, 39, 55, 57, 77};

struct VerifyOptions {
  unsigned l_max = 7;
  u64 seed = 1;
  double tol = 1e-12;
  double exact = 1e-10;
};

struct Failure {
  std::string invariant;
  u64 N = 0, x = 0;
  std::optional<u64> bottom;
  std::string detail;
};

struct VerifyResult {
  std::size_t instances = 0;
  std::size_t checks = 0;
  std::vector<Failure> failures;
  bool ok() const { return failures.empty(); }
};

inline json to_json(const VerifyResult& res) {
  json fails = json::array();
  for (const auto& f : res.failures) {
    json j{{"invariant", f.invariant}, {"N", f.N}, {"x", f.x}};
    j["bottom_value"] = f.bottom ? json(*f.bottom) : json(nullptr);
    j["detail"] = f.detail;
    fails.push_back(std::move(j));
  }
  return {{"schema", 1},
          {"status", res.ok() ? "pass" : "fail"},
          {"instances", res.instances},
          {"checks", res.checks},
          {"failures", fails}};
}

// Bond dimension at cut k (k qubits on the left) of the measured state.
inline u64 profile_law(const modmath::ShorInstance& inst, unsigned k) {
  const unsigned n = inst.top_width;
  const unsigned grow = k > inst.m ? k - inst.m : 0;
  u64 v = inst.r_tilde;
  if (grow < 63) v = std::min<u64>(v, u64{1} << grow);
  if (n - k < 63) v = std::min<u64>(v, u64{1} << (n - k));
  return v;
}

// Number of exponents t < 2^n with x^t = b, i.e. Q * P(b).
inline u64 preimage_count(const modmath::ShorInstance& inst, u64 b) {
  const u64 q = u64{1} << inst.top_width;
  const auto i = modmath::discrete_log(inst.x, b, inst.N);
  if (!i || *i >= q) return 0;
  return (q - 1 - *i) / inst.r + 1;
}

inline double spectrum_gap(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double g = 0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

class Checker {
 public:
  Checker(VerifyResult& res, u64 n, u64 x) : res_(res), n_(n), x_(x) {}
  void at_bottom(std::optional<u64> b) { bottom_ = b; }
  bool operator()(bool ok, const std::string& invariant, const std::string& detail = {}) {
    ++res_.checks;
    if (!ok) res_.failures.push_back({invariant, n_, x_, bottom_, detail});
    return ok;
  }

 private:
  VerifyResult& res_;
  u64 n_, x_;
  std::optional<u64> bottom_;
};

// svd_split on random rank-deficient tensors must reproduce its input
// to the exactness threshold with isometric factors.
inline void check_svd_kernel(VerifyResult& res, const VerifyOptions& opt) {
  Checker check(res, 0, 0);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g;
  const SvdOptions so{opt.tol};
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t a = 3 + trial % 3, b = 4, c = 2 + trial % 4, rank = 2 + trial % 3;
    std::vector<double> u(a * b * rank), v(rank * c);
    for (auto& e : u) e = g(rng);
    for (auto& e : v) e = g(rng);
    RTensor fu({"a", "b", "k"}, {a, b, rank}, u), fv({"k", "c"}, {rank, c}, v);
    RTensor t = contract(fu, fv, {{"k", "k"}});
    auto s = svd_split(t, {"a", "c"}, "s", so);
    RTensor l = s.left;
    scale_axis(l, "s", s.spectrum.values);
    RTensor back = permute_axes(contract(l, s.right, {{"s", "s"}}), t.labels());
    double err = 0;
    for (std::size_t i = 0; i < t.size(); ++i) err += (t[i] - back[i]) * (t[i] - back[i]);
    err = std::sqrt(err);
    check(err <= opt.exact * t.norm(), "reconstruction",
          "relative error " + fmt(err / t.norm()) + " at rank " + std::to_string(s.spectrum.rank()));
    RTensor lc = s.left;
    lc.relabel("s", "s'");
    RTensor ll = contract(s.left, lc, {{"a", "a"}, {"c", "c"}});
    double iso = 0;
    const std::size_t k = s.spectrum.rank();
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) iso = std::max(iso, std::abs(ll[i * k + j] - (i == j)));
    check(iso <= 1e-12, "isometry", "max deviation " + fmt(iso));
  }
}

inline void check_modmath(Checker& check, const modmath::ShorInstance& inst) {
  bool minimal = modmath::mod_pow(inst.x, inst.r, inst.N) == 1;
  for (u64 k = 1; k < inst.r && minimal; ++k) minimal = modmath::mod_pow(inst.x, k, inst.N) != 1;
  check(minimal, "order");
  check((inst.r_tilde & 1) == 1 && (inst.r_tilde << inst.m) == inst.r, "two_adic_split");
  auto u = modmath::modular_multiply_permutation(inst.x, inst.N, inst.l);
  check(u.is_bijection(), "permutation_bijection");
  for (unsigned k = 0; k < 6; ++k)
    check(modmath::permutation_power_2k(u, k)(1) == modmath::mod_pow(inst.x, u64{1} << k, inst.N),
          "permutation_power", "k = " + std::to_string(k));
}

inline void check_instance(VerifyResult& res, const modmath::ShorInstance& inst,
                           const VerifyOptions& opt) {
  Checker check(res, inst.N, inst.x);
  check_modmath(check, inst);
  const unsigned n = inst.top_width;
  const unsigned depth_bound = modmath::ceil_log2(n) + 1;

  // Construction, compared with the oracle after every gate.
  ttn::TreeNetwork tree = ttn::initial_tree(inst, opt.tol);
  for (unsigned i = 0; i < n; ++i) {
    ttn::absorb_qubit(tree, i);
    auto dense = oracle::dense_partial_state(inst, i + 1);
    auto got = oracle::from_tensor(ttn::to_statevector(tree), i + 1, inst.l);
    const double f = oracle::fidelity(dense, got);
    if (!check(std::abs(f - 1.0) <= opt.exact, "oracle_fidelity",
               "after qubit " + std::to_string(i) + ": " + fmt(1.0 - f)))
      break;
    check(tree.svd_per_qubit.back() <= depth_bound + 1, "svd_count",
          std::to_string(tree.svd_per_qubit.back()) + " SVDs absorbing qubit " + std::to_string(i));
  }
  if (!tree.complete()) return;
  ttn::canonicalize(tree, opt.tol);
  check(ttn::depth(tree) <= depth_bound, "depth", std::to_string(ttn::depth(tree)));

  const auto dense = oracle::dense_shor_state(inst);
  const double q = std::ldexp(1.0, static_cast<int>(n));
  for (const auto& e : ttn::edges(tree)) {
    std::vector<unsigned> subset;
    for (std::size_t s = e.lo; s < e.hi; ++s) subset.push_back(static_cast<unsigned>(s));
    const auto want = oracle::dense_schmidt_spectrum(dense, subset);
    const double gap = spectrum_gap(e.spectrum.values, want);
    check(gap <= opt.exact, "edge_spectrum",
          e.id + ": rank " + std::to_string(e.spectrum.rank()) + " vs " +
              std::to_string(want.size()) + ", gap " + fmt(gap));
    const auto region = ttn::region_of(e, inst);
    if (region != ttn::Region::Mixed) {
      const u64 p = ttn::predicted_rank(static_cast<unsigned>(e.cluster()), region, inst);
      check(e.spectrum.rank() == p, "cluster_rank",
            e.id + ": " + std::to_string(e.spectrum.rank()) + " vs " + std::to_string(p));
    }
    if (e.cluster() == 1) {
      const bool idle = inst.r_tilde == 1 && e.lo >= inst.m;
      check(e.spectrum.rank() == (idle ? 1u : 2u), "leaf_rank", e.id);
    }
  }
  const auto& root = ttn::schmidt_spectrum(tree, ttn::edge_label(ttn::kRoot, tree.top));
  check(root.rank() == inst.r, "root_bond",
        std::to_string(root.rank()) + " vs r = " + std::to_string(inst.r));
  {
    std::vector<double> want;
    for (u64 b : tree.support) want.push_back(std::sqrt(preimage_count(inst, b) / q));
    std::sort(want.rbegin(), want.rend());
    check(spectrum_gap(root.values, want) <= opt.exact, "root_spectrum");
  }

  // Every possible measurement outcome.
  const std::vector<u64> support = tree.support;
  for (u64 b : support) {
    check.at_bottom(b);
    ttn::TreeNetwork t = tree;
    const auto rec = ttn::measure_bottom(t, b, opt.seed);
    check(std::abs(rec.probability - preimage_count(inst, b) / q) <= opt.exact, "probability",
          fmt(rec.probability));
    check(modmath::mod_pow(inst.x, rec.outcome_index, inst.N) == b && rec.outcome_index < inst.r,
          "outcome_index");
    const auto proj = oracle::dense_projected_state(inst, b);
    const double ft = oracle::fidelity(proj, oracle::from_tensor(ttn::to_statevector(t), n, 0));
    check(std::abs(ft - 1.0) <= opt.exact, "measured_fidelity", fmt(1.0 - ft));
    for (const auto& e : ttn::edges(t))
      if (e.cluster() == 1 && e.lo < inst.m) check(e.spectrum.rank() == 1, "disentangled", e.id);

    const mps::MPS chain = mps::tree_to_mps(t);
    const double fm = oracle::fidelity(proj, oracle::from_tensor(mps::mps_to_statevector(chain), n, 0));
    check(std::abs(fm - 1.0) <= opt.exact, "mps_fidelity", fmt(1.0 - fm));
    const auto profile = mps::bond_profile(chain);
    for (unsigned k = 1; k < n; ++k) {
      std::vector<unsigned> left;
      for (unsigned s = 0; s < k; ++s) left.push_back(s);
      const std::size_t oracle_rank = oracle::dense_schmidt_spectrum(proj, left).size();
      const u64 law = profile_law(inst, k);
      check(profile[k - 1] == law && oracle_rank == law, "profile",
            "cut " + std::to_string(k) + ": mps " + std::to_string(profile[k - 1]) + ", oracle " +
                std::to_string(oracle_rank) + ", law " + std::to_string(law));
    }

    if (inst.l <= 5) {
      auto qft = mps::apply_qft(chain, 0.0);
      const auto want = oracle::probabilities(oracle::dense_qft(proj));
      const auto got = oracle::probabilities(
          oracle::from_tensor(mps::mps_to_statevector(qft.mps), n, 0));
      double tv = 0;
      for (std::size_t i = 0; i < want.size(); ++i) tv += std::abs(want[i] - got[i]);
      check(tv / 2 < 1e-8, "qft_total_variation", fmt(tv / 2));
    }
  }
}

inline VerifyResult run(const VerifyOptions& opt) {
  VerifyResult res;
  check_svd_kernel(res, opt);
  for (u64 n : kModuli) {
    if (modmath::ceil_log2(n) > opt.l_max) continue;
    for (u64 x = 2; x < n; ++x) {
      if (modmath::gcd(x, n) != 1) continue;
      ++res.instances;
      check_instance(res, modmath::make_instance(n, x), opt);
    }
  }
  return res;
}

}  // namespace shor_ttn::verify
