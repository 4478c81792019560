#include <gtest/gtest.h>

#include "support.hpp"

using namespace shor_ttn;
using namespace testing_support;

namespace {

ttn::TreeNetwork measured_tree(u64 n, u64 x, u64 b) {
  auto tree = ttn::build_tree(modmath::make_instance(n, x));
  ttn::canonicalize(tree);
  ttn::measure_bottom(tree, b, 0);
  return tree;
}

u64 law(const modmath::ShorInstance& inst, unsigned k) {
  u64 v = inst.r_tilde;
  const unsigned grow = k > inst.m ? k - inst.m : 0;
  v = std::min<u64>(v, u64{1} << grow);
  return std::min<u64>(v, u64{1} << (inst.top_width - k));
}

double mps_norm(const mps::MPS& m) {
  return mps::mps_to_statevector(m).norm();
}

}  // namespace

TEST(TreeToMps, RequiresMeasurement) {
  auto tree = ttn::build_tree(modmath::make_instance(15, 7));
  EXPECT_THROW(mps::tree_to_mps(tree), StateError);
}

TEST(TreeToMps, FifteenSevenIsProduct) {
  auto m = mps::tree_to_mps(measured_tree(15, 7, 4));
  auto p = mps::bond_profile(m);
  ASSERT_EQ(p.size(), 7u);
  for (auto d : p) EXPECT_EQ(d, 1u);
  auto b = m.bond_dims();
  EXPECT_EQ(b.front(), 1u);
  EXPECT_EQ(b.back(), 1u);
}

TEST(TreeToMps, TwentyOneTwoPlateau) {
  auto m = mps::tree_to_mps(measured_tree(21, 2, 1));
  auto p = mps::bond_profile(m);
  EXPECT_EQ(*std::max_element(p.begin(), p.end()), 3u);
  auto inst = modmath::make_instance(21, 2);
  for (unsigned k = 1; k < inst.top_width; ++k) EXPECT_EQ(p[k - 1], law(inst, k)) << k;
}

TEST(TreeToMps, FidelityAndUpdateBound) {
  for (u64 n : {21u, 33u, 39u, 55u}) {
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = ttn::build_tree(inst);
      ttn::canonicalize(tree);
      const u64 b = tree.support.back();
      ttn::measure_bottom(tree, b, 0);
      auto conv = mps::tree_to_mps_counted(tree);
      const unsigned depth = modmath::ceil_log2(inst.top_width);
      EXPECT_LE(conv.updates, inst.top_width * (depth + 1));
      auto a = oracle::from_tensor(ttn::to_statevector(tree), inst.top_width, 0);
      auto c = oracle::from_tensor(mps::mps_to_statevector(conv.mps), inst.top_width, 0);
      ASSERT_NEAR(oracle::fidelity(a, c), 1.0, 1e-10) << n << " " << x;
      EXPECT_NEAR(mps_norm(conv.mps), 1.0, 1e-10);
    }
  }
}

TEST(BondProfile, ProductState) {
  for (auto d : mps::bond_profile(mps::basis_state(6, 13))) EXPECT_EQ(d, 1u);
}

// Canonical chain bonds carry the oracle Schmidt spectrum of each cut.
TEST(BondProfile, MatchesOracleEveryOutcome) {
  for (u64 n : {15u, 21u, 33u, 35u}) {
    for (u64 x : valid_bases(n)) {
      auto inst = modmath::make_instance(n, x);
      auto tree = ttn::build_tree(inst);
      ttn::canonicalize(tree);
      for (u64 b : tree.support) {
        auto t = tree;
        ttn::measure_bottom(t, b, 0);
        auto m = mps::tree_to_mps(t);
        auto p = mps::bond_profile(m);
        auto dense = oracle::dense_projected_state(inst, b);
        for (unsigned k = 1; k < inst.top_width; ++k) {
          std::vector<unsigned> left;
          for (unsigned s = 0; s < k; ++s) left.push_back(s);
          ASSERT_EQ(p[k - 1], oracle::dense_schmidt_spectrum(dense, left).size());
          ASSERT_EQ(p[k - 1], law(inst, k)) << n << " " << x << " b=" << b << " k=" << k;
        }
      }
    }
  }
}

TEST(MoveCenter, PreservesState) {
  auto m = mps::tree_to_mps(measured_tree(35, 2, 2));
  auto before = mps::mps_to_statevector(m);
  mps::move_center(m, 0);
  EXPECT_EQ(m.center, 0u);
  auto after = mps::mps_to_statevector(m);
  double err = 0;
  for (std::size_t i = 0; i < before.size(); ++i) err += std::norm(before[i] - after[i]);
  EXPECT_LT(std::sqrt(err), 1e-12);
  EXPECT_NEAR(m.norm(), 1.0, 1e-12);
}

TEST(Qft, ZeroStateToUniform) {
  auto res = mps::apply_qft(mps::basis_state(6, 0), 0.0);
  auto v = mps::mps_to_statevector(res.mps);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(std::abs(v[i]), 1.0 / 8, 1e-12);
  for (auto d : mps::bond_profile(res.mps)) EXPECT_EQ(d, 1u);
}

TEST(Qft, BasisStatesMatchDense) {
  for (u64 y : {1u, 5u, 37u, 63u}) {
    auto res = mps::apply_qft(mps::basis_state(6, y), 0.0);
    auto got = oracle::from_tensor(mps::mps_to_statevector(res.mps), 6, 0);
    oracle::DenseState in;
    in.top_bits = 6;
    in.amp.assign(64, 0.0);
    in.amp[y] = 1.0;
    auto want = oracle::dense_qft(in);
    for (std::size_t i = 0; i < 64; ++i) ASSERT_LT(std::abs(got.amp[i] - want.amp[i]), 1e-12) << y << " " << i;
  }
}

TEST(Qft, FifteenSevenSupport) {
  for (u64 b : {1u, 4u, 7u, 13u}) {
    auto m = mps::tree_to_mps(measured_tree(15, 7, b));
    auto res = mps::apply_qft(m, 0.0);
    auto v = mps::mps_to_statevector(res.mps);
    auto p = oracle::probabilities(oracle::from_tensor(v, 8, 0));
    for (std::size_t y = 0; y < 256; ++y) {
      if (y % 64 == 0) {
        EXPECT_NEAR(p[y], 0.25, 1e-10) << y;
      } else {
        EXPECT_LT(p[y], 1e-20) << y;
      }
    }
  }
}

TEST(Qft, NormWithTruncation) {
  auto m = mps::tree_to_mps(measured_tree(21, 2, 4));
  for (double tol : {0.0, 1e-10, 1e-4}) {
    auto res = mps::apply_qft(m, tol);
    EXPECT_LE(std::abs(mps_norm(res.mps) - 1.0), 1e-10 + res.truncation_weight) << tol;
  }
}

TEST(Sample, BasisState) {
  auto m = mps::basis_state(7, 93);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(mps::sample_bitstring(m, rng), 93u);
  auto off = m;
  mps::move_center(off, 3);
  EXPECT_THROW(mps::sample_bitstring(off, rng), StateError);
}

TEST(Sample, FifteenSevenSupportAndUniform) {
  auto res = mps::apply_qft(mps::tree_to_mps(measured_tree(15, 7, 7)), 0.0);
  mps::move_center(res.mps, 0);
  std::mt19937_64 rng(11);
  std::vector<u64> counts(4, 0);
  for (int i = 0; i < 10000; ++i) {
    const u64 y = mps::sample_bitstring(res.mps, rng);
    ASSERT_EQ(y % 64, 0u);
    ++counts[y / 64];
  }
  EXPECT_GT(chi_square_p({0.25, 0.25, 0.25, 0.25}, counts), 1e-3);
}

TEST(Sample, UniformBitsFair) {
  auto res = mps::apply_qft(mps::basis_state(8, 0), 0.0);
  mps::move_center(res.mps, 0);
  std::mt19937_64 rng(12);
  std::vector<u64> ones(8, 0);
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const u64 y = mps::sample_bitstring(res.mps, rng);
    for (int k = 0; k < 8; ++k) ones[k] += (y >> k) & 1;
  }
  for (int k = 0; k < 8; ++k) EXPECT_GT(chi_square_p({0.5, 0.5}, {trials - ones[k], ones[k]}), 1e-3) << k;
}

TEST(Sample, SeedDeterminism) {
  auto res = mps::apply_qft(mps::tree_to_mps(measured_tree(21, 2, 8)), 0.0);
  mps::move_center(res.mps, 0);
  EXPECT_EQ(mps::sample_bitstring(res.mps, u64{5}), mps::sample_bitstring(res.mps, u64{5}));
}

TEST(MpsToStatevector, SingleSiteAndCap) {
  auto m = mps::basis_state(1, 1);
  auto v = mps::mps_to_statevector(m);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[1], cplx(1.0));
  EXPECT_THROW(mps::mps_to_statevector(mps::basis_state(12, 0), 1 << 10), CapacityError);
}
