#pragma once

// Open-boundary matrix product states over the top register: conversion
// from a measured tree, bond profiles, the QFT as a nearest-neighbour swap
// network, and sequential Born sampling.
//
// Site k carries axes ("m<k>", "q<k>", "m<k+1>"); site k is bit k of the
// outcome integer.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shor_ttn/errors.hpp"
#include "shor_ttn/svd.hpp"
#include "shor_ttn/tensor.hpp"
#include "shor_ttn/ttn.hpp"

namespace shor_ttn::mps {

inline std::string bond_label(std::size_t k) { return "m" + std::to_string(k); }
inline std::string site_label(std::size_t k) { return "q" + std::to_string(k); }

struct MPS {
  std::vector<CTensor> sites;
  std::size_t center = 0;  // orthogonality center

  std::size_t size() const { return sites.size(); }

  // Length n + 1, boundary bonds included.
  std::vector<std::size_t> bond_dims() const {
    std::vector<std::size_t> d;
    if (sites.empty()) return d;
    d.push_back(sites[0].dim(bond_label(0)));
    for (std::size_t k = 0; k < sites.size(); ++k) d.push_back(sites[k].dim(bond_label(k + 1)));
    return d;
  }

  double norm() const { return sites.empty() ? 0.0 : sites[center].norm(); }
};

struct Conversion {
  MPS mps;
  std::size_t updates = 0;  // contractions plus SVDs
};

// Peels qubits off the measured tree left to right: the leaf is contracted
// up its parent chain into the block holding the previous site's open
// bond, and an SVD splits the new site off that block.
inline Conversion tree_to_mps_counted(const ttn::TreeNetwork& tree_in) {
  if (!tree_in.measured) throw StateError("tree_to_mps: bottom register not measured");
  ttn::TreeNetwork tree = tree_in;
  ttn::detail::move_center(tree, tree.top);
  const std::size_t n = tree.inst.top_width;
  const SvdOptions opt{tree.tol};
  Conversion out;
  std::vector<RTensor> sites;
  std::map<std::string, bool> merged;
  std::optional<RTensor> block;  // carries open bond m<k>

  for (std::size_t k = 0; k < n; ++k) {
    const std::string leaf = ttn::qubit_label(k);
    RTensor z = tree.tensors.at(leaf);
    std::string node = leaf;
    while (true) {
      const std::string up = tree.parent.at(node);
      if (up.empty() || merged.count(up)) break;
      const std::string e = ttn::edge_label(up, node);
      z = contract(tree.tensors.at(up), z, {{e, e}});
      ++out.updates;
      merged[up] = true;
      node = up;
    }
    merged[leaf] = true;
    if (block) {
      const std::string e = ttn::edge_label(tree.parent.at(node), node);
      z = contract(*block, z, {{e, e}});
      ++out.updates;
    }
    const std::string left = bond_label(k), right = bond_label(k + 1);
    if (!block) z = add_unit_axis(std::move(z), left, true);
    if (k + 1 == n) {
      z = add_unit_axis(std::move(z), right);
      sites.push_back(permute_axes(std::move(z), {left, site_label(k), right}));
      break;
    }
    auto s = svd_split(std::move(z), {left, site_label(k)}, right, opt);
    ++out.updates;
    scale_axis(s.right, right, s.spectrum.values);
    sites.push_back(std::move(s.left));
    block = std::move(s.right);
  }
  for (auto& s : sites) out.mps.sites.push_back(to_complex(s));
  out.mps.center = n - 1;
  return out;
}

inline MPS tree_to_mps(const ttn::TreeNetwork& tree) { return tree_to_mps_counted(tree).mps; }

// Interior bond dimensions, 2l - 1 of them.
inline std::vector<std::size_t> bond_profile(const MPS& m) {
  auto d = m.bond_dims();
  if (d.size() < 2) return {};
  return std::vector<std::size_t>(d.begin() + 1, d.end() - 1);
}

inline void shift_right(MPS& m) {
  const std::size_t c = m.center;
  const std::string b = bond_label(c + 1);
  const std::string tmp = fresh_bond_label();
  auto qr = qr_split(std::move(m.sites[c]), {bond_label(c), site_label(c)}, tmp);
  qr.q.relabel(tmp, b);
  m.sites[c] = std::move(qr.q);
  CTensor next = contract(qr.r, m.sites[c + 1], {{b, b}});
  next.relabel(tmp, b);
  m.sites[c + 1] = std::move(next);
  m.center = c + 1;
}

inline void shift_left(MPS& m) {
  const std::size_t c = m.center;
  const std::string b = bond_label(c);
  const std::string tmp = fresh_bond_label();
  auto qr = qr_split(std::move(m.sites[c]), {site_label(c), bond_label(c + 1)}, tmp);
  qr.q.relabel(tmp, b);
  m.sites[c] = permute_axes(std::move(qr.q), {b, site_label(c), bond_label(c + 1)});
  CTensor prev = contract(m.sites[c - 1], qr.r, {{b, b}});
  prev.relabel(tmp, b);
  m.sites[c - 1] = std::move(prev);
  m.center = c - 1;
}

inline void move_center(MPS& m, std::size_t target) {
  while (m.center < target) shift_right(m);
  while (m.center > target) shift_left(m);
}

struct QftResult {
  MPS mps;
  double truncation_weight = 0.0;
  std::size_t max_bond = 0;
};

// QFT with outputs in natural order: round t applies H to the last site
// and walks that qubit down to site t with combined SWAP * CPhase gates.
// Each two-site split drops at most `tol` squared weight.
inline QftResult apply_qft(MPS m, double tol = 1e-10) {
  const std::size_t n = m.size();
  QftResult res;
  SvdOptions opt;
  opt.rel_tol = 0.0;
  opt.max_discarded_weight = tol;
  const double h = 1.0 / std::sqrt(2.0);
  for (std::size_t t = 0; t < n; ++t) {
    move_center(m, n - 1);
    {
      CTensor& s = m.sites[n - 1];
      CTensor p = permute_axes(s, {bond_label(n - 1), site_label(n - 1), bond_label(n)});
      const std::size_t L = p.dims()[0], R = p.dims()[2];
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t r = 0; r < R; ++r) {
          cplx a0 = p[(l * 2 + 0) * R + r], a1 = p[(l * 2 + 1) * R + r];
          p[(l * 2 + 0) * R + r] = h * (a0 + a1);
          p[(l * 2 + 1) * R + r] = h * (a0 - a1);
        }
      s = std::move(p);
    }
    for (std::size_t s = n - 1; s-- > t;) {
      const double phi = std::numbers::pi / std::pow(2.0, static_cast<double>(n - 1 - s));
      const std::string mid = bond_label(s + 1);
      CTensor theta = contract(m.sites[s], m.sites[s + 1], {{mid, mid}});
      // The swap is a relabel of the two physical axes.
      const std::string qa = site_label(s), qb = site_label(s + 1), tmp = "swap#";
      theta.relabel(qa, tmp);
      theta.relabel(qb, qa);
      theta.relabel(tmp, qb);
      theta = permute_axes(std::move(theta), {bond_label(s), qa, qb, bond_label(s + 2)});
      const std::size_t L = theta.dims()[0], R = theta.dims()[3];
      const cplx ph = std::polar(1.0, phi);
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t r = 0; r < R; ++r) theta[((l * 2 + 1) * 2 + 1) * R + r] *= ph;
      auto sp = svd_split(std::move(theta), {bond_label(s), qa}, mid, opt);
      res.truncation_weight += sp.discarded_weight;
      scale_axis(sp.left, mid, sp.spectrum.values);
      res.max_bond = std::max(res.max_bond, sp.spectrum.rank());
      m.sites[s] = std::move(sp.left);
      m.sites[s + 1] = std::move(sp.right);
      m.center = s;
    }
  }
  res.mps = std::move(m);
  return res;
}

// Draws one outcome from the Born distribution by left-to-right
// conditional marginals; the MPS must have its center at site 0.
inline std::uint64_t sample_bitstring(const MPS& m, std::mt19937_64& rng) {
  if (m.center != 0) throw StateError("sample_bitstring: center must be at site 0");
  std::vector<cplx> env{1.0};
  std::uint64_t out = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    CTensor s = permute_axes(m.sites[k], {bond_label(k), site_label(k), bond_label(k + 1)});
    const std::size_t L = s.dims()[0], R = s.dims()[2];
    std::vector<cplx> w[2] = {std::vector<cplx>(R, 0.0), std::vector<cplx>(R, 0.0)};
    double p[2] = {0, 0};
    for (int q = 0; q < 2; ++q) {
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t r = 0; r < R; ++r) w[q][r] += env[l] * s[(l * 2 + q) * R + r];
      for (auto& v : w[q]) p[q] += std::norm(v);
    }
    const double u = ttn::unit_double(rng) * (p[0] + p[1]);
    const int bit = u < p[0] ? 0 : 1;
    const double nrm = std::sqrt(p[bit]);
    env = std::move(w[bit]);
    for (auto& v : env) v /= nrm;
    if (bit) out |= std::uint64_t{1} << k;
  }
  return out;
}

inline std::uint64_t sample_bitstring(const MPS& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_bitstring(m, rng);
}

// Dense contraction, axes (q0 .. q_{n-1}).
inline CTensor mps_to_statevector(const MPS& m, std::size_t cap = std::size_t{1} << 24) {
  const std::size_t n = m.size();
  if (n == 0) throw StateError("empty MPS");
  if (n >= 63 || (std::size_t{1} << n) > cap) throw CapacityError("mps_to_statevector: dimension exceeds cap");
  CTensor acc = m.sites[0];
  for (std::size_t k = 1; k < n; ++k) {
    const std::string b = bond_label(k);
    acc = contract(acc, m.sites[k], {{b, b}});
  }
  Labels order;
  for (std::size_t k = 0; k < n; ++k) order.push_back(site_label(k));
  order.push_back(bond_label(0));
  order.push_back(bond_label(n));
  acc = permute_axes(std::move(acc), order);
  order.resize(n);
  Dims dims(n, 2);
  return CTensor(order, dims, std::move(acc.storage()));
}

// Product state with site k set to bit k of `value`.
inline MPS basis_state(std::size_t n, std::uint64_t value) {
  MPS m;
  for (std::size_t k = 0; k < n; ++k) {
    CTensor s({bond_label(k), site_label(k), bond_label(k + 1)}, {1, 2, 1});
    s[(value >> k) & 1] = 1.0;
    m.sites.push_back(std::move(s));
  }
  m.center = 0;
  return m;
}

}  // namespace shor_ttn::mps
