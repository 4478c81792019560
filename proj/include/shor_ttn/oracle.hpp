#pragma once

// Brute-force dense reference states. Index convention everywhere:
// composite index = top * 2^bottom_bits + bottom, top bit i at the 2^i place.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "shor_ttn/errors.hpp"
#include "shor_ttn/modmath.hpp"
#include "shor_ttn/tensor.hpp"

namespace shor_ttn::oracle {

using modmath::ShorInstance;
using modmath::u64;

inline constexpr unsigned kMaxQubits = 24;

struct DenseState {
  unsigned top_bits = 0;
  unsigned bottom_bits = 0;  // 0 once the bottom register is gone
  std::vector<cplx> amp;

  std::size_t dim() const { return amp.size(); }
  double norm() const {
    double s = 0;
    for (const auto& a : amp) s += std::norm(a);
    return std::sqrt(s);
  }
};

inline void check_cap(unsigned bits) {
  if (bits > kMaxQubits) throw CapacityError("dense state over " + std::to_string(bits) + " qubits");
}

// State after the first k controlled gates, restricted to those k top qubits.
inline DenseState dense_partial_state(const ShorInstance& inst, unsigned k) {
  check_cap(k + inst.l);
  DenseState s;
  s.top_bits = k;
  s.bottom_bits = inst.l;
  s.amp.assign(std::size_t{1} << (k + inst.l), 0.0);
  const double a = std::pow(2.0, -0.5 * k);
  u64 y = 1 % inst.N;
  for (u64 t = 0; t < (u64{1} << k); ++t) {
    s.amp[(t << inst.l) + y] = a;
    y = modmath::mul_mod(y, inst.x, inst.N);
  }
  return s;
}

inline DenseState dense_shor_state(const ShorInstance& inst) {
  return dense_partial_state(inst, inst.top_width);
}

// Normalized top-register state left after reading `bottom` on the qudit.
inline DenseState dense_projected_state(const ShorInstance& inst, u64 bottom) {
  check_cap(inst.top_width);
  DenseState s;
  s.top_bits = inst.top_width;
  s.amp.assign(std::size_t{1} << inst.top_width, 0.0);
  u64 y = 1 % inst.N;
  std::size_t count = 0;
  for (u64 t = 0; t < s.amp.size(); ++t) {
    if (y == bottom) {
      s.amp[t] = 1.0;
      ++count;
    }
    y = modmath::mul_mod(y, inst.x, inst.N);
  }
  if (count == 0) throw InvalidOutcome("bottom value never reached");
  for (auto& a : s.amp) a /= std::sqrt(static_cast<double>(count));
  return s;
}

// Physical index p < top_bits is top qubit p; p == top_bits is the qudit.
inline std::vector<double> dense_schmidt_spectrum(const DenseState& s,
                                                  const std::vector<unsigned>& subset,
                                                  double cutoff = 1e-12) {
  const unsigned nphys = s.top_bits + (s.bottom_bits > 0 ? 1 : 0);
  std::vector<bool> in(nphys, false);
  for (unsigned p : subset) {
    if (p >= nphys) throw DomainError("physical index out of range");
    in[p] = true;
  }
  if (subset.empty() || subset.size() >= nphys) throw DomainError("subset must be proper and nonempty");
  // Bit offsets of every physical index inside the composite index.
  auto width = [&](unsigned p) { return p < s.top_bits ? 1u : s.bottom_bits; };
  auto shift = [&](unsigned p) { return p < s.top_bits ? s.bottom_bits + p : 0u; };
  // Only nonzero amplitudes are scattered; all-zero rows and columns are
  // dropped before the SVD since they carry no singular values.
  std::vector<std::pair<std::size_t, std::size_t>> pos;
  std::vector<cplx> val;
  for (std::size_t idx = 0; idx < s.amp.size(); ++idx) {
    if (s.amp[idx] == cplx{0}) continue;
    std::size_t r = 0, c = 0;
    unsigned rp = 0, cp = 0;
    for (unsigned p = 0; p < nphys; ++p) {
      const std::size_t v = (idx >> shift(p)) & ((std::size_t{1} << width(p)) - 1);
      if (in[p]) {
        r |= v << rp;
        rp += width(p);
      } else {
        c |= v << cp;
        cp += width(p);
      }
    }
    pos.emplace_back(r, c);
    val.push_back(s.amp[idx]);
  }
  if (val.empty()) return {};
  auto compress = [](std::vector<std::size_t> keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
  };
  std::vector<std::size_t> rk, ck;
  for (auto [r, c] : pos) {
    rk.push_back(r);
    ck.push_back(c);
  }
  rk = compress(std::move(rk));
  ck = compress(std::move(ck));
  const std::size_t rows = rk.size(), cols = ck.size();
  std::vector<cplx> m(rows * cols, 0.0);
  for (std::size_t e = 0; e < val.size(); ++e) {
    const std::size_t r = std::lower_bound(rk.begin(), rk.end(), pos[e].first) - rk.begin();
    const std::size_t c = std::lower_bound(ck.begin(), ck.end(), pos[e].second) - ck.begin();
    m[r * cols + c] = val[e];
  }
  const std::size_t k = std::min(rows, cols);
  std::vector<double> sv(k), superb(k > 1 ? k - 1 : 1);
  int info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'N', 'N', static_cast<int>(rows),
                            static_cast<int>(cols), m.data(), static_cast<int>(cols), sv.data(),
                            nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) throw NumericError("oracle SVD failed");
  std::vector<double> out;
  for (double v : sv)
    if (v > cutoff) out.push_back(v);
  return out;
}

// y-amplitude = Q^{-1/2} sum_i exp(2 pi i iy / Q) amp(i), Q = 2^top_bits.
inline DenseState dense_qft(const DenseState& s, bool inverse = false) {
  if (s.bottom_bits != 0) throw DomainError("dense_qft acts on the top register only");
  if (s.top_bits > 20) throw CapacityError("dense_qft limited to 2^20 amplitudes");
  const std::size_t q = s.amp.size();
  std::vector<cplx> w(q);
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t k = 0; k < q; ++k)
    w[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                               static_cast<double>(q));
  DenseState out;
  out.top_bits = s.top_bits;
  out.amp.assign(q, 0.0);
  const double norm = 1.0 / std::sqrt(static_cast<double>(q));
  for (std::size_t i = 0; i < q; ++i) {
    if (s.amp[i] == cplx{0}) continue;
    for (std::size_t y = 0; y < q; ++y) out.amp[y] += w[(i * y) & (q - 1)] * s.amp[i];
  }
  for (auto& a : out.amp) a *= norm;
  return out;
}

// Tensor with axes (q0 .. q_{k-1} [, b]) to the composite-index vector.
template <class T>
DenseState from_tensor(const Tensor<T>& t, unsigned top_bits, unsigned bottom_bits) {
  Labels order;
  for (unsigned i = top_bits; i-- > 0;) order.push_back("q" + std::to_string(i));
  if (bottom_bits > 0) order.push_back("b");
  Tensor<T> p = permute_axes(t, order);
  DenseState s;
  s.top_bits = top_bits;
  s.bottom_bits = bottom_bits;
  s.amp.assign(p.storage().begin(), p.storage().end());
  return s;
}

inline cplx overlap(const DenseState& a, const DenseState& b) {
  if (a.amp.size() != b.amp.size()) throw DomainError("overlap of states with different dims");
  cplx s = 0;
  for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
  return s;
}

inline double fidelity(const DenseState& a, const DenseState& b) { return std::abs(overlap(a, b)); }

inline std::vector<double> probabilities(const DenseState& s) {
  std::vector<double> p(s.amp.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(s.amp[i]);
  return p;
}

}  // namespace shor_ttn::oracle
