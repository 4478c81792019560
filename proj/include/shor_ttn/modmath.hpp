#pragma once

// Exact integer arithmetic behind the circuit: modular powers, the
// modular-multiplication permutation U(x, N) and its powers, order
// finding, and the classical post-processing that turns a measured
// top-register value into factors.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shor_ttn/errors.hpp"

namespace shor_ttn::modmath {

using u64 = std::uint64_t;

inline constexpr u64 kMaxModulus = (u64{1} << 31) - 1;

inline u64 gcd(u64 a, u64 b) {
  if (a == 0 && b == 0) throw DomainError("gcd(0, 0) is undefined");
  while (b != 0) {
    u64 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline u64 lcm(u64 a, u64 b) { return a / gcd(a, b) * b; }

// Smallest w with 2^w >= v (0 for v <= 1).
inline unsigned ceil_log2(u64 v) {
  unsigned w = 0;
  while (w < 64 && (u64{1} << w) < v) ++w;
  return w;
}

inline u64 mul_mod(u64 a, u64 b, u64 n) {
  return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % n);
}

inline u64 mod_pow(u64 x, u64 e, u64 n) {
  if (n < 2) throw DomainError("mod_pow: modulus must be >= 2");
  u64 result = 1;
  u64 base = x % n;
  while (e > 0) {
    if (e & 1) result = mul_mod(result, base, n);
    base = mul_mod(base, base, n);
    e >>= 1;
  }
  return result;
}

// Brute-force order of x in Z_N^*. Bounded by N iterations.
inline u64 multiplicative_order(u64 x, u64 n) {
  if (n < 2) throw DomainError("multiplicative_order: modulus must be >= 2");
  if (x % n == 0 || gcd(x % n, n) != 1)
    throw DomainError("multiplicative_order: gcd(x, N) != 1");
  u64 y = x % n;
  u64 r = 1;
  while (y != 1) {
    y = mul_mod(y, x, n);
    ++r;
    if (r > n) throw DomainError("multiplicative_order: no order found");
  }
  return r;
}

struct TwoAdic {
  unsigned m = 0;
  u64 odd = 1;
};

inline TwoAdic two_adic_split(u64 r) {
  if (r == 0) throw DomainError("two_adic_split: r must be >= 1");
  TwoAdic out;
  while ((r & 1) == 0) {
    r >>= 1;
    ++out.m;
  }
  out.odd = r;
  return out;
}

// Problem parameters and the order-derived quantities.
struct ShorInstance {
  u64 N = 0;
  u64 x = 0;
  unsigned l = 0;          // bottom register width in bits
  unsigned top_width = 0;  // 2l
  u64 r = 0;               // order of x mod N
  unsigned m = 0;          // two-adic valuation of r
  u64 r_tilde = 1;         // r / 2^m
  unsigned l_r = 0;        // ceil(log2 r)
  unsigned l_r_tilde = 0;  // ceil(log2 r_tilde)

  u64 qudit_dim() const { return u64{1} << l; }
  u64 top_dim() const { return u64{1} << top_width; }
};

// l = 0 selects the default width ceil(log2 N).
inline ShorInstance make_instance(u64 n, u64 x, unsigned l = 0) {
  if (n < 2 || n > kMaxModulus)
    throw DomainError("N must lie in [2, 2^31)");
  // x = 1 is the degenerate r = 1 product-state instance, kept for testing
  if (x == 0 || x >= n) throw DomainError("x must satisfy 1 <= x < N");
  if (gcd(x, n) != 1) throw DomainError("gcd(x, N) != 1");
  ShorInstance inst;
  inst.N = n;
  inst.x = x;
  inst.l = l == 0 ? ceil_log2(n) : l;
  if ((u64{1} << inst.l) < n)
    throw DomainError("register width l=" + std::to_string(inst.l) + " too small for N");
  if (2 * inst.l >= 63) throw DomainError("register width too large");
  inst.top_width = 2 * inst.l;
  inst.r = multiplicative_order(x, n);
  auto split = two_adic_split(inst.r);
  inst.m = split.m;
  inst.r_tilde = split.odd;
  inst.l_r = ceil_log2(inst.r);
  inst.l_r_tilde = ceil_log2(inst.r_tilde);
  return inst;
}

// Index map on the 2^l qudit basis: map[b] = image of |b>.
struct Permutation {
  std::vector<u64> map;

  u64 size() const { return map.size(); }
  u64 operator()(u64 b) const { return map[b]; }

  bool is_bijection() const {
    std::vector<bool> seen(map.size(), false);
    for (u64 v : map) {
      if (v >= map.size() || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  Permutation inverse() const {
    Permutation inv;
    inv.map.resize(map.size());
    for (u64 b = 0; b < map.size(); ++b) inv.map[map[b]] = b;
    return inv;
  }

  // (this ∘ other)(b) = this(other(b))
  Permutation after(const Permutation& other) const {
    Permutation out;
    out.map.resize(map.size());
    for (u64 b = 0; b < map.size(); ++b) out.map[b] = map[other.map[b]];
    return out;
  }

  bool operator==(const Permutation&) const = default;
};

// U|b> = |x b mod N> for b < N, identity for b >= N.
inline Permutation modular_multiply_permutation(u64 x, u64 n, unsigned l) {
  if (n < 2 || n > kMaxModulus) throw DomainError("N must lie in [2, 2^31)");
  if (gcd(x % n, n) != 1) throw DomainError("not a permutation: gcd(x, N) != 1");
  const u64 size = u64{1} << l;
  if (size < n) throw DomainError("2^l must be >= N");
  Permutation p;
  p.map.resize(size);
  for (u64 b = 0; b < size; ++b) p.map[b] = b < n ? mul_mod(x, b, n) : b;
  return p;
}

// p composed with itself 2^k times, by k squarings of the index map.
inline Permutation permutation_power_2k(const Permutation& p, unsigned k) {
  Permutation out = p;
  for (unsigned i = 0; i < k; ++i) out = out.after(out);
  return out;
}

// Smallest convergent denominator q <= N of y/Q with |y/Q - p/q| <= 1/(2Q).
inline std::optional<u64> recover_period(u64 y, u64 q_total, u64 n) {
  if (q_total == 0 || y >= q_total) throw DomainError("recover_period: need 0 <= y < Q");
  if (y == 0) return std::nullopt;
  using i128 = __int128;
  // convergents h/k of y/Q, seeded with h_{-1}/k_{-1} = 1/0 and h_{-2}/k_{-2} = 0/1
  i128 h_prev = 0, h = 1;
  i128 k_prev = 1, k = 0;
  u64 num = y, den = q_total;
  while (den != 0) {
    u64 a = num / den;
    u64 rem = num % den;
    num = den;
    den = rem;
    i128 h_next = static_cast<i128>(a) * h + h_prev;
    i128 k_next = static_cast<i128>(a) * k + k_prev;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
    if (k > static_cast<i128>(n)) break;
    i128 diff = static_cast<i128>(y) * k - h * static_cast<i128>(q_total);
    if (diff < 0) diff = -diff;
    if (2 * diff <= k) return static_cast<u64>(k);
  }
  return std::nullopt;
}

// Standard even-order factor extraction; absent on odd r or x^(r/2) = -1.
inline std::optional<std::pair<u64, u64>> factors_from_period(u64 x, u64 r, u64 n) {
  if (r == 0 || r % 2 != 0) return std::nullopt;
  u64 half = mod_pow(x, r / 2, n);
  if (half == n - 1 || half == 1) return std::nullopt;
  u64 p = gcd(half - 1, n);
  u64 q = gcd(half + 1, n);
  if (p <= 1 || p >= n || q <= 1 || q >= n) return std::nullopt;
  if (p > q) std::swap(p, q);
  return std::make_pair(p, q);
}

// Discrete log of b to base x, i.e. the i < r with x^i = b (mod N).
inline std::optional<u64> discrete_log(u64 x, u64 b, u64 n) {
  u64 y = 1 % n;
  for (u64 i = 0; i <= n; ++i) {
    if (y == b) return i;
    y = mul_mod(y, x, n);
    if (y == 1 % n && i > 0) break;
  }
  return std::nullopt;
}

}  // namespace shor_ttn::modmath
