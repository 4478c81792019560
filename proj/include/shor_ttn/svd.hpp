#pragma once

// Matrix and tensor factorizations: truncated SVD (rank revealing by
// default) and thin QR. Tall-skinny SVDs go through the Gram matrix and a
// Hermitian eigensolver, checked for orthogonality and redone with gesdd
// when the check fails.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "shor_ttn/errors.hpp"
#include "shor_ttn/linalg.hpp"
#include "shor_ttn/tensor.hpp"

namespace shor_ttn {

struct SchmidtSpectrum {
  std::vector<double> values;  // non-increasing

  std::size_t rank() const { return values.size(); }
  double weight() const {
    double s = 0;
    for (double v : values) s += v * v;
    return s;
  }
};

struct SvdOptions {
  // Values at or below rel_tol * (largest value) are dropped.
  double rel_tol = 1e-12;
  // Additionally drop the smallest values while their summed squares stay
  // within this bound (absolute, in units of the squared norm).
  double max_discarded_weight = 0.0;
  std::size_t max_rank = 0;  // 0 = unbounded
};

template <class T>
struct MatrixSvd {
  std::size_t m = 0, n = 0, k = 0;
  std::vector<T> u;       // m x k
  std::vector<double> s;  // k
  std::vector<T> vh;      // k x n
  double discarded_weight = 0.0;
};

namespace detail {

inline std::atomic<std::size_t>& gram_fallbacks() {
  static std::atomic<std::size_t> n{0};
  return n;
}

inline constexpr double kGramOrthoTol = 2.5e-13;

// Number of leading values to keep from a descending list.
inline std::size_t truncation_rank(const std::vector<double>& s, const SvdOptions& opt,
                                   double& discarded) {
  std::size_t k = 0;
  const double cut = s.empty() ? 0.0 : opt.rel_tol * s[0];
  while (k < s.size() && s[k] > cut) ++k;
  if (opt.max_rank > 0) k = std::min(k, opt.max_rank);
  double dropped = 0;
  for (std::size_t i = k; i < s.size(); ++i) dropped += s[i] * s[i];
  while (k > 1 && dropped + s[k - 1] * s[k - 1] <= opt.max_discarded_weight) {
    dropped += s[k - 1] * s[k - 1];
    --k;
  }
  discarded = dropped;
  return k;
}

// max |X^H X - I| over the k columns of a row-major m x k matrix.
template <class T>
double column_orthogonality_error(const std::vector<T>& x, std::size_t m, std::size_t k) {
  std::vector<T> g(k * k);
  linalg::gram(true, k, m, x.data(), k, g.data(), k);
  double err = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      T want = i == j ? T{1} : T{0};
      err = std::max(err, std::abs(g[i * k + j] - want));
    }
  return err;
}

template <class T>
double row_orthogonality_error(const std::vector<T>& x, std::size_t k, std::size_t n) {
  std::vector<T> g(k * k);
  linalg::gram(false, k, n, x.data(), n, g.data(), k);
  double err = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      T want = i == j ? T{1} : T{0};
      err = std::max(err, std::abs(g[i * k + j] - want));
    }
  return err;
}

// Full thin SVD of a row-major m x n matrix via LAPACK (gesdd, then gesvd).
template <class T>
MatrixSvd<T> lapack_svd(std::vector<T> a, std::size_t m, std::size_t n) {
  MatrixSvd<T> out;
  out.m = m;
  out.n = n;
  const std::size_t k = std::min(m, n);
  out.k = k;
  out.s.resize(k);
  // The row-major buffer is the column-major n x m matrix A^T, whose
  // factors land directly as A's U (in vt) and Vh (in u).
  std::vector<T> u_col(n * k), vt_col(k * m);
  std::vector<T> backup = a;
  int info = linalg::gesdd(static_cast<int>(n), static_cast<int>(m), a.data(),
                           static_cast<int>(n), out.s.data(), u_col.data(), static_cast<int>(n),
                           vt_col.data(), static_cast<int>(k));
  if (info != 0) {
    a = std::move(backup);
    std::vector<double> superb(k > 1 ? k - 1 : 1);
    info = linalg::gesvd(static_cast<int>(n), static_cast<int>(m), a.data(), static_cast<int>(n),
                         out.s.data(), u_col.data(), static_cast<int>(n), vt_col.data(),
                         static_cast<int>(k), superb.data());
    if (info != 0) throw NumericError("SVD did not converge (info " + std::to_string(info) + ")");
  }
  out.u = std::move(vt_col);
  out.vh = std::move(u_col);
  return out;
}

// Eigen route for tall matrices (m >= n): returns an empty result when
// the orthogonality check fails.
template <class T>
MatrixSvd<T> gram_svd_tall(const std::vector<T>& a, std::size_t m, std::size_t n,
                           const SvdOptions& opt) {
  std::vector<T> g(n * n);
  linalg::gram(true, n, m, a.data(), n, g.data(), n);
  std::vector<double> w(n);
  if (linalg::heevd(static_cast<int>(n), g.data(), static_cast<int>(n), w.data()) != 0) return {};
  // g read row-major now holds V^H: row j is the conjugated eigenvector j.
  std::vector<T> y(m * n);
  linalg::gemm(false, true, m, n, n, T{1}, a.data(), n, g.data(), n, T{0}, y.data(), n);
  std::vector<double> norm2(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) norm2[j] += linalg::abs2(y[i * n + j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t p, std::size_t q) { return norm2[p] > norm2[q]; });
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = std::sqrt(norm2[order[j]]);
  MatrixSvd<T> out;
  std::size_t k = truncation_rank(s, opt, out.discarded_weight);
  // Compact the kept columns in place, scaled to unit norm.
  std::vector<T> row(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) row[j] = y[i * n + order[j]] / s[j];
    std::copy(row.begin(), row.end(), y.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  y.resize(m * k);
  y.shrink_to_fit();
  if (column_orthogonality_error(y, m, k) > kGramOrthoTol) return {};
  out.m = m;
  out.n = n;
  out.k = k;
  out.u = std::move(y);
  out.s.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
  out.vh.resize(k * n);
  for (std::size_t j = 0; j < k; ++j)
    std::copy(g.begin() + static_cast<std::ptrdiff_t>(order[j] * n),
              g.begin() + static_cast<std::ptrdiff_t>((order[j] + 1) * n),
              out.vh.begin() + static_cast<std::ptrdiff_t>(j * n));
  return out;
}

// Eigen route for wide matrices (m < n) through A A^H.
template <class T>
MatrixSvd<T> gram_svd_wide(const std::vector<T>& a, std::size_t m, std::size_t n,
                           const SvdOptions& opt) {
  std::vector<T> g(m * m);
  linalg::gram(false, m, n, a.data(), n, g.data(), m);
  std::vector<double> w(m);
  if (linalg::heevd(static_cast<int>(m), g.data(), static_cast<int>(m), w.data()) != 0) return {};
  // g read row-major holds W^H; Z = W^H A has rows s_j v_j^H.
  std::vector<T> z(m * n);
  linalg::gemm(false, false, m, n, m, T{1}, g.data(), m, a.data(), n, T{0}, z.data(), n);
  std::vector<double> norm2(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t c = 0; c < n; ++c) norm2[j] += linalg::abs2(z[j * n + c]);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t p, std::size_t q) { return norm2[p] > norm2[q]; });
  std::vector<double> s(m);
  for (std::size_t j = 0; j < m; ++j) s[j] = std::sqrt(norm2[order[j]]);
  MatrixSvd<T> out;
  std::size_t k = truncation_rank(s, opt, out.discarded_weight);
  std::vector<T> vh(k * n);
  for (std::size_t j = 0; j < k; ++j) {
    const T* src = z.data() + order[j] * n;
    T* dst = vh.data() + j * n;
    for (std::size_t c = 0; c < n; ++c) dst[c] = src[c] / s[j];
  }
  z.clear();
  z.shrink_to_fit();
  if (row_orthogonality_error(vh, k, n) > kGramOrthoTol) return {};
  out.m = m;
  out.n = n;
  out.k = k;
  out.vh = std::move(vh);
  out.s.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
  out.u.resize(m * k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) out.u[i * k + j] = linalg::conj(g[order[j] * m + i]);
  return out;
}

template <class T>
void truncate(MatrixSvd<T>& f, std::size_t k) {
  if (k == f.k) return;
  std::vector<T> u(f.m * k);
  for (std::size_t i = 0; i < f.m; ++i)
    std::copy(f.u.begin() + static_cast<std::ptrdiff_t>(i * f.k),
              f.u.begin() + static_cast<std::ptrdiff_t>(i * f.k + k),
              u.begin() + static_cast<std::ptrdiff_t>(i * k));
  f.u = std::move(u);
  f.vh.resize(k * f.n);
  f.s.resize(k);
  f.k = k;
}

inline bool use_gram(std::size_t m, std::size_t n) {
  const std::size_t lo = std::min(m, n), hi = std::max(m, n);
  return lo >= 16 && hi >= 4 * lo;
}

}  // namespace detail

inline std::size_t gram_fallback_count() { return detail::gram_fallbacks().load(); }

// Truncated SVD of a row-major m x n matrix. Exactly-zero rows and columns
// are stripped before factorizing and restored as zeros in U / Vh.
template <class T>
MatrixSvd<T> matrix_svd(std::vector<T> a, std::size_t m, std::size_t n, const SvdOptions& opt = {}) {
  if (a.size() != m * n) throw TensorError("matrix_svd: buffer size mismatch");
  std::vector<bool> row_nz(m, false), col_nz(n, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a[i * n + j] != T{0}) {
        row_nz[i] = true;
        col_nz[j] = true;
      }
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < m; ++i)
    if (row_nz[i]) rows.push_back(i);
  for (std::size_t j = 0; j < n; ++j)
    if (col_nz[j]) cols.push_back(j);
  if (rows.empty()) throw NumericError("SVD of a zero tensor");
  const bool compact = rows.size() < m || cols.size() < n;
  const std::size_t mc = rows.size(), nc = cols.size();
  if (compact) {
    std::vector<T> c(mc * nc);
    for (std::size_t i = 0; i < mc; ++i)
      for (std::size_t j = 0; j < nc; ++j) c[i * nc + j] = a[rows[i] * n + cols[j]];
    a = std::move(c);
  }

  MatrixSvd<T> f;
  if (detail::use_gram(mc, nc)) {
    f = mc >= nc ? detail::gram_svd_tall(a, mc, nc, opt) : detail::gram_svd_wide(a, mc, nc, opt);
    if (f.k == 0) detail::gram_fallbacks()++;
  }
  if (f.k == 0) {
    f = detail::lapack_svd(std::move(a), mc, nc);
    detail::truncate(f, detail::truncation_rank(f.s, opt, f.discarded_weight));
  }
  if (!compact) return f;

  MatrixSvd<T> out;
  out.m = m;
  out.n = n;
  out.k = f.k;
  out.s = std::move(f.s);
  out.discarded_weight = f.discarded_weight;
  out.u.assign(m * f.k, T{0});
  out.vh.assign(f.k * n, T{0});
  for (std::size_t i = 0; i < mc; ++i)
    std::copy(f.u.begin() + static_cast<std::ptrdiff_t>(i * f.k),
              f.u.begin() + static_cast<std::ptrdiff_t>((i + 1) * f.k),
              out.u.begin() + static_cast<std::ptrdiff_t>(rows[i] * f.k));
  for (std::size_t j = 0; j < f.k; ++j)
    for (std::size_t c = 0; c < nc; ++c) out.vh[j * n + cols[c]] = f.vh[j * nc + c];
  return out;
}

template <class T>
struct SvdSplit {
  Tensor<T> left;   // (left labels..., bond)
  SchmidtSpectrum spectrum;
  Tensor<T> right;  // (bond, remaining labels...)
  double discarded_weight = 0.0;
};

inline std::string fresh_bond_label() {
  static std::atomic<std::size_t> counter{0};
  return "bond#" + std::to_string(counter++);
}

namespace detail {

template <class T>
void split_labels(const Tensor<T>& t, const Labels& left, Labels& order, Dims& ldims,
                  Dims& rdims, Labels& right, std::size_t& m, std::size_t& n) {
  if (left.empty() || left.size() >= t.rank())
    throw TensorError("split needs a proper nonempty subset of axes");
  order = left;
  right.clear();
  for (const auto& l : t.labels())
    if (std::find(left.begin(), left.end(), l) == left.end()) right.push_back(l);
  if (right.size() + left.size() != t.rank()) throw TensorError("split: unknown or repeated label");
  order.insert(order.end(), right.begin(), right.end());
  m = 1;
  n = 1;
  ldims.clear();
  rdims.clear();
  for (const auto& l : left) {
    ldims.push_back(t.dim(l));
    m *= ldims.back();
  }
  for (const auto& l : right) {
    rdims.push_back(t.dim(l));
    n *= rdims.back();
  }
}

}  // namespace detail

// Factor t = L diag(s) R across (left_labels | rest).
template <class T>
SvdSplit<T> svd_split(Tensor<T> t, const Labels& left_labels, const std::string& bond,
                      const SvdOptions& opt = {}) {
  Labels order, right;
  Dims ldims, rdims;
  std::size_t m, n;
  detail::split_labels(t, left_labels, order, ldims, rdims, right, m, n);
  if (t.has(bond)) throw TensorError("svd_split: bond label '" + bond + "' already in use");
  t = permute_axes(std::move(t), order);
  MatrixSvd<T> f = matrix_svd(std::move(t.storage()), m, n, opt);

  SvdSplit<T> out;
  Labels ll = left_labels;
  ll.push_back(bond);
  ldims.push_back(f.k);
  out.left = Tensor<T>(std::move(ll), std::move(ldims), std::move(f.u));
  Labels rl{bond};
  rl.insert(rl.end(), right.begin(), right.end());
  rdims.insert(rdims.begin(), f.k);
  out.right = Tensor<T>(std::move(rl), std::move(rdims), std::move(f.vh));
  out.spectrum.values = std::move(f.s);
  out.discarded_weight = f.discarded_weight;
  return out;
}

template <class T>
SvdSplit<T> svd_split(Tensor<T> t, const Labels& left_labels, const SvdOptions& opt = {}) {
  return svd_split(std::move(t), left_labels, fresh_bond_label(), opt);
}

// Scales the bond axis of t by the spectrum values.
template <class T>
void scale_axis(Tensor<T>& t, const std::string& label, const std::vector<double>& s) {
  const std::size_t ax = t.axis(label);
  if (t.dims()[ax] != s.size()) throw TensorError("scale_axis: length mismatch");
  std::size_t inner = 1;
  for (std::size_t i = ax + 1; i < t.rank(); ++i) inner *= t.dims()[i];
  const std::size_t d = s.size();
  T* p = t.data();
  const std::size_t outer = t.size() / (inner * d);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < d; ++j) {
      T* q = p + (o * d + j) * inner;
      for (std::size_t i = 0; i < inner; ++i) q[i] *= s[j];
    }
}

template <class T>
struct QrSplit {
  Tensor<T> q;  // (left labels..., bond), orthonormal columns
  Tensor<T> r;  // (bond, remaining labels...)
};

// Thin QR across (left_labels | rest); bond dim is min(m, n).
template <class T>
QrSplit<T> qr_split(Tensor<T> t, const Labels& left_labels, const std::string& bond) {
  Labels order, right;
  Dims ldims, rdims;
  std::size_t m, n;
  detail::split_labels(t, left_labels, order, ldims, rdims, right, m, n);
  if (t.has(bond)) throw TensorError("qr_split: bond label '" + bond + "' already in use");
  t = permute_axes(std::move(t), order);
  std::vector<T> a = std::move(t.storage());
  const std::size_t k = std::min(m, n);
  // Row-major A is column-major A^T; its LQ factorization A^T = L Q'
  // gives A = Q'^T L^T.
  std::vector<T> tau(k);
  int info = linalg::gelqf(static_cast<int>(n), static_cast<int>(m), a.data(),
                           static_cast<int>(n), tau.data());
  if (info != 0) throw NumericError("gelqf failed (info " + std::to_string(info) + ")");
  std::vector<T> r(k * n, T{0});
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = j; i < n; ++i) r[j * n + i] = a[j * n + i];
  // Q' is k x m column-major with leading dimension n; repack to ld k.
  std::vector<T> qbuf(k * m);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t i = 0; i < k; ++i) qbuf[c * k + i] = a[c * n + i];
  a.clear();
  a.shrink_to_fit();
  info = linalg::unglq(static_cast<int>(k), static_cast<int>(m), static_cast<int>(k), qbuf.data(),
                       static_cast<int>(k), tau.data());
  if (info != 0) throw NumericError("orglq failed (info " + std::to_string(info) + ")");
  QrSplit<T> out;
  Labels ql = left_labels;
  ql.push_back(bond);
  ldims.push_back(k);
  out.q = Tensor<T>(std::move(ql), std::move(ldims), std::move(qbuf));
  Labels rl{bond};
  rl.insert(rl.end(), right.begin(), right.end());
  rdims.insert(rdims.begin(), k);
  out.r = Tensor<T>(std::move(rl), std::move(rdims), std::move(r));
  return out;
}

}  // namespace shor_ttn
