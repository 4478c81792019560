#pragma once

// Dense row-major tensors with named axes, axis permutation and pairwise
// contraction (lowered to a single GEMM).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "shor_ttn/errors.hpp"
#include "shor_ttn/linalg.hpp"

namespace shor_ttn {

using cplx = std::complex<double>;
using Labels = std::vector<std::string>;
using Dims = std::vector<std::size_t>;

template <class T>
class Tensor {
 public:
  using value_type = T;

  // Rank-0 tensor holding zero.
  Tensor() : data_(1, T{}) {}

  Tensor(Labels labels, Dims dims) : labels_(std::move(labels)), dims_(std::move(dims)) {
    check_shape();
    data_.assign(volume(dims_), T{});
  }

  Tensor(Labels labels, Dims dims, std::vector<T> data)
      : labels_(std::move(labels)), dims_(std::move(dims)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != volume(dims_))
      throw TensorError("tensor data length does not match dims");
  }

  static Tensor scalar(T v) {
    Tensor t;
    t.data_[0] = v;
    return t;
  }

  std::size_t rank() const { return labels_.size(); }
  std::size_t size() const { return data_.size(); }
  const Labels& labels() const { return labels_; }
  const Dims& dims() const { return dims_; }

  bool has(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  std::size_t axis(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw TensorError("no axis labeled '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  std::size_t dim(const std::string& label) const { return dims_[axis(label)]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Element access by multi-index in axis order.
  T& at(const std::vector<std::size_t>& idx) { return data_[offset(idx)]; }
  const T& at(const std::vector<std::size_t>& idx) const { return data_[offset(idx)]; }

  void relabel(const std::string& from, const std::string& to) {
    if (from == to) return;
    if (has(to)) throw TensorError("relabel: '" + to + "' already present");
    labels_[axis(from)] = to;
  }

  double norm() const {
    double s = 0;
    for (const T& v : data_) s += linalg::abs2(v);
    return std::sqrt(s);
  }

  Tensor& operator*=(T f) {
    for (T& v : data_) v *= f;
    return *this;
  }

  static std::size_t volume(const Dims& dims) {
    std::size_t v = 1;
    for (std::size_t d : dims) v *= d;
    return v;
  }

 private:
  void check_shape() const {
    if (labels_.size() != dims_.size()) throw TensorError("labels and dims differ in length");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (dims_[i] == 0) throw TensorError("axis '" + labels_[i] + "' has dim 0");
      for (std::size_t j = 0; j < i; ++j)
        if (labels_[i] == labels_[j]) throw TensorError("duplicate axis label '" + labels_[i] + "'");
    }
  }

  std::size_t offset(const std::vector<std::size_t>& idx) const {
    if (idx.size() != dims_.size()) throw TensorError("index rank mismatch");
    std::size_t off = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= dims_[i]) throw TensorError("index out of range");
      off = off * dims_[i] + idx[i];
    }
    return off;
  }

  Labels labels_;
  Dims dims_;
  std::vector<T> data_;
};

using RTensor = Tensor<double>;
using CTensor = Tensor<cplx>;

namespace detail {

inline std::vector<std::size_t> axis_order(const Labels& have, const Labels& want) {
  if (want.size() != have.size()) throw TensorError("permutation must list every axis once");
  std::vector<std::size_t> perm(want.size());
  std::vector<bool> used(have.size(), false);
  for (std::size_t i = 0; i < want.size(); ++i) {
    auto it = std::find(have.begin(), have.end(), want[i]);
    if (it == have.end()) throw TensorError("unknown axis '" + want[i] + "'");
    std::size_t a = static_cast<std::size_t>(it - have.begin());
    if (used[a]) throw TensorError("axis '" + want[i] + "' listed twice");
    used[a] = true;
    perm[i] = a;
  }
  return perm;
}

inline bool is_identity(const std::vector<std::size_t>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != i) return false;
  return true;
}

// out[new index] = in[old index], with new axis i = old axis perm[i].
template <class T>
void permute_into(const T* in, const Dims& dims, const std::vector<std::size_t>& perm, T* out) {
  const std::size_t rank = dims.size();
  Dims in_stride(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_stride[i - 1] = in_stride[i] * dims[i];
  Dims out_dims(rank), stride(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    out_dims[i] = dims[perm[i]];
    stride[i] = in_stride[perm[i]];
  }
  const std::size_t total = Tensor<T>::volume(dims);
  if (rank == 0) {
    out[0] = in[0];
    return;
  }
  // Innermost output axis runs as a strided (often contiguous) copy.
  const std::size_t inner = out_dims[rank - 1];
  const std::size_t inner_stride = stride[rank - 1];
  std::vector<std::size_t> idx(rank, 0);
  std::size_t src = 0;
  for (std::size_t o = 0; o < total; o += inner) {
    if (inner_stride == 1) {
      std::copy(in + src, in + src + inner, out + o);
    } else {
      for (std::size_t k = 0; k < inner; ++k) out[o + k] = in[src + k * inner_stride];
    }
    for (std::size_t a = rank - 1; a-- > 0;) {
      src += stride[a];
      if (++idx[a] < out_dims[a]) break;
      src -= stride[a] * out_dims[a];
      idx[a] = 0;
    }
  }
}

}  // namespace detail

template <class T>
Tensor<T> permute_axes(Tensor<T> t, const Labels& order) {
  auto perm = detail::axis_order(t.labels(), order);
  if (detail::is_identity(perm)) return t;
  Dims dims(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) dims[i] = t.dims()[perm[i]];
  std::vector<T> out(t.size());
  detail::permute_into(t.data(), t.dims(), perm, out.data());
  return Tensor<T>(order, std::move(dims), std::move(out));
}

// Sum over the paired axes. Result axes: free axes of a, then free axes of b.
template <class T>
Tensor<T> contract(const Tensor<T>& a, const Tensor<T>& b,
                   const std::vector<std::pair<std::string, std::string>>& pairs) {
  Labels a_free, b_free, a_sum, b_sum;
  for (const auto& [la, lb] : pairs) {
    if (a.dim(la) != b.dim(lb))
      throw TensorError("contract: dim mismatch on '" + la + "'/'" + lb + "'");
    a_sum.push_back(la);
    b_sum.push_back(lb);
  }
  for (const auto& l : a.labels())
    if (std::find(a_sum.begin(), a_sum.end(), l) == a_sum.end()) a_free.push_back(l);
  for (const auto& l : b.labels())
    if (std::find(b_sum.begin(), b_sum.end(), l) == b_sum.end()) b_free.push_back(l);
  for (const auto& l : b_free)
    if (std::find(a_free.begin(), a_free.end(), l) != a_free.end())
      throw TensorError("contract: free axis '" + l + "' appears on both sides");

  std::size_t m = 1, n = 1, k = 1;
  Dims out_dims;
  for (const auto& l : a_free) {
    m *= a.dim(l);
    out_dims.push_back(a.dim(l));
  }
  for (const auto& l : b_free) {
    n *= b.dim(l);
    out_dims.push_back(b.dim(l));
  }
  for (const auto& l : a_sum) k *= a.dim(l);

  // Operands are laid out as (free, summed) for a and (summed, free) for b;
  // a transposed layout is passed to GEMM instead of copied when possible.
  auto layout = [](const Tensor<T>& t, const Labels& first, const Labels& second,
                   std::vector<T>& scratch, bool& transposed) -> const T* {
    Labels fs = first, sf = second;
    fs.insert(fs.end(), second.begin(), second.end());
    sf.insert(sf.end(), first.begin(), first.end());
    auto p1 = detail::axis_order(t.labels(), fs);
    transposed = false;
    if (detail::is_identity(p1)) return t.data();
    auto p2 = detail::axis_order(t.labels(), sf);
    if (detail::is_identity(p2) && !linalg::is_complex_v<T>) {
      transposed = true;
      return t.data();
    }
    scratch.resize(t.size());
    detail::permute_into(t.data(), t.dims(), p1, scratch.data());
    return scratch.data();
  };
  std::vector<T> sa, sb;
  bool ta = false, tb = false;
  const T* pa = layout(a, a_free, a_sum, sa, ta);
  const T* pb = layout(b, b_sum, b_free, sb, tb);

  Labels out_labels = a_free;
  out_labels.insert(out_labels.end(), b_free.begin(), b_free.end());
  Tensor<T> out(out_labels, out_dims);
  linalg::gemm(ta, tb, m, n, k, T{1}, pa, ta ? m : k, pb, tb ? k : n, T{0}, out.data(), n);
  return out;
}

// <a|b> with axes matched by label.
template <class T>
T inner(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T> bb = permute_axes(b, a.labels());
  if (bb.dims() != a.dims()) throw TensorError("inner: shape mismatch");
  T s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += linalg::conj(a[i]) * bb[i];
  return s;
}

// Squared norms of the slices t[..., j, ...] along one axis.
template <class T>
std::vector<double> slice_norms2(const Tensor<T>& t, const std::string& label) {
  const std::size_t ax = t.axis(label);
  const std::size_t d = t.dims()[ax];
  std::size_t inner = 1;
  for (std::size_t i = ax + 1; i < t.rank(); ++i) inner *= t.dims()[i];
  const std::size_t outer = t.size() / (inner * d);
  std::vector<double> out(d, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < d; ++j) {
      const T* p = t.data() + (o * d + j) * inner;
      double s = 0;
      for (std::size_t i = 0; i < inner; ++i) s += linalg::abs2(p[i]);
      out[j] += s;
    }
  return out;
}

inline CTensor to_complex(const RTensor& t) {
  std::vector<cplx> d(t.storage().begin(), t.storage().end());
  return CTensor(t.labels(), t.dims(), std::move(d));
}

// Adds an axis of dim 1, trailing unless front is set.
template <class T>
Tensor<T> add_unit_axis(Tensor<T> t, const std::string& label, bool front = false) {
  Labels labels = t.labels();
  Dims dims = t.dims();
  if (front) {
    labels.insert(labels.begin(), label);
    dims.insert(dims.begin(), 1);
  } else {
    labels.push_back(label);
    dims.push_back(1);
  }
  return Tensor<T>(std::move(labels), std::move(dims), std::move(t.storage()));
}

}  // namespace shor_ttn
