#pragma once

// Tree tensor network for the modular-exponentiation state.
//
// The top register lives on a balanced binary tree whose leaf slot i holds
// qubit i; the bottom register is a single qudit attached above the tree.
// The qudit tensor is always a selection isometry root[b, e] = [b ==
// support[e]], so only the support list is stored and a controlled
// modular multiplication becomes a row gather on the node below it.
//
// Gauge: between public calls the orthogonality center sits at the top
// node and every stored spectrum is the exact Schmidt spectrum of its
// edge.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shor_ttn/errors.hpp"
#include "shor_ttn/modmath.hpp"
#include "shor_ttn/svd.hpp"
#include "shor_ttn/tensor.hpp"

namespace shor_ttn::ttn {

using modmath::ShorInstance;
using modmath::u64;

inline const std::string kRoot = "root";
inline const std::string kQudit = "b";

inline std::string qubit_label(std::size_t i) { return "q" + std::to_string(i); }
inline std::string edge_label(const std::string& upper, const std::string& lower) {
  return upper + "-" + lower;
}

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct SkeletonNode {
  std::size_t lo = 0, hi = 0, mid = 0;  // leaf slots [lo, hi); split at mid
  int left = -1, right = -1, parent = -1;
  unsigned depth = 0;
  std::string id;
  bool leaf() const { return left < 0; }
};

// Balanced binary tree over n leaf slots; the left half takes the extra
// slot on odd ranges. Internal ids are v<preorder index>, leaves q<slot>.
struct Skeleton {
  std::vector<SkeletonNode> nodes;
  std::vector<int> leaf_of_slot;
  std::vector<int> node_at_mid;  // internal node splitting at slot i (-1 for i = 0)
  std::map<std::string, int> index;

  explicit Skeleton(std::size_t n = 0) {
    if (n == 0) return;
    leaf_of_slot.assign(n, -1);
    node_at_mid.assign(n, -1);
    int internal = 0;
    std::function<int(std::size_t, std::size_t, int, unsigned)> build =
        [&](std::size_t lo, std::size_t hi, int parent, unsigned depth) {
          int idx = static_cast<int>(nodes.size());
          nodes.push_back({});
          nodes[idx].lo = lo;
          nodes[idx].hi = hi;
          nodes[idx].parent = parent;
          nodes[idx].depth = depth;
          if (hi - lo == 1) {
            nodes[idx].id = qubit_label(lo);
            nodes[idx].mid = lo;
            leaf_of_slot[lo] = idx;
          } else {
            nodes[idx].id = "v" + std::to_string(internal++);
            std::size_t mid = lo + (hi - lo + 1) / 2;
            nodes[idx].mid = mid;
            node_at_mid[mid] = idx;
            int l = build(lo, mid, idx, depth + 1);
            int r = build(mid, hi, idx, depth + 1);
            nodes[idx].left = l;
            nodes[idx].right = r;
          }
          index[nodes[idx].id] = idx;
          return idx;
        };
    build(0, n, -1, 0);
  }

  const SkeletonNode& at(const std::string& id) const { return nodes[index.at(id)]; }

  unsigned leaf_depth() const {
    unsigned d = 0;
    for (const auto& nd : nodes) d = std::max(d, nd.depth);
    return d;
  }
};

struct MeasurementRecord {
  u64 outcome_index = 0;  // i with x^i = bottom_value (mod N)
  u64 bottom_value = 0;
  double probability = 0.0;
};

struct TreeNetwork {
  ShorInstance inst;
  Skeleton skeleton;
  std::map<std::string, RTensor> tensors;  // every node except the qudit
  std::map<std::string, std::string> parent;
  std::map<std::string, std::vector<std::string>> children;
  std::map<std::string, SchmidtSpectrum> spectra;  // keyed by edge label
  std::vector<u64> support;  // qudit selection, sorted; empty after measurement
  std::string top;           // node directly below the qudit
  std::string center;
  unsigned absorbed = 0;
  bool measured = false;
  std::optional<MeasurementRecord> measurement;
  std::vector<unsigned> svd_per_qubit;
  modmath::Permutation power;  // U^(2^absorbed)
  double tol = 1e-12;

  bool complete() const { return absorbed == inst.top_width; }
  bool has_qudit() const { return !measured; }
  std::string parent_edge(const std::string& node) const {
    return edge_label(parent.at(node), node);
  }
  bool is_leaf(const std::string& node) const { return children.at(node).empty(); }
};

namespace detail {

inline Labels labels_except(const RTensor& t, const Labels& drop) {
  Labels out;
  for (const auto& l : t.labels())
    if (std::find(drop.begin(), drop.end(), l) == drop.end()) out.push_back(l);
  return out;
}

// Moves the center across one edge with a QR step.
inline void shift_center(TreeNetwork& tree, const std::string& from, const std::string& to) {
  const bool up = tree.parent.count(from) && tree.parent.at(from) == to;
  const std::string edge = up ? edge_label(to, from) : edge_label(from, to);
  RTensor& a = tree.tensors.at(from);
  const std::string tmp = fresh_bond_label();
  const Labels left = labels_except(a, {edge});
  auto qr = qr_split(std::move(a), left, tmp);
  qr.q.relabel(tmp, edge);
  tree.tensors[from] = std::move(qr.q);
  RTensor merged = contract(qr.r, tree.tensors.at(to), {{edge, edge}});
  merged.relabel(tmp, edge);
  tree.tensors[to] = std::move(merged);
  tree.center = to;
}

inline std::vector<std::string> path_to_top(const TreeNetwork& tree, std::string node) {
  std::vector<std::string> path{node};
  while (node != tree.top) {
    node = tree.parent.at(node);
    path.push_back(node);
  }
  return path;
}

inline void move_center(TreeNetwork& tree, const std::string& target) {
  if (tree.center == target) return;
  auto up = path_to_top(tree, tree.center);
  auto down = path_to_top(tree, target);
  // Strip the common suffix down to the lowest common ancestor.
  while (up.size() > 1 && down.size() > 1 && up[up.size() - 2] == down[down.size() - 2]) {
    up.pop_back();
    down.pop_back();
  }
  for (std::size_t i = 0; i + 1 < up.size(); ++i) shift_center(tree, up[i], up[i + 1]);
  for (std::size_t i = down.size() - 1; i-- > 0;) shift_center(tree, down[i + 1], down[i]);
}

// Row norms of the top tensor over the qudit bond, descending.
inline SchmidtSpectrum root_spectrum(const TreeNetwork& tree) {
  SchmidtSpectrum s;
  s.values = slice_norms2(tree.tensors.at(tree.top), tree.parent_edge(tree.top));
  for (double& v : s.values) v = std::sqrt(v);
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  return s;
}

// Controlled U^(2^i) on the fresh |+> qubit i and the qudit. `a` is the
// top tensor with the qudit bond `bond` (or a rank-1 placeholder for the
// empty tree); returns the new top tensor with axes (bond, qi, rest...).
inline RTensor apply_controlled(const RTensor& a, const std::string& bond, const std::string& qi,
                                std::vector<u64>& support, const modmath::Permutation& p) {
  const std::size_t ax = a.axis(bond);
  const std::size_t d = support.size();
  if (a.dims()[ax] != d) throw StateError("qudit bond does not match its support");
  std::size_t inner = 1;
  for (std::size_t i = ax + 1; i < a.rank(); ++i) inner *= a.dims()[i];
  const std::size_t outer = a.size() / (inner * d);
  const std::size_t cols = outer * inner;

  std::vector<u64> next = support;
  for (u64 b : support) next.push_back(p(b));
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  auto row_of = [&](u64 b) {
    return static_cast<std::size_t>(std::lower_bound(next.begin(), next.end(), b) - next.begin());
  };

  Labels rest = labels_except(a, {bond});
  Labels out_labels{bond, qi};
  out_labels.insert(out_labels.end(), rest.begin(), rest.end());
  Dims out_dims{next.size(), 2};
  for (const auto& l : rest) out_dims.push_back(a.dim(l));
  RTensor out(out_labels, out_dims);
  const double h = 1.0 / std::sqrt(2.0);
  for (std::size_t e = 0; e < d; ++e) {
    for (std::size_t c = 0; c < 2; ++c) {
      const u64 b = c == 0 ? support[e] : p(support[e]);
      double* dst = out.data() + (row_of(b) * 2 + c) * cols;
      for (std::size_t o = 0; o < outer; ++o) {
        const double* src = a.data() + (o * d + e) * inner;
        for (std::size_t k = 0; k < inner; ++k) dst[o * inner + k] = h * src[k];
      }
    }
  }
  support = std::move(next);
  return out;
}

}  // namespace detail

// |+>^(2l) (implicit, nothing absorbed) times |1> on the qudit.
inline TreeNetwork initial_tree(const ShorInstance& inst, double tol = 1e-12) {
  TreeNetwork tree;
  tree.inst = inst;
  tree.skeleton = Skeleton(inst.top_width);
  tree.support = {1 % inst.N};
  tree.power = modmath::modular_multiply_permutation(inst.x, inst.N, inst.l);
  tree.tol = tol;
  return tree;
}

// Applies the next controlled gate and routes the new qubit to its leaf
// slot. SVDs performed are recorded in svd_per_qubit.
inline void absorb_qubit(TreeNetwork& tree, unsigned i) {
  if (tree.measured) throw StateError("absorb_qubit: bottom register already measured");
  if (i != tree.absorbed)
    throw StateError("absorb_qubit: expected qubit " + std::to_string(tree.absorbed) + ", got " +
                     std::to_string(i));
  if (i >= tree.inst.top_width) throw StateError("absorb_qubit: all qubits already absorbed");
  const SvdOptions opt{tree.tol};
  const std::string qi = qubit_label(i);
  const auto& skel = tree.skeleton;
  unsigned svds = 0;

  if (i == 0) {
    // The first qubit becomes the top node directly.
    const std::string bond = edge_label(kRoot, qi);
    RTensor seed({bond}, {1}, {1.0});
    RTensor top = detail::apply_controlled(seed, bond, qi, tree.support, tree.power);
    tree.tensors[qi] = std::move(top);
    tree.parent[qi] = kRoot;
    tree.children[qi] = {};
    tree.top = qi;
    tree.center = qi;
  } else {
    const SkeletonNode& xs = skel.nodes[skel.node_at_mid[i]];
    const std::string X = xs.id;
    const std::string O = skel.nodes[xs.left].id;  // left subtree, complete
    // Nearest active ancestor of X (active = its split slot is absorbed).
    int anc = xs.parent;
    while (anc >= 0 && skel.nodes[anc].mid >= i) anc = skel.nodes[anc].parent;

    detail::move_center(tree, tree.top);
    const std::string root_bond = tree.parent_edge(tree.top);
    RTensor theta = detail::apply_controlled(tree.tensors.at(tree.top), root_bond, qi,
                                             tree.support, tree.power);
    tree.tensors.erase(tree.top);

    const std::string x_leaf = edge_label(X, qi);
    const std::string x_o = edge_label(X, O);
    RTensor x_tensor;
    if (anc < 0) {
      // X becomes the new top node above the old one (which is O).
      auto s1 = svd_split(std::move(theta), {root_bond, qi}, x_o, opt);
      ++svds;
      tree.tensors[O] = std::move(s1.right);
      tree.spectra[x_o] = s1.spectrum;
      scale_axis(s1.left, x_o, s1.spectrum.values);
      auto s2 = svd_split(std::move(s1.left), {qi}, x_leaf, opt);
      ++svds;
      tree.tensors[qi] = std::move(s2.left);
      tree.spectra[x_leaf] = s2.spectrum;
      scale_axis(s2.right, x_leaf, s2.spectrum.values);
      x_tensor = std::move(s2.right);
      x_tensor.relabel(root_bond, edge_label(kRoot, X));
      tree.spectra.erase(root_bond);
      tree.parent[X] = kRoot;
      tree.parent[O] = X;
      tree.parent[qi] = X;
      tree.children[X] = {O, qi};
      tree.children[qi] = {};
      tree.top = X;
      tree.tensors[X] = std::move(x_tensor);
      tree.center = X;
    } else {
      // Walk the path top -> T_k, pushing the qubit down one node per SVD.
      const std::string tk = skel.nodes[anc].id;
      std::vector<std::string> path = detail::path_to_top(tree, tk);
      std::reverse(path.begin(), path.end());  // path[0] = top, path.back() = T_k
      for (std::size_t j = 0; j < path.size(); ++j) {
        const std::string& tj = path[j];
        const bool last = j + 1 == path.size();
        const std::string down = last ? edge_label(tj, O) : edge_label(tj, path[j + 1]);
        const std::string bond = last ? edge_label(tj, X) : fresh_bond_label();
        Labels keep = detail::labels_except(theta, {qi, down});
        auto s = svd_split(std::move(theta), keep, bond, opt);
        ++svds;
        scale_axis(s.right, bond, s.spectrum.values);
        if (!last) {
          s.left.relabel(bond, down);
          tree.tensors[tj] = std::move(s.left);
          tree.spectra[down] = s.spectrum;
          theta = contract(s.right, tree.tensors.at(path[j + 1]), {{down, down}});
          theta.relabel(bond, down);
          tree.tensors.erase(path[j + 1]);
        } else {
          tree.tensors[tj] = std::move(s.left);
          tree.spectra[bond] = s.spectrum;
          theta = std::move(s.right);  // (T_k-X, qi, T_k-O)
        }
      }
      const std::string tk_o = edge_label(tk, O);
      theta.relabel(tk_o, x_o);
      tree.tensors.at(O).relabel(tk_o, x_o);
      tree.spectra[x_o] = tree.spectra.at(tk_o);
      tree.spectra.erase(tk_o);
      auto s2 = svd_split(std::move(theta), {qi}, x_leaf, opt);
      ++svds;
      tree.tensors[qi] = std::move(s2.left);
      tree.spectra[x_leaf] = s2.spectrum;
      scale_axis(s2.right, x_leaf, s2.spectrum.values);
      tree.tensors[X] = std::move(s2.right);
      auto& kids = tree.children.at(tk);
      std::replace(kids.begin(), kids.end(), O, X);
      tree.parent[X] = tk;
      tree.parent[O] = X;
      tree.parent[qi] = X;
      tree.children[X] = {O, qi};
      tree.children[qi] = {};
      tree.center = X;
    }
  }

  ++tree.absorbed;
  tree.power = tree.power.after(tree.power);
  detail::move_center(tree, tree.top);
  tree.spectra[tree.parent_edge(tree.top)] = detail::root_spectrum(tree);
  tree.svd_per_qubit.push_back(svds);
}

inline TreeNetwork build_tree(const ShorInstance& inst, double tol = 1e-12) {
  TreeNetwork tree = initial_tree(inst, tol);
  for (unsigned i = 0; i < inst.top_width; ++i) absorb_qubit(tree, i);
  return tree;
}

// Re-derives every edge spectrum by a root-to-leaves SVD sweep (dropping
// values below tol relative to the largest) and returns the center to the
// top node.
inline void canonicalize(TreeNetwork& tree, double tol = 1e-12) {
  if (tree.tensors.empty()) return;
  detail::move_center(tree, tree.top);
  const SvdOptions opt{tol};
  if (tree.has_qudit()) {
    // Drop numerically empty qudit rows; the remaining bond is exact.
    const std::string bond = tree.parent_edge(tree.top);
    RTensor& a = tree.tensors.at(tree.top);
    std::vector<double> norm = slice_norms2(a, bond);
    const double mx = std::sqrt(*std::max_element(norm.begin(), norm.end()));
    std::vector<std::size_t> keep;
    for (std::size_t e = 0; e < norm.size(); ++e)
      if (std::sqrt(norm[e]) > tol * mx) keep.push_back(e);
    if (keep.size() < norm.size()) {
      Labels order{bond};
      for (const auto& l : a.labels())
        if (l != bond) order.push_back(l);
      RTensor p = permute_axes(std::move(a), order);
      const std::size_t cols = p.size() / norm.size();
      Dims dims = p.dims();
      dims[0] = keep.size();
      std::vector<double> data(keep.size() * cols);
      std::vector<u64> sup;
      for (std::size_t k = 0; k < keep.size(); ++k) {
        std::copy(p.data() + keep[k] * cols, p.data() + (keep[k] + 1) * cols,
                  data.begin() + static_cast<std::ptrdiff_t>(k * cols));
        sup.push_back(tree.support[keep[k]]);
      }
      tree.support = std::move(sup);
      tree.tensors[tree.top] = RTensor(order, dims, std::move(data));
    }
    tree.spectra[bond] = detail::root_spectrum(tree);
  }
  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    for (const auto& child : tree.children.at(node)) {
      const std::string edge = edge_label(node, child);
      const std::string tmp = fresh_bond_label();
      RTensor& t = tree.tensors.at(node);
      const Labels left = detail::labels_except(t, {edge});
      auto s = svd_split(std::move(t), left, tmp, opt);
      s.left.relabel(tmp, edge);
      tree.tensors[node] = std::move(s.left);
      scale_axis(s.right, tmp, s.spectrum.values);
      RTensor c = contract(s.right, tree.tensors.at(child), {{edge, edge}});
      c.relabel(tmp, edge);
      tree.tensors[child] = std::move(c);
      tree.spectra[edge] = s.spectrum;
      tree.center = child;
      visit(child);
      detail::shift_center(tree, child, node);
    }
  };
  visit(tree.top);
}

inline const SchmidtSpectrum& schmidt_spectrum(const TreeNetwork& tree, const std::string& edge) {
  auto it = tree.spectra.find(edge);
  if (it == tree.spectra.end()) throw TensorError("unknown edge '" + edge + "'");
  return it->second;
}

enum class Region { Low, Remainder, Mixed };

// Cluster rank: 2^n until the register saturates at r (low
// significance qubits) or r_tilde (the rest).
inline u64 predicted_rank(unsigned n, Region region, const ShorInstance& inst) {
  if (region == Region::Mixed) throw DomainError("no prediction for mixed clusters");
  const bool low = region == Region::Low;
  const unsigned cap_bits = low ? inst.l_r : inst.l_r_tilde;
  if (n < cap_bits) return u64{1} << n;
  return low ? inst.r : inst.r_tilde;
}

struct EdgeInfo {
  std::string id, upper, lower;
  std::size_t lo = 0, hi = 0;  // leaf slots below the edge
  SchmidtSpectrum spectrum;
  std::size_t cluster() const { return hi - lo; }
};

inline Region region_of(const EdgeInfo& e, const ShorInstance& inst) {
  if (e.hi <= inst.l_r) return Region::Low;
  if (e.lo >= inst.l_r) return Region::Remainder;
  return Region::Mixed;
}

// All edges in preorder (root edge first when present).
inline std::vector<EdgeInfo> edges(const TreeNetwork& tree) {
  std::vector<EdgeInfo> out;
  if (tree.tensors.empty()) return out;
  std::function<void(const std::string&)> walk = [&](const std::string& node) {
    const auto& parent = tree.parent.at(node);
    if (!parent.empty()) {
      EdgeInfo e;
      e.upper = parent;
      e.lower = node;
      e.id = edge_label(parent, node);
      const auto& sk = tree.skeleton.at(node);
      e.lo = sk.lo;
      e.hi = std::min<std::size_t>(sk.hi, tree.absorbed);
      e.spectrum = tree.spectra.at(e.id);
      out.push_back(std::move(e));
    }
    for (const auto& c : tree.children.at(node)) walk(c);
  };
  walk(tree.top);
  return out;
}

// Longest qudit-to-leaf path, in edges.
inline unsigned depth(const TreeNetwork& tree) {
  if (tree.tensors.empty()) return 0;
  std::function<unsigned(const std::string&)> h = [&](const std::string& node) -> unsigned {
    unsigned d = 0;
    for (const auto& c : tree.children.at(node)) d = std::max(d, 1 + h(c));
    return d;
  };
  return h(tree.top) + (tree.has_qudit() ? 1 : 0);
}

// Projects the qudit onto one basis state, chosen from the Born
// distribution or forced by its value, then recompresses every edge.
inline MeasurementRecord measure_bottom(TreeNetwork& tree, std::optional<u64> forced_value,
                                        u64 seed) {
  if (tree.measured) throw StateError("measure_bottom: already measured");
  if (!tree.complete()) throw StateError("measure_bottom: tree not fully built");
  detail::move_center(tree, tree.top);
  const std::string bond = tree.parent_edge(tree.top);
  RTensor& a = tree.tensors.at(tree.top);
  Labels rest = detail::labels_except(a, {bond});
  Labels order{bond};
  order.insert(order.end(), rest.begin(), rest.end());
  RTensor p = permute_axes(a, order);
  const std::size_t rows = p.dims()[0], cols = p.size() / rows;
  std::vector<double> prob(rows);
  double total = 0;
  for (std::size_t e = 0; e < rows; ++e) {
    double n2 = 0;
    for (std::size_t c = 0; c < cols; ++c) n2 += p[e * cols + c] * p[e * cols + c];
    prob[e] = n2;
    total += n2;
  }
  std::size_t chosen = rows;
  if (forced_value) {
    auto it = std::lower_bound(tree.support.begin(), tree.support.end(), *forced_value);
    if (it != tree.support.end() && *it == *forced_value)
      chosen = static_cast<std::size_t>(it - tree.support.begin());
    if (chosen == rows || prob[chosen] <= 0)
      throw InvalidOutcome("bottom value " + std::to_string(*forced_value) +
                           " has zero amplitude");
  } else {
    std::mt19937_64 rng(seed);
    double u = unit_double(rng) * total;
    for (chosen = 0; chosen + 1 < rows && u >= prob[chosen]; ++chosen) u -= prob[chosen];
  }
  MeasurementRecord rec;
  rec.bottom_value = tree.support[chosen];
  rec.probability = prob[chosen] / total;
  rec.outcome_index = modmath::discrete_log(tree.inst.x, rec.bottom_value, tree.inst.N).value_or(0);

  Dims dims;
  for (const auto& l : rest) dims.push_back(p.dim(l));
  std::vector<double> data(p.data() + chosen * cols, p.data() + (chosen + 1) * cols);
  const double nrm = std::sqrt(prob[chosen]);
  for (double& v : data) v /= nrm;
  tree.tensors[tree.top] = RTensor(rest, dims, std::move(data));
  tree.spectra.erase(bond);
  tree.parent[tree.top] = "";
  tree.support.clear();
  tree.measured = true;
  tree.measurement = rec;
  canonicalize(tree, tree.tol);
  return rec;
}

// Dense contraction, axes (q0 .. q_{k-1}, b) before measurement and
// (q0 .. q_{2l-1}) after it.
inline RTensor to_statevector(const TreeNetwork& tree, std::size_t cap = std::size_t{1} << 24) {
  const unsigned k = tree.absorbed;
  const std::size_t qdim = tree.has_qudit() ? tree.inst.qudit_dim() : 1;
  if (k >= 63 || (std::size_t{1} << k) > cap / qdim)
    throw CapacityError("to_statevector: dimension exceeds cap");
  if (tree.tensors.empty()) {
    RTensor v({kQudit}, {qdim});
    v[tree.support.at(0)] = 1.0;
    return v;
  }
  std::function<RTensor(const std::string&)> sub = [&](const std::string& node) {
    RTensor acc = tree.tensors.at(node);
    for (const auto& c : tree.children.at(node)) {
      const std::string e = edge_label(node, c);
      acc = contract(acc, sub(c), {{e, e}});
    }
    return acc;
  };
  RTensor acc = sub(tree.top);
  Labels qubits;
  for (unsigned i = 0; i < k; ++i) qubits.push_back(qubit_label(i));
  if (!tree.has_qudit()) return permute_axes(std::move(acc), qubits);

  const std::string bond = tree.parent_edge(tree.top);
  Labels order{bond};
  order.insert(order.end(), qubits.begin(), qubits.end());
  acc = permute_axes(std::move(acc), order);
  const std::size_t rows = acc.dims()[0], cols = acc.size() / rows;
  Labels out_labels = qubits;
  out_labels.push_back(kQudit);
  Dims out_dims(k, 2);
  out_dims.push_back(qdim);
  RTensor out(out_labels, out_dims);
  for (std::size_t e = 0; e < rows; ++e)
    for (std::size_t c = 0; c < cols; ++c) out[c * qdim + tree.support[e]] = acc[e * cols + c];
  return out;
}

// Graphviz rendering with edge widths log2(d) + 1.
inline std::string export_dot(const TreeNetwork& tree) {
  std::ostringstream os;
  os << "graph ttn {\n";
  os << "  node [fontname=\"Helvetica\"];\n";
  auto pen = [](std::size_t d) {
    std::ostringstream p;
    p << std::fixed << std::setprecision(2) << std::log2(static_cast<double>(d)) + 1.0;
    return p.str();
  };
  if (tree.has_qudit()) {
    os << "  root [shape=doublecircle, style=filled, fillcolor=lightblue, label=\"root\"];\n";
    os << "  root_b [shape=point, width=0.05];\n";
    os << "  root -- root_b [color=red, label=\"" << tree.inst.qudit_dim() << "\"];\n";
  }
  if (!tree.tensors.empty()) {
    std::function<void(const std::string&)> walk = [&](const std::string& node) {
      if (tree.is_leaf(node)) {
        os << "  " << node << " [shape=box, label=\"" << node << "\"];\n";
        os << "  " << node << "_p [shape=point, width=0.05];\n";
        os << "  " << node << " -- " << node << "_p [color=red];\n";
      } else {
        os << "  " << node << " [shape=circle, label=\"" << node << "\"];\n";
      }
      for (const auto& c : tree.children.at(node)) walk(c);
    };
    walk(tree.top);
    for (const auto& e : edges(tree)) {
      const std::size_t d = e.spectrum.rank();
      os << "  " << e.upper << " -- " << e.lower << " [label=\"" << d << "\", penwidth=" << pen(d)
         << "];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace shor_ttn::ttn
