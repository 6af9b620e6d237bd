#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypertest/common.hpp"
#include "hypertest/rational.hpp"

namespace hypertest {

/// A partition of the class index set [t]: labels[i] is the block of class i.
/// Labels are surjective onto [0, block_count).
class CellPartition {
 public:
  CellPartition() = default;
  explicit CellPartition(std::vector<std::size_t> labels) : labels_(std::move(labels)) {
    block_count_ = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end()) + 1;
    std::vector<char> hit(block_count_, 0);
    for (auto l : labels_) hit[l] = 1;
    if (std::find(hit.begin(), hit.end(), 0) != hit.end())
      throw InvalidArgument("partition labels must be surjective onto [0, t_Q)");
  }

  static CellPartition discrete(std::size_t t) {
    std::vector<std::size_t> l(t);
    std::iota(l.begin(), l.end(), std::size_t{0});
    return CellPartition(std::move(l));
  }
  static CellPartition trivial(std::size_t t) {
    return CellPartition(std::vector<std::size_t>(t, 0));
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t block_count() const { return block_count_; }
  std::size_t operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::size_t>& labels() const { return labels_; }

  /// Relabels blocks in order of first appearance.
  CellPartition normalized() const {
    std::vector<std::size_t> map(block_count_, SIZE_MAX), out(labels_.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (map[labels_[i]] == SIZE_MAX) map[labels_[i]] = next++;
      out[i] = map[labels_[i]];
    }
    return CellPartition(std::move(out));
  }

  /// Coarsest common refinement.
  CellPartition meet(const CellPartition& other) const {
    if (other.size() != size()) throw InvalidArgument("partitions over different class sets");
    std::vector<std::size_t> combined(size());
    for (std::size_t i = 0; i < size(); ++i)
      combined[i] = labels_[i] * other.block_count() + other[i];
    std::vector<std::size_t> map(block_count_ * other.block_count() + 1, SIZE_MAX);
    std::size_t next = 0;
    for (auto& c : combined) {
      if (map[c] == SIZE_MAX) map[c] = next++;
      c = map[c];
    }
    return CellPartition(std::move(combined));
  }

  /// Refines by a class subset: every block splits into (in, out) parts.
  CellPartition split_by(const std::vector<bool>& members) const {
    std::vector<std::size_t> l(size());
    std::vector<std::size_t> map(block_count_ * 2, SIZE_MAX);
    std::size_t next = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      const std::size_t c = labels_[i] * 2 + (members[i] ? 1 : 0);
      if (map[c] == SIZE_MAX) map[c] = next++;
      l[i] = map[c];
    }
    return CellPartition(std::move(l));
  }

  bool refines(const CellPartition& coarser) const {
    std::vector<std::size_t> map(block_count_, SIZE_MAX);
    for (std::size_t i = 0; i < size(); ++i) {
      if (map[labels_[i]] == SIZE_MAX) map[labels_[i]] = coarser[i];
      else if (map[labels_[i]] != coarser[i]) return false;
    }
    return true;
  }

  friend bool operator==(const CellPartition& a, const CellPartition& b) {
    return a.normalized().labels_ == b.normalized().labels_;
  }

 private:
  std::vector<std::size_t> labels_;
  std::size_t block_count_ = 0;
};

namespace detail {

template <class T>
bool weights_sum_to_one(const std::vector<T>& w) {
  T s = 0;
  for (const auto& x : w) s += x;
  if constexpr (is_exact_v<T>) return s == 1;
  else return std::fabs(s - 1.0) <= 1e-9;
}

}  // namespace detail

/// Naive r-kernel that is constant on products of t classes. Class i is the
/// interval of length weights[i] placed after classes 0..i-1.
template <class T>
struct StepKernel {
  std::size_t r = 2;
  std::size_t t = 1;
  std::vector<T> weights;
  std::vector<T> values;  // t^r, lexicographic cell order

  StepKernel() = default;
  StepKernel(std::size_t r_, std::vector<T> w, std::vector<T> v)
      : r(r_), t(w.size()), weights(std::move(w)), values(std::move(v)) {
    validate();
  }

  static StepKernel constant(std::size_t r, const T& c, std::size_t t = 1) {
    std::vector<T> w(t, T(1) / T(static_cast<long>(t)));
    return StepKernel(r, std::move(w), std::vector<T>(ipow(t, r), c));
  }

  std::size_t cell_count() const { return values.size(); }
  const T& at(std::span<const std::size_t> cell) const { return values[cell_index(cell, t)]; }

  T sup_norm() const {
    T m = 0;
    for (const auto& v : values) m = std::max(m, scalar_abs(v));
    return m;
  }

  void validate() const {
    if (r == 0) throw InvalidArgument("kernel arity must be >= 1");
    if (t == 0) throw InvalidArgument("kernel needs at least one class");
    if (values.size() != ipow(t, r)) throw InvalidArgument("kernel value array must have t^r entries");
    for (const auto& w : weights)
      if (!(w > 0)) throw InvalidArgument("class weights must be positive");
    if (!detail::weights_sum_to_one(weights)) throw InvalidArgument("class weights must sum to 1");
    check_symmetric(values, t, r);
  }

  static void check_symmetric(const std::vector<T>& vals, std::size_t t, std::size_t r) {
    std::vector<std::size_t> p(r);
    for (std::size_t idx = 0; idx < vals.size(); ++idx) {
      auto cell = cell_of_index(idx, t, r);
      p = cell;
      std::sort(p.begin(), p.end());
      if (!(vals[cell_index(p, t)] == vals[idx]))
        throw InvalidArgument("kernel values are not symmetric under coordinate permutation");
    }
  }

  friend bool operator==(const StepKernel&, const StepKernel&) = default;
};

/// k-coloured naive step kernel: per colour a t^r array in [0,1], summing to
/// one on every cell. If `loop_color` is set, that colour is the loop colour
/// (always the last index).
template <class T>
struct ColoredStepKernel {
  std::size_t r = 2;
  std::size_t t = 1;
  std::size_t k = 1;
  std::vector<T> weights;
  std::vector<std::vector<T>> values;  // [k][t^r]
  bool has_loop_color = false;

  ColoredStepKernel() = default;
  ColoredStepKernel(std::size_t r_, std::vector<T> w, std::vector<std::vector<T>> v,
                    bool loop = false)
      : r(r_), t(w.size()), k(v.size()), weights(std::move(w)), values(std::move(v)),
        has_loop_color(loop) {
    validate();
  }

  std::size_t cell_count() const { return ipow(t, r); }
  std::size_t loop_color() const { return k - 1; }
  /// Colours that a sampled graph can carry (the loop colour excluded).
  std::size_t real_colors() const { return has_loop_color ? k - 1 : k; }

  StepKernel<T> component(std::size_t alpha) const {
    StepKernel<T> out;
    out.r = r;
    out.t = t;
    out.weights = weights;
    out.values = values.at(alpha);
    return out;
  }

  void validate() const {
    if (r == 0) throw InvalidArgument("kernel arity must be >= 1");
    if (t == 0) throw InvalidArgument("kernel needs at least one class");
    if (k == 0) throw InvalidArgument("coloured kernel needs at least one colour");
    if (has_loop_color && k < 2) throw InvalidArgument("loop colour needs a real colour beside it");
    for (const auto& w : weights)
      if (!(w > 0)) throw InvalidArgument("class weights must be positive");
    if (!detail::weights_sum_to_one(weights)) throw InvalidArgument("class weights must sum to 1");
    const std::size_t cells = cell_count();
    for (const auto& arr : values) {
      if (arr.size() != cells) throw InvalidArgument("colour array must have t^r entries");
      for (const auto& v : arr)
        if (v < 0 || v > 1) throw RangeError("colour values must lie in [0,1]");
      StepKernel<T>::check_symmetric(arr, t, r);
    }
    for (std::size_t c = 0; c < cells; ++c) {
      T s = 0;
      for (const auto& arr : values) s += arr[c];
      if constexpr (is_exact_v<T>) {
        if (s != 1) throw InvalidArgument("colour values must sum to 1 on every cell");
      } else {
        if (std::fabs(s - 1.0) > 1e-9) throw InvalidArgument("colour values must sum to 1 on every cell");
      }
    }
  }

  friend bool operator==(const ColoredStepKernel&, const ColoredStepKernel&) = default;
};

/// Builds a two-colour kernel (colour 0 = "edge" with density W, colour 1 =
/// complement) from a [0,1]-valued kernel.
template <class T>
ColoredStepKernel<T> as_two_colored(const StepKernel<T>& w) {
  std::vector<T> comp(w.values.size());
  for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = T(1) - w.values[i];
  return ColoredStepKernel<T>(w.r, w.weights, {w.values, std::move(comp)});
}

template <class To, class From>
StepKernel<To> convert(const StepKernel<From>& k) {
  StepKernel<To> out;
  out.r = k.r;
  out.t = k.t;
  for (const auto& w : k.weights) out.weights.push_back(static_cast<To>(to_double(w)));
  for (const auto& v : k.values) out.values.push_back(static_cast<To>(to_double(v)));
  return out;
}

template <>
inline StepKernel<Rational> convert<Rational, Rational>(const StepKernel<Rational>& k) {
  return k;
}

template <class To, class From>
ColoredStepKernel<To> convert(const ColoredStepKernel<From>& k) {
  ColoredStepKernel<To> out;
  out.r = k.r;
  out.t = k.t;
  out.k = k.k;
  out.has_loop_color = k.has_loop_color;
  for (const auto& w : k.weights) out.weights.push_back(static_cast<To>(to_double(w)));
  for (const auto& arr : k.values) {
    out.values.emplace_back();
    for (const auto& v : arr) out.values.back().push_back(static_cast<To>(to_double(v)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Re-layout. A layout is an ordered list of pieces, each a sub-interval of
// one source class. Re-laying out a kernel keeps its values and changes the
// class structure; it is how kernels with different steps are compared.

template <class T>
struct Piece {
  std::size_t source;  // class of the source kernel
  T weight;
};

template <class T>
StepKernel<T> relayout(const StepKernel<T>& w, const std::vector<Piece<T>>& pieces) {
  StepKernel<T> out;
  out.r = w.r;
  out.t = pieces.size();
  for (const auto& p : pieces) out.weights.push_back(p.weight);
  out.values.resize(ipow(out.t, w.r));
  std::vector<std::size_t> src(w.r);
  for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
    auto cell = cell_of_index(idx, out.t, w.r);
    for (std::size_t j = 0; j < w.r; ++j) src[j] = pieces[cell[j]].source;
    out.values[idx] = w.at(src);
  }
  return out;
}

template <class T>
ColoredStepKernel<T> relayout(const ColoredStepKernel<T>& w, const std::vector<Piece<T>>& pieces) {
  ColoredStepKernel<T> out;
  out.r = w.r;
  out.t = pieces.size();
  out.k = w.k;
  out.has_loop_color = w.has_loop_color;
  for (const auto& p : pieces) out.weights.push_back(p.weight);
  const std::size_t cells = ipow(out.t, w.r);
  out.values.assign(w.k, std::vector<T>(cells));
  std::vector<std::size_t> src(w.r);
  for (std::size_t idx = 0; idx < cells; ++idx) {
    auto cell = cell_of_index(idx, out.t, w.r);
    for (std::size_t j = 0; j < w.r; ++j) src[j] = pieces[cell[j]].source;
    const std::size_t s = cell_index(src, w.t);
    for (std::size_t a = 0; a < w.k; ++a) out.values[a][idx] = w.values[a][s];
  }
  return out;
}

/// Common refinement of two interval layouts given by class weights. Returns
/// the pieces seen from each side; both lists describe the same intervals.
template <class T>
std::pair<std::vector<Piece<T>>, std::vector<Piece<T>>> common_refinement(
    const std::vector<T>& wa, const std::vector<T>& wb) {
  std::vector<Piece<T>> pa, pb;
  std::size_t i = 0, j = 0;
  T ra = wa.empty() ? T(0) : wa[0];
  T rb = wb.empty() ? T(0) : wb[0];
  const T eps = is_exact_v<T> ? T(0) : T(1e-13);
  while (i < wa.size() && j < wb.size()) {
    const T step = std::min(ra, rb);
    if (step > eps) {
      pa.push_back({i, step});
      pb.push_back({j, step});
    }
    ra -= step;
    rb -= step;
    if (ra <= eps) {
      ++i;
      if (i < wa.size()) ra = wa[i];
    }
    if (rb <= eps) {
      ++j;
      if (j < wb.size()) rb = wb[j];
    }
  }
  return {std::move(pa), std::move(pb)};
}

/// Re-lays out both kernels on their common refinement.
template <class K>
std::pair<K, K> align(const K& a, const K& b) {
  if (a.r != b.r) throw InvalidArgument("kernels of different arity");
  auto [pa, pb] = common_refinement(a.weights, b.weights);
  return {relayout(a, pa), relayout(b, pb)};
}

template <class T>
StepKernel<T> subtract(const StepKernel<T>& a, const StepKernel<T>& b) {
  auto [x, y] = align(a, b);
  for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] -= y.values[i];
  return x;
}

template <class T>
StepKernel<T> scaled(StepKernel<T> a, const T& c) {
  for (auto& v : a.values) v *= c;
  return a;
}

template <class T>
StepKernel<T> added(const StepKernel<T>& a, const StepKernel<T>& b) {
  auto [x, y] = align(a, b);
  for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] += y.values[i];
  return x;
}

}  // namespace hypertest
