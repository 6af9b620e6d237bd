#pragma once

#include <vector>

#include "hypertest/density.hpp"
#include "hypertest/distribution.hpp"
#include "hypertest/hypergraph.hpp"
#include "hypertest/kernel.hpp"

namespace hypertest {

/// W_G: n equal classes; an off-diagonal cell carries the indicator of its
/// slot's colour, a cell with a repeated index carries the loop colour (the
/// extra last colour).
inline ColoredStepKernel<Rational> graph_to_kernel(const ColoredHypergraph& g) {
  if (g.n() == 0) throw InvalidArgument("graph has no vertices");
  ColoredStepKernel<Rational> w;
  w.r = g.r();
  w.t = g.n();
  w.k = g.k() + 1;
  w.has_loop_color = true;
  w.weights.assign(g.n(), Rational(1, static_cast<unsigned long>(g.n())));
  const std::size_t cells = ipow(g.n(), g.r());
  w.values.assign(w.k, std::vector<Rational>(cells, Rational(0)));
  std::vector<std::size_t> sorted(g.r());
  for (std::size_t idx = 0; idx < cells; ++idx) {
    auto cell = cell_of_index(idx, g.n(), g.r());
    sorted = cell;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      w.values[w.loop_color()][idx] = 1;
    else
      w.values[g.color(sorted)][idx] = 1;
  }
  return w;
}

inline ColoredStepKernel<Rational> graph_to_kernel(const Hypergraph& g) {
  return graph_to_kernel(g.colored());
}

/// The [0,1]-valued edge kernel of a simple graph (diagonal 0).
inline StepKernel<Rational> edge_kernel(const Hypergraph& g) {
  auto w = graph_to_kernel(g);
  return w.component(Hypergraph::kEdge);
}

/// Visits every class assignment c in [t]^q with its probability Π w_{c_i}.
template <class T, class Fn>
void for_each_assignment(const std::vector<T>& weights, std::size_t q, Fn&& fn) {
  const std::size_t t = weights.size();
  std::vector<T> prefix(q + 1, T(1));
  std::vector<std::size_t> c(q, 0);
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == q) {
      fn(std::span<const std::size_t>(c), prefix[q]);
      return;
    }
    for (std::size_t i = 0; i < t; ++i) {
      c[pos] = i;
      prefix[pos + 1] = prefix[pos] * weights[i];
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
}

/// t(F, W): probability that G(q, W) equals F, as an exact weighted sum over
/// class assignments of the q vertices.
template <class T>
T t_density_kernel(const ColoredHypergraph& f, const ColoredStepKernel<T>& w,
                   std::uint64_t guard = default_guards().enumeration) {
  if (f.r() != w.r) throw InvalidArgument("F and W differ in r");
  if (f.k() > w.k) throw InvalidColor("F uses more colours than W has");
  check_guard(sat_mul(sat_pow(w.t, f.n()), std::max<std::uint64_t>(f.slot_count(), 1)), guard,
              "t_density_kernel");
  std::vector<std::vector<std::size_t>> slots;
  for_each_subset(f.n(), f.r(), [&](std::span<const std::size_t> s) { slots.emplace_back(s.begin(), s.end()); });
  T total = 0;
  std::vector<std::size_t> cell(w.r);
  for_each_assignment(w.weights, f.n(), [&](std::span<const std::size_t> c, const T& p) {
    T prod = p;
    for (std::size_t e = 0; e < slots.size() && prod != 0; ++e) {
      for (std::size_t i = 0; i < w.r; ++i) cell[i] = c[slots[e][i]];
      prod *= w.values[f.color_at(e)][cell_index(cell, w.t)];
    }
    total += prod;
  });
  return total;
}

/// Exact law μ(q, W) of the unconditioned sample. Outcomes in which some slot
/// lands on the loop colour are pooled into `loop_mass`.
inline Distribution exact_sample_distribution(const ColoredStepKernel<Rational>& w, std::size_t q,
                                              std::uint64_t guard = default_guards().enumeration) {
  if (q < 1) throw InvalidSample("q must be >= 1");
  const std::size_t slots_n = static_cast<std::size_t>(binomial(q, w.r));
  check_guard(sat_mul(sat_pow(w.t, q), sat_pow(w.k, slots_n)), guard, "exact_sample_distribution");
  Distribution d{w.r, q, w.real_colors(), {}, 0};
  std::vector<std::vector<std::size_t>> slots;
  for_each_subset(q, w.r, [&](std::span<const std::size_t> s) { slots.emplace_back(s.begin(), s.end()); });
  std::vector<Color> key(slots.size());
  std::vector<std::size_t> cell_of_slot(slots.size());
  std::vector<std::size_t> cell(w.r);
  for_each_assignment(w.weights, q, [&](std::span<const std::size_t> c, const Rational& p) {
    for (std::size_t e = 0; e < slots.size(); ++e) {
      for (std::size_t i = 0; i < w.r; ++i) cell[i] = c[slots[e][i]];
      cell_of_slot[e] = cell_index(cell, w.t);
    }
    auto rec = [&](auto&& self, std::size_t e, const Rational& mass) -> void {
      if (e == slots.size()) {
        d.add(key, mass);
        return;
      }
      for (std::size_t a = 0; a < w.k; ++a) {
        const Rational& pa = w.values[a][cell_of_slot[e]];
        if (pa == 0) continue;
        if (w.has_loop_color && a == w.loop_color()) {
          d.loop_mass += mass * pa;
          continue;
        }
        key[e] = static_cast<Color>(a);
        self(self, e + 1, mass * pa);
      }
    };
    rec(rec, 0, p);
  });
  return d;
}

/// G(q, W). A draw in which any slot receives the loop colour is rejected and
/// redrawn as a whole (class coordinates and colours).
template <class T>
ColoredHypergraph sample_from_kernel(const ColoredStepKernel<T>& w, std::size_t q, Rng& rng,
                                     std::size_t max_rejections = 1'000'000) {
  if (q < w.r) throw InvalidSample("q must be >= r");
  std::vector<double> wd(w.weights.size());
  for (std::size_t i = 0; i < wd.size(); ++i) wd[i] = to_double(w.weights[i]);
  std::vector<double> probs(w.k);
  std::vector<std::size_t> cls(q), cell(w.r);
  for (std::size_t attempt = 0; attempt <= max_rejections; ++attempt) {
    for (auto& c : cls) c = draw_categorical(rng, wd);
    ColoredHypergraph out(w.r, q, w.real_colors());
    bool rejected = false;
    std::size_t rank = 0;
    for_each_subset(q, w.r, [&](std::span<const std::size_t> s) {
      if (rejected) return;
      for (std::size_t i = 0; i < w.r; ++i) cell[i] = cls[s[i]];
      const std::size_t idx = cell_index(cell, w.t);
      for (std::size_t a = 0; a < w.k; ++a) probs[a] = to_double(w.values[a][idx]);
      const std::size_t a = draw_categorical(rng, probs);
      if (w.has_loop_color && a == w.loop_color()) rejected = true;
      else out.set_color_at(rank, static_cast<Color>(a));
      ++rank;
    });
    if (!rejected) return out;
  }
  throw GuardExceeded("sample_from_kernel: loop colour rejected too often");
}

/// Blocks of Q as lists of classes.
inline std::vector<std::vector<std::size_t>> blocks_of(const CellPartition& q) {
  std::vector<std::vector<std::size_t>> b(q.block_count());
  for (std::size_t i = 0; i < q.size(); ++i) b[q[i]].push_back(i);
  return b;
}

template <class T>
std::vector<T> block_weights(const std::vector<T>& weights, const CellPartition& q) {
  std::vector<T> out(q.block_count(), T(0));
  for (std::size_t i = 0; i < q.size(); ++i) out[q[i]] += weights[i];
  return out;
}

/// Weighted average of one t^r array over the Q-cells, returned as a t_Q^r
/// array.
template <class T>
std::vector<T> average_on_blocks(const std::vector<T>& values, const std::vector<T>& weights,
                                 std::size_t r, const CellPartition& q) {
  const std::size_t t = weights.size();
  const std::size_t tq = q.block_count();
  const auto bw = block_weights(weights, q);
  std::vector<T> sums(ipow(tq, r), T(0));
  std::vector<std::size_t> bcell(r);
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    if (values[idx] == 0) continue;
    auto cell = cell_of_index(idx, t, r);
    T mass = values[idx];
    for (std::size_t j = 0; j < r; ++j) {
      bcell[j] = q[cell[j]];
      mass *= weights[cell[j]];
    }
    sums[cell_index(bcell, tq)] += mass;
  }
  for (std::size_t idx = 0; idx < sums.size(); ++idx) {
    auto bc = cell_of_index(idx, tq, r);
    T vol = 1;
    for (auto b : bc) vol *= bw[b];
    sums[idx] /= vol;
  }
  return sums;
}

/// Kernel on the t_Q blocks of Q (block weights are summed class weights).
template <class T>
StepKernel<T> coarsen(const StepKernel<T>& w, const CellPartition& q) {
  if (q.size() != w.t) throw InvalidArgument("partition does not cover the kernel classes");
  StepKernel<T> out;
  out.r = w.r;
  out.t = q.block_count();
  out.weights = block_weights(w.weights, q);
  out.values = average_on_blocks(w.values, w.weights, w.r, q);
  return out;
}

template <class T>
ColoredStepKernel<T> coarsen(const ColoredStepKernel<T>& w, const CellPartition& q) {
  if (q.size() != w.t) throw InvalidArgument("partition does not cover the kernel classes");
  ColoredStepKernel<T> out;
  out.r = w.r;
  out.t = q.block_count();
  out.k = w.k;
  out.has_loop_color = w.has_loop_color;
  out.weights = block_weights(w.weights, q);
  for (const auto& arr : w.values) out.values.push_back(average_on_blocks(arr, w.weights, w.r, q));
  return out;
}

/// Pulls a block-level array back to the t classes.
template <class T>
std::vector<T> lift_from_blocks(const std::vector<T>& block_values, std::size_t t, std::size_t r,
                                const CellPartition& q) {
  std::vector<T> out(ipow(t, r));
  std::vector<std::size_t> bcell(r);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    auto cell = cell_of_index(idx, t, r);
    for (std::size_t j = 0; j < r; ++j) bcell[j] = q[cell[j]];
    out[idx] = block_values[cell_index(bcell, q.block_count())];
  }
  return out;
}

/// Weight-averaged kernel that is constant on Q-cells, on the original t
/// classes.
template <class T>
StepKernel<T> step_average(const StepKernel<T>& w, const CellPartition& q) {
  auto c = coarsen(w, q);
  StepKernel<T> out = w;
  out.values = lift_from_blocks(c.values, w.t, w.r, q);
  return out;
}

template <class T>
ColoredStepKernel<T> step_average(const ColoredStepKernel<T>& w, const CellPartition& q) {
  auto c = coarsen(w, q);
  ColoredStepKernel<T> out = w;
  for (std::size_t a = 0; a < w.k; ++a) out.values[a] = lift_from_blocks(c.values[a], w.t, w.r, q);
  return out;
}

/// t*(pattern, W) for a coloured kernel: Σ over class assignments of Π w ·
/// Π_e W^{colour(e)}.
template <class T>
T tstar_kernel(const Pattern& p, const ColoredStepKernel<T>& w,
               std::uint64_t guard = default_guards().enumeration) {
  if (p.r != w.r) throw InvalidArgument("pattern and kernel differ in r");
  check_guard(sat_pow(w.t, p.q), guard, "tstar_kernel");
  T total = 0;
  std::vector<std::size_t> cell(w.r);
  for_each_assignment(w.weights, p.q, [&](std::span<const std::size_t> c, const T& pr) {
    T prod = pr;
    for (std::size_t e = 0; e < p.edges.size() && prod != 0; ++e) {
      for (std::size_t i = 0; i < w.r; ++i) cell[i] = c[p.edges[e][i]];
      prod *= w.values.at(p.colors[e])[cell_index(cell, w.t)];
    }
    total += prod;
  });
  return total;
}

/// t*(H, W) for a signed kernel: every edge of H contributes a factor W.
template <class T>
T tstar_kernel(const Pattern& p, const StepKernel<T>& w,
               std::uint64_t guard = default_guards().enumeration) {
  if (p.r != w.r) throw InvalidArgument("pattern and kernel differ in r");
  check_guard(sat_pow(w.t, p.q), guard, "tstar_kernel");
  T total = 0;
  std::vector<std::size_t> cell(w.r);
  for_each_assignment(w.weights, p.q, [&](std::span<const std::size_t> c, const T& pr) {
    T prod = pr;
    for (std::size_t e = 0; e < p.edges.size() && prod != 0; ++e) {
      for (std::size_t i = 0; i < w.r; ++i) cell[i] = c[p.edges[e][i]];
      prod *= w.values[cell_index(cell, w.t)];
    }
    total += prod;
  });
  return total;
}

}  // namespace hypertest
