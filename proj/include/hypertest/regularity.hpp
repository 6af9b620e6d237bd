#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hypertest/kernel.hpp"
#include "hypertest/kernel_ops.hpp"
#include "hypertest/norms.hpp"

namespace hypertest {

/// Calls fn(partition) for every partition of [t] into at most `max_blocks`
/// blocks, as restricted growth strings in lexicographic order. Return false
/// to stop.
template <class Fn>
std::uint64_t for_each_set_partition(std::size_t t, std::size_t max_blocks, Fn&& fn) {
  std::vector<std::size_t> a(t, 0);
  std::uint64_t count = 0;
  bool stop = false;
  auto rec = [&](auto&& self, std::size_t pos, std::size_t used) -> void {
    if (stop) return;
    if (pos == t) {
      ++count;
      if (!fn(CellPartition(a))) stop = true;
      return;
    }
    const std::size_t lim = std::min(used + 1, max_blocks);
    for (std::size_t b = 0; b < lim && !stop; ++b) {
      a[pos] = b;
      self(self, pos + 1, std::max(used, b + 1));
    }
  };
  if (t == 0) return 0;
  a[0] = 0;
  rec(rec, 1, 1);
  return count;
}

inline std::uint64_t count_set_partitions(std::size_t t, std::size_t max_blocks) {
  // Stirling numbers of the second kind, summed over block counts
  std::vector<std::vector<std::uint64_t>> s(t + 1, std::vector<std::uint64_t>(t + 1, 0));
  s[0][0] = 1;
  for (std::size_t n = 1; n <= t; ++n)
    for (std::size_t k = 1; k <= n; ++k) s[n][k] = sat_mul(k, s[n - 1][k]) + s[n - 1][k - 1];
  std::uint64_t total = 0;
  for (std::size_t k = 1; k <= std::min(t, max_blocks); ++k) total += s[t][k];
  return total;
}

/// log2 of log2 of the class-count bound (2t)^{(rk+1)^{4k²/ε²}}.
inline double treg_loglog2(std::size_t r, std::size_t k, double eps, std::size_t t) {
  const double kk = static_cast<double>(k);
  return 4 * kk * kk / (eps * eps) * std::log2(static_cast<double>(r * k + 1)) +
         std::log2(std::log2(2.0 * static_cast<double>(t)));
}

inline bool within_treg(std::size_t classes, std::size_t r, std::size_t k, double eps, std::size_t t) {
  if (classes <= 2 * t) return true;
  return std::log2(std::log2(static_cast<double>(classes))) <= treg_loglog2(r, k, eps, t);
}

struct RegularityOptions {
  std::size_t t_probe = 4;
  std::optional<CellPartition> initial;
  /// Colours whose deviation drives refinement; empty means all.
  std::vector<bool> active_colors;
  /// Exact probing is used while (#probes · 2^{tr} · t_probe^{r-1}) stays
  /// below this budget; beyond it violators are searched by ascent and the
  /// certificate falls back to L¹ / spectral upper bounds.
  std::uint64_t exact_budget = std::uint64_t{1} << 26;
  AscentOptions ascent{};
  std::uint64_t guard = default_guards().enumeration;
};

template <class T>
struct RegularityResult {
  CellPartition q;
  ColoredStepKernel<T> v;
  std::size_t iterations = 0;
  std::size_t iteration_cap = 0;
  bool cap_hit = false;
  bool certified = false;
  std::string certificate;       // "exact-probes", "upper-bound" or "none"
  double deviation = 0;          // certified sup over probes of d_{□,*,Q'}(W, V)
  std::uint64_t probes = 0;
  bool within_class_bound = true;
};

namespace detail {

template <class T>
StepKernel<T> color_difference(const ColoredStepKernel<T>& w, const ColoredStepKernel<T>& v,
                               std::size_t a) {
  StepKernel<T> d = w.component(a);
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= v.values[a][i];
  return d;
}

inline CellPartition refine_with(const CellPartition& q, const CellPartition& probe,
                                 const std::vector<std::vector<bool>>& sets) {
  CellPartition out = q.meet(probe);
  for (const auto& s : sets) out = out.split_by(s);
  return out.normalized();
}

}  // namespace detail

/// Frieze–Kannan energy increment. Starting from Q (trivial unless an initial
/// partition is given), V = step_average(W, Q). While some colour α, probe
/// partition Q' (at most t_probe blocks, aligned with W's classes) and sets
/// S_1..S_r give Σ_{Q'-cells} |∫_{S∩cell} (W^α − V^α)| > ε/(2k), Q is refined
/// by Q' and the S_j. Each refinement raises Σ_α ‖V^α‖² by more than
/// (ε/2k)², so at most ⌈4k²/ε²⌉ refinements happen.
template <class T>
RegularityResult<T> weak_regularity(const ColoredStepKernel<T>& w, double eps,
                                    const RegularityOptions& opt = {}) {
  if (!(eps > 0)) throw InvalidArgument("epsilon must be positive");
  const std::size_t k = w.k;
  const double kd = static_cast<double>(k);
  const double threshold = eps / (2 * kd);
  RegularityResult<T> res;
  res.iteration_cap = static_cast<std::size_t>(std::ceil(4 * kd * kd / (eps * eps)));
  res.q = opt.initial ? *opt.initial : CellPartition::trivial(w.t);
  if (res.q.size() != w.t) throw InvalidArgument("initial partition does not cover the classes");
  auto active = [&](std::size_t a) { return opt.active_colors.empty() || opt.active_colors.at(a); };

  const std::size_t tp = std::min(opt.t_probe, w.t);
  const std::uint64_t probe_count = count_set_partitions(w.t, tp);
  const bool exact =
      sat_mul(sat_mul(probe_count, sat_pow(2, w.t * w.r)), ipow(tp, w.r - 1)) <= opt.exact_budget;

  // shortcut: every deviation is at most sup|W| ≤ ε/(2k)
  T sup = 0;
  for (std::size_t a = 0; a < k; ++a)
    if (active(a)) sup = std::max(sup, w.component(a).sup_norm());
  const bool trivial_ok = to_double(sup) <= threshold && !opt.initial;

  while (!trivial_ok) {
    res.v = step_average(w, res.q);
    bool refined = false;
    for (std::size_t a = 0; a < k && !refined; ++a) {
      if (!active(a)) continue;
      const auto d = detail::color_difference(w, res.v, a);
      const auto trivial = CellPartition::trivial(w.t);
      auto plain = exact ? cut_star_norm(d, NormMode::exact, {}, opt.guard)
                         : cut_star_norm(d, NormMode::ascent, opt.ascent, opt.guard);
      if (to_double(plain.value) > threshold) {
        res.q = detail::refine_with(res.q, trivial, plain.witness);
        refined = true;
        break;
      }
      if (exact) {
        for_each_set_partition(w.t, tp, [&](const CellPartition& probe) {
          if (probe.block_count() == 1) return true;
          auto n = cut_star_P_norm(d, probe, NormMode::exact, {}, opt.guard);
          if (to_double(n.value) > threshold) {
            res.q = detail::refine_with(res.q, probe, n.witness);
            refined = true;
            return false;
          }
          return true;
        });
      }
    }
    if (!refined) break;
    ++res.iterations;
    if (res.iterations > res.iteration_cap) {
      res.cap_hit = true;
      break;
    }
  }
  if (trivial_ok) res.q = CellPartition::trivial(w.t);
  res.v = step_average(w, res.q);

  // certificate
  if (exact && !res.cap_hit) {
    double worst = 0;
    res.probes = for_each_set_partition(w.t, tp, [&](const CellPartition& probe) {
      double total = 0;
      for (std::size_t a = 0; a < k; ++a)
        total += to_double(
            cut_star_P_norm(detail::color_difference(w, res.v, a), probe, NormMode::exact, {}, opt.guard)
                .value);
      worst = std::max(worst, total);
      return true;
    });
    res.deviation = worst;
    res.certificate = "exact-probes";
  } else {
    double total = 0;
    for (std::size_t a = 0; a < k; ++a)
      total += cut_P_upper_bound(detail::color_difference(w, res.v, a), tp);
    res.deviation = total;
    res.certificate = "upper-bound";
  }
  res.certified = !res.cap_hit && res.deviation <= eps + 1e-12;
  if (!res.certified) res.certificate = res.cap_hit ? "none (iteration cap hit)" : res.certificate + " (exceeds epsilon)";
  res.within_class_bound = within_treg(res.q.block_count(), w.r, k, eps, std::max<std::size_t>(opt.t_probe, 1));
  return res;
}

/// Plain (single-colour, possibly signed) variant.
template <class T>
RegularityResult<T> weak_regularity(const StepKernel<T>& w, double eps,
                                    const RegularityOptions& opt = {}) {
  ColoredStepKernel<T> c;
  c.r = w.r;
  c.t = w.t;
  c.k = 1;
  c.weights = w.weights;
  c.values = {w.values};
  return weak_regularity(c, eps, opt);
}

}  // namespace hypertest
