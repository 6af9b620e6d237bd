#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hypertest/bounds.hpp"
#include "hypertest/density.hpp"
#include "hypertest/distribution.hpp"
#include "hypertest/kernel.hpp"
#include "hypertest/kernel_ops.hpp"
#include "hypertest/norms.hpp"
#include "hypertest/regularity.hpp"

namespace hypertest {

/// The weighted sample H(q, U) of a step kernel: q points with independent
/// classes, value U(classes) on r-tuples of distinct points and 0 whenever a
/// point repeats. Everything about it depends only on the class counts.
struct KernelSample {
  std::vector<std::size_t> classes;  // class of each sampled point
  std::vector<std::size_t> counts;   // points per class
  std::size_t q() const { return classes.size(); }
};

template <class T>
KernelSample draw_kernel_sample(const std::vector<T>& weights, std::size_t q, Rng& rng) {
  std::vector<double> wd(weights.size());
  for (std::size_t i = 0; i < wd.size(); ++i) wd[i] = to_double(weights[i]);
  KernelSample s;
  s.classes.resize(q);
  s.counts.assign(weights.size(), 0);
  for (auto& c : s.classes) {
    c = draw_categorical(rng, wd);
    ++s.counts[c];
  }
  return s;
}

namespace detail {

/// Number of injective maps from the listed classes (with multiplicity) into
/// the sampled points: Π_i (n_i)_{m_i}.
inline Rational injective_count(std::span<const std::size_t> cls, const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> mult(counts.size(), 0);
  for (auto c : cls) ++mult[c];
  Rational out = 1;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < mult[i]; ++j) {
      if (counts[i] <= j) return 0;
      out *= static_cast<unsigned long>(counts[i] - j);
    }
  return out;
}

inline Rational power_of(std::size_t q, std::size_t e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), q, e);
  return Rational(p);
}

}  // namespace detail

/// The sampled kernel as a q-class step kernel (weights 1/q, zero on
/// repeated points). Only for small q.
inline StepKernel<Rational> sample_kernel(const StepKernel<Rational>& u, const KernelSample& s) {
  const std::size_t q = s.q();
  std::vector<Rational> vals(ipow(q, u.r), Rational(0));
  std::vector<std::size_t> cell(u.r);
  for (std::size_t idx = 0; idx < vals.size(); ++idx) {
    auto pts = cell_of_index(idx, q, u.r);
    auto sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    for (std::size_t i = 0; i < u.r; ++i) cell[i] = s.classes[pts[i]];
    vals[idx] = u.values[cell_index(cell, u.t)];
  }
  return StepKernel<Rational>(u.r, std::vector<Rational>(q, ratio(1UL, static_cast<unsigned long>(q))),
                              std::move(vals));
}

/// t*(H, H(q, U)) exactly from the class counts: group vertex maps by which
/// pattern vertices coincide, drop groupings that put an edge on a repeated
/// point, count injective placements by class.
inline Rational tstar_of_sample(const Pattern& p, const StepKernel<Rational>& u, const KernelSample& s) {
  if (p.r != u.r) throw InvalidArgument("pattern and kernel differ in r");
  if (p.q == 0) return 1;
  check_guard(sat_mul(count_set_partitions(p.q, p.q), sat_pow(u.t, p.q)), default_guards().enumeration,
              "tstar_of_sample");
  Rational total = 0;
  std::vector<std::size_t> cell(u.r);
  for_each_set_partition(p.q, p.q, [&](const CellPartition& blocks) {
    for (const auto& e : p.edges) {
      std::vector<std::size_t> b;
      for (auto v : e) b.push_back(blocks[v]);
      std::sort(b.begin(), b.end());
      if (std::adjacent_find(b.begin(), b.end()) != b.end()) return true;
    }
    const std::size_t m = blocks.block_count();
    for_each_tuple(u.t, m, [&](std::span<const std::size_t> cls) {
      Rational prod = 1;
      for (const auto& e : p.edges) {
        for (std::size_t i = 0; i < u.r; ++i) cell[i] = cls[blocks[e[i]]];
        prod *= u.values[cell_index(cell, u.t)];
        if (prod == 0) return;
      }
      total += prod * detail::injective_count(cls, s.counts);
    });
    return true;
  });
  return total / detail::power_of(s.q(), p.q);
}

/// ∫|H(q,U)| and ∫|blow-up − H(q,U)|, the mass lost on repeated points.
struct SampleMass {
  Rational l1 = 0;
  Rational repeated = 0;
};

inline SampleMass sample_mass(const StepKernel<Rational>& u, const KernelSample& s) {
  SampleMass m;
  const Rational qr = detail::power_of(s.q(), u.r);
  for (std::size_t idx = 0; idx < u.values.size(); ++idx) {
    if (u.values[idx] == 0) continue;
    const auto cell = cell_of_index(idx, u.t, u.r);
    const Rational a = abs(u.values[idx]);
    Rational all = 1;
    for (auto c : cell) all *= static_cast<unsigned long>(s.counts[c]);
    const Rational distinct = detail::injective_count(cell, s.counts);
    m.l1 += a * distinct;
    m.repeated += a * (all - distinct);
  }
  m.l1 /= qr;
  m.repeated /= qr;
  return m;
}

/// The blow-up B of U with class weights n_i/q (empty classes dropped).
inline StepKernel<Rational> sample_blowup(const StepKernel<Rational>& u, const KernelSample& s) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < u.t; ++i)
    if (s.counts[i] > 0) keep.push_back(i);
  std::vector<Rational> w;
  for (auto i : keep) w.push_back(ratio(static_cast<unsigned long>(s.counts[i]), static_cast<unsigned long>(s.q())));
  std::vector<Rational> vals(ipow(keep.size(), u.r));
  std::vector<std::size_t> cell(u.r);
  for (std::size_t idx = 0; idx < vals.size(); ++idx) {
    auto c = cell_of_index(idx, keep.size(), u.r);
    for (std::size_t i = 0; i < u.r; ++i) cell[i] = keep[c[i]];
    vals[idx] = u.values[cell_index(cell, u.t)];
  }
  return StepKernel<Rational>(u.r, std::move(w), std::move(vals));
}

// ---------------------------------------------------------------------------

struct ConcentrationReport {
  Rational exact;  // t*(F, U)
  double delta = 0;
  std::size_t q = 0;
  std::size_t trials = 0;
  std::size_t deviations = 0;
  double rate = 0;
  double std_error = 0;
  double bound = 0;  // 2 exp(-δ² q / (2 |V(F)|²))
  double max_deviation = 0;
  bool violation = false;
  std::uint64_t seed = 0;
};

/// Frequency of |t*(F,U) − t*(F,H(q,U))| ≥ δ over seeded trials, against
/// the sampling bound. Trial i uses derive_seed(seed, i).
inline ConcentrationReport concentration_experiment(const StepKernel<Rational>& u, const Hypergraph& f,
                                                    std::size_t q, double delta, std::size_t trials,
                                                    std::uint64_t seed) {
  if (!(delta > 0)) throw InvalidArgument("delta must be positive");
  if (trials == 0) throw InvalidArgument("need at least one trial");
  if (f.r() != u.r) throw InvalidArgument("F and U differ in r");
  ConcentrationReport rep;
  const auto p = pattern_of(f);
  rep.exact = tstar_kernel(p, u);
  rep.delta = delta;
  rep.q = q;
  rep.trials = trials;
  rep.seed = seed;
  const double vf = static_cast<double>(f.n());
  rep.bound = 2 * std::exp(-delta * delta * static_cast<double>(q) / (2 * vf * vf));
  const Rational dq(delta);
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, i));
    const auto s = draw_kernel_sample(u.weights, q, rng);
    const Rational dev = abs(tstar_of_sample(p, u, s) - rep.exact);
    const double d = dev.get_d();
    rep.max_deviation = std::max(rep.max_deviation, d);
    if (dev >= dq) ++rep.deviations;
  }
  rep.rate = static_cast<double>(rep.deviations) / static_cast<double>(trials);
  rep.std_error = std::sqrt(rep.rate * (1 - rep.rate) / static_cast<double>(trials));
  rep.violation = rep.rate > rep.bound + 3 * rep.std_error;
  return rep;
}

// ---------------------------------------------------------------------------

enum class TrialVerdict { pass, fail, undetermined };

struct SampledCutReport {
  Rational hypothesis_lhs;  // Σ ‖U_l‖_{□,*}
  Rational hypothesis_rhs;  // (ε/(k t^r))^{2^r} 2^{-r-1}
  bool hypothesis_met = false;
  bool guaranteed_regime = false;  // q ≥ q_cut with constant 1
  std::size_t trials = 0;
  std::size_t passes = 0;
  std::size_t fails = 0;
  std::size_t undetermined = 0;
  double pass_rate = 0;
  double std_error = 0;
  double worst_upper = 0;
  bool meets_guarantee = false;  // pass rate ≥ 1 − ε − 3se
  std::string probe_family;
};

/// Samples the shared points of H(q, U_l) for all l and bounds
/// sup_{t_Q ≤ t} Σ_l ‖H(q,U_l)‖_{□,*,Q} from above (∫|·| and, for r = 2,
/// t·operator norm) and from below (exact norms of the blow-ups over
/// class-aligned probe partitions minus the mass on repeated points).
inline SampledCutReport sampled_cutnorm_check(const std::vector<StepKernel<Rational>>& us, const Rational& eps,
                                              std::size_t t, std::size_t q, std::size_t trials,
                                              std::uint64_t seed) {
  if (us.empty()) throw InvalidArgument("need at least one kernel");
  if (eps <= 0) throw InvalidArgument("epsilon must be positive");
  const std::size_t r = us[0].r, k = us.size();
  for (const auto& u : us) {
    if (u.r != r || u.weights != us[0].weights)
      throw InvalidArgument("kernels must share r and the class partition");
    if (u.sup_norm() > 1) throw RangeError("kernels must take values in [-1,1]");
  }
  SampledCutReport rep;
  rep.trials = trials;
  for (const auto& u : us) rep.hypothesis_lhs += cut_star_norm(u).value;
  Rational base = eps / Rational(static_cast<unsigned long>(k * ipow(t, r)));
  rep.hypothesis_rhs = rational_pow(base, std::size_t{1} << r) / detail::power_of(2, r + 1);
  rep.hypothesis_met = rep.hypothesis_lhs <= rep.hypothesis_rhs;
  const auto qc = qcut_bound(r, k, eps, t);
  rep.guaranteed_regime = qc.value.finite() && static_cast<double>(q) >= qc.value.value();
  const std::size_t tu = us[0].t;
  rep.probe_family = "upper: L1" + std::string(r == 2 ? " and t*spectral" : "") +
                     "; lower: class-aligned partitions with <= " + std::to_string(t) + " blocks";
  if (!rep.hypothesis_met) return rep;
  const double e = eps.get_d();
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, i));
    const auto s = draw_kernel_sample(us[0].weights, q, rng);
    double upper = 0;
    std::vector<Rational> repeated(k);
    std::vector<StepKernel<Rational>> blow(k);
    for (std::size_t l = 0; l < k; ++l) {
      const auto m = sample_mass(us[l], s);
      repeated[l] = m.repeated;
      blow[l] = sample_blowup(us[l], s);
      double ub = m.l1.get_d() * (1 + 1e-12);
      if (r == 2) {
        Rational dmax = 0;
        for (std::size_t c = 0; c < tu; ++c)
          if (s.counts[c] > 0) dmax = std::max(dmax, Rational(abs(us[l].values[c * tu + c])));
        ub = std::min(ub, static_cast<double>(t) * (spectral_bound(blow[l]) + dmax.get_d() / static_cast<double>(q)));
      }
      upper += ub;
    }
    rep.worst_upper = std::max(rep.worst_upper, upper);
    if (upper <= e) {
      ++rep.passes;
      continue;
    }
    double lower = 0;
    const std::size_t tb = blow[0].t;
    for_each_set_partition(tb, std::min(t, tb), [&](const CellPartition& probe) {
      double sum = 0;
      for (std::size_t l = 0; l < k; ++l)
        sum += std::max(0.0, Rational(cut_star_P_norm(blow[l], probe).value - repeated[l]).get_d());
      lower = std::max(lower, sum);
      return true;
    });
    if (lower > e) ++rep.fails;
    else ++rep.undetermined;
  }
  rep.pass_rate = static_cast<double>(rep.passes) / static_cast<double>(std::max<std::size_t>(trials, 1));
  rep.std_error = std::sqrt(rep.pass_rate * (1 - rep.pass_rate) / static_cast<double>(std::max<std::size_t>(trials, 1)));
  rep.meets_guarantee = rep.pass_rate >= 1 - e - 3 * rep.std_error;
  return rep;
}

// ---------------------------------------------------------------------------

struct CountingReport {
  Rational tv;          // d_tv(μ(q,W), μ(q,U))
  Rational cut;         // Σ_α ‖U^α − W^α‖_{□,*}
  Rational coefficient; // k^{q^r} q^r / (2 r!)
  Rational rhs;
  bool holds = false;
  bool vacuous = false;  // rhs ≥ 1
  Coupling coupling;
  bool coupling_exact = false;
};

inline CountingReport counting_lemma_check(const ColoredStepKernel<Rational>& u, const ColoredStepKernel<Rational>& w,
                                           std::size_t q, std::uint64_t guard = default_guards().enumeration) {
  if (u.r != w.r || u.k != w.k) throw InvalidArgument("kernels differ in r or k");
  CountingReport rep;
  const auto mw = exact_sample_distribution(w, q, guard);
  const auto mu = exact_sample_distribution(u, q, guard);
  rep.tv = tv_distance(mw, mu);
  rep.cut = cut_distance(u, w, std::nullopt, NormMode::exact, {}, guard).value;
  const std::size_t qr = ipow(q, u.r);
  rep.coefficient = rational_pow(Rational(static_cast<unsigned long>(u.k)), qr) *
                    Rational(static_cast<unsigned long>(qr)) /
                    Rational(static_cast<unsigned long>(2 * factorial(u.r)));
  rep.coefficient.canonicalize();
  rep.rhs = rep.coefficient * rep.cut;
  rep.holds = rep.tv <= rep.rhs;
  rep.vacuous = rep.rhs >= 1;
  rep.coupling = maximal_coupling(mw, mu);
  rep.coupling_exact = rep.coupling.disagreement() == rep.tv;
  return rep;
}

}  // namespace hypertest
