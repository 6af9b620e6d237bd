#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hypertest/hypergraph.hpp"
#include "hypertest/kernel.hpp"
#include "hypertest/kernel_io.hpp"
#include "hypertest/rational.hpp"
#include "hypertest/sampling.hpp"

namespace hypertest {

/// Real r-array of side s, lexicographic entry order.
struct RealArray {
  std::size_t r = 2;
  std::size_t s = 1;
  std::vector<Rational> values;

  RealArray() = default;
  RealArray(std::size_t r_, std::size_t s_, std::vector<Rational> v) : r(r_), s(s_), values(std::move(v)) {
    if (values.size() != ipow(s, r)) throw InvalidArgument("array needs s^r entries");
  }
  static RealArray constant(std::size_t r, std::size_t s, const Rational& c) {
    return RealArray(r, s, std::vector<Rational>(ipow(s, r), c));
  }
  const Rational& at(std::span<const std::size_t> cell) const { return values[cell_index(cell, s)]; }
  Rational sup_norm() const {
    Rational m = 0;
    for (const auto& v : values) m = std::max(m, Rational(abs(v)));
    return m;
  }
  RealArray scaled(const Rational& a) const {
    RealArray out = *this;
    for (auto& v : out.values) v *= a;
    return out;
  }
};

enum class GseMode { exact, local };

struct GseResult {
  Rational value = 0;
  std::vector<std::size_t> partition;  // class per vertex (or per (r-1)-set for ggse)
  bool exact = true;
  std::string certificate;
};

namespace detail {

/// S(c) = Σ over orderings π of J(c_π). An r-edge whose sorted vertices carry
/// classes c contributes S(c) to the ordered-tuple energy.
inline std::vector<Rational> symmetrized(const RealArray& j) {
  std::vector<Rational> out(j.values.size());
  std::vector<std::size_t> perm(j.r);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const auto cell = cell_of_index(idx, j.s, j.r);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rational s = 0;
    std::vector<std::size_t> c(j.r);
    do {
      for (std::size_t i = 0; i < j.r; ++i) c[i] = cell[perm[i]];
      s += j.at(c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    out[idx] = s;
  }
  return out;
}

inline Rational n_pow(std::size_t n, std::size_t r) { return power_of(n, r); }

}  // namespace detail

/// Energy (1/n^r) Σ over ordered r-tuples of distinct vertices spanning an
/// edge of J(classes) for a fixed vertex partition.
inline Rational gse_energy(const Hypergraph& g, const RealArray& j, const std::vector<std::size_t>& cls) {
  if (g.r() != j.r) throw InvalidArgument("graph and array differ in r");
  const auto sym = detail::symmetrized(j);
  Rational e = 0;
  std::vector<std::size_t> c(g.r());
  for (const auto& edge : g.edges()) {
    for (std::size_t i = 0; i < g.r(); ++i) c[i] = cls[edge[i]];
    e += sym[cell_index(c, j.s)];
  }
  return e / detail::n_pow(g.n(), g.r());
}

struct LocalSearchOptions {
  std::size_t restarts = 16;
  std::uint64_t seed = 1;
  std::size_t max_sweeps = 200;
};

/// Ground state energy over vertex partitions into s labelled (possibly
/// empty) parts. Exact mode enumerates all s^n assignments; local mode climbs
/// single-vertex moves from random starts.
inline GseResult gse_graph(const Hypergraph& g, const RealArray& j, GseMode mode = GseMode::exact,
                           const LocalSearchOptions& opt = {},
                           std::uint64_t guard = default_guards().enumeration) {
  if (g.r() != j.r) throw InvalidArgument("graph and array differ in r");
  const std::size_t n = g.n(), s = j.s, r = g.r();
  const auto sym = detail::symmetrized(j);
  std::vector<double> symd(sym.size());
  for (std::size_t i = 0; i < sym.size(); ++i) symd[i] = sym[i].get_d();
  const auto edges = g.edges();
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < edges.size(); ++e)
    for (auto v : edges[e]) incident[v].push_back(e);
  std::vector<std::size_t> c(r);
  auto edge_val = [&](std::size_t e, const std::vector<std::size_t>& cls) {
    for (std::size_t i = 0; i < r; ++i) c[i] = cls[edges[e][i]];
    return symd[cell_index(c, s)];
  };

  GseResult res;
  if (mode == GseMode::exact) {
    check_guard(sat_pow(s, n), guard, "gse_graph");
    std::vector<std::size_t> cls(n, 0), best;
    double best_val = -std::numeric_limits<double>::infinity();
    // enumerate in lexicographic order so the first maximiser is the
    // lexicographically smallest; exact values are compared for near ties
    Rational best_exact;
    for_each_tuple(s, n, [&](std::span<const std::size_t> a) {
      cls.assign(a.begin(), a.end());
      double v = 0;
      for (std::size_t e = 0; e < edges.size(); ++e) v += edge_val(e, cls);
      if (best.empty() || v > best_val + 1e-9 * (1 + std::fabs(best_val))) {
        best_val = v;
        best = cls;
        best_exact = gse_energy(g, j, cls);
      } else if (v > best_val - 1e-9 * (1 + std::fabs(best_val))) {
        const Rational ex = gse_energy(g, j, cls);
        if (ex > best_exact) {
          best_exact = ex;
          best = cls;
          best_val = v;
        }
      }
    });
    res.value = best_exact;
    res.partition = best;
    res.exact = true;
    res.certificate = "exact";
    return res;
  }

  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best;
  for (std::size_t rs = 0; rs < std::max<std::size_t>(opt.restarts, 1); ++rs) {
    Rng rng(derive_seed(opt.seed, rs));
    std::vector<std::size_t> cls(n);
    for (auto& x : cls) x = uniform_index(rng, s);
    double cur = 0;
    for (std::size_t e = 0; e < edges.size(); ++e) cur += edge_val(e, cls);
    for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      bool moved = false;
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t old = cls[v];
        double here = 0;
        for (auto e : incident[v]) here += edge_val(e, cls);
        std::size_t arg = old;
        double gain = 0;
        for (std::size_t b = 0; b < s; ++b) {
          if (b == old) continue;
          cls[v] = b;
          double there = 0;
          for (auto e : incident[v]) there += edge_val(e, cls);
          if (there - here > gain + 1e-12) {
            gain = there - here;
            arg = b;
          }
        }
        cls[v] = arg;
        if (arg != old) {
          cur += gain;
          moved = true;
        }
      }
      if (!moved) break;
    }
    if (cur > best_val) {
      best_val = cur;
      best = cls;
    }
  }
  res.partition = best;
  res.value = gse_energy(g, j, best);
  res.exact = false;
  res.certificate = "heuristic";
  return res;
}

// ---------------------------------------------------------------------------
// Energies of step kernels.

/// Σ_a J(a) ∫ Π_j f_{a_j}(x_j) U(x) dx for class-constant fractional
/// memberships g[i][a].
template <class T>
T kernel_energy(const StepKernel<Rational>& u, const RealArray& j, const std::vector<std::vector<T>>& g) {
  const std::size_t r = u.r, t = u.t, s = j.s;
  T total = 0;
  for (std::size_t idx = 0; idx < u.values.size(); ++idx) {
    if (u.values[idx] == 0) continue;
    const auto cell = cell_of_index(idx, t, r);
    T m = scalar_from<T>(u.values[idx]);
    for (auto c : cell) m *= scalar_from<T>(u.weights[c]);
    T inner = 0;
    for (std::size_t a = 0; a < j.values.size(); ++a) {
      if (j.values[a] == 0) continue;
      const auto lab = cell_of_index(a, s, r);
      T p = scalar_from<T>(j.values[a]);
      for (std::size_t i = 0; i < r && p != 0; ++i) p *= g[cell[i]][lab[i]];
      inner += p;
    }
    total += m * inner;
  }
  return total;
}

namespace detail {

/// kernel_energy in doubles with the kernel masses and J flattened once.
class FastKernelEnergy {
 public:
  FastKernelEnergy(const StepKernel<Rational>& u, const RealArray& j) : r_(u.r) {
    for (std::size_t idx = 0; idx < u.values.size(); ++idx) {
      if (u.values[idx] == 0) continue;
      const auto cell = cell_of_index(idx, u.t, u.r);
      Rational m = u.values[idx];
      for (auto c : cell) m *= u.weights[c];
      cells_.insert(cells_.end(), cell.begin(), cell.end());
      mass_.push_back(m.get_d());
    }
    for (std::size_t a = 0; a < j.values.size(); ++a) {
      if (j.values[a] == 0) continue;
      const auto lab = cell_of_index(a, j.s, j.r);
      labels_.insert(labels_.end(), lab.begin(), lab.end());
      jv_.push_back(j.values[a].get_d());
    }
  }

  double operator()(const std::vector<std::vector<double>>& g) const {
    double total = 0;
    for (std::size_t c = 0; c < mass_.size(); ++c) {
      const std::size_t* cell = &cells_[c * r_];
      double inner = 0;
      for (std::size_t a = 0; a < jv_.size(); ++a) {
        const std::size_t* lab = &labels_[a * r_];
        double p = jv_[a];
        for (std::size_t i = 0; i < r_; ++i) p *= g[cell[i]][lab[i]];
        inner += p;
      }
      total += mass_[c] * inner;
    }
    return total;
  }

 private:
  std::size_t r_;
  std::vector<std::size_t> cells_, labels_;
  std::vector<double> mass_, jv_;
};

}  // namespace detail

enum class KernelGseMode { vertex, fractional };

struct KernelGseResult {
  Rational value = 0;                        // energy at the returned memberships
  double upper = 0;                          // certified upper bound (fractional grid) or value
  std::vector<std::vector<Rational>> memberships;
  std::string certificate;                   // "exact", "grid", "heuristic"
};

struct KernelGseOptions {
  std::size_t grid = 0;  // resolution R; 0 picks one from the budget
  std::uint64_t grid_budget = std::uint64_t{1} << 20;
  std::size_t restarts = 32;
  std::uint64_t seed = 1;
};

/// Γ(U, J). Because the r coordinates are independent, only the per-class
/// averages of a fractional partition matter, so the maximum runs over one
/// simplex point per class. Vertex mode takes each class whole into one part
/// (exact enumeration). Fractional mode searches a joint grid of step 1/R
/// when it fits the budget, which certifies value ≤ Γ ≤ value + r·(s/R)·
/// max|J|·‖U‖_∞, and falls back to multistart coordinate ascent otherwise.
inline KernelGseResult gse_kernel(const StepKernel<Rational>& u, const RealArray& j,
                                  KernelGseMode mode = KernelGseMode::fractional,
                                  const KernelGseOptions& opt = {}) {
  if (u.r != j.r) throw InvalidArgument("kernel and array differ in r");
  const std::size_t t = u.t, s = j.s, r = u.r;
  KernelGseResult res;
  if (mode == KernelGseMode::vertex) {
    check_guard(sat_pow(s, t), default_guards().enumeration, "gse_kernel");
    bool first = true;
    std::vector<std::vector<Rational>> g(t, std::vector<Rational>(s, Rational(0)));
    for_each_tuple(s, t, [&](std::span<const std::size_t> a) {
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t b = 0; b < s; ++b) g[i][b] = a[i] == b ? 1 : 0;
      const Rational v = kernel_energy(u, j, g);
      if (first || v > res.value) {
        res.value = v;
        res.memberships = g;
        first = false;
      }
    });
    res.upper = res.value.get_d();
    res.certificate = "exact";
    return res;
  }

  // simplex grid points with denominators R
  auto simplex_points = [&](std::size_t R) {
    std::vector<std::vector<std::size_t>> pts;
    std::vector<std::size_t> cur(s);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
      if (pos + 1 == s) {
        cur[pos] = left;
        pts.push_back(cur);
        return;
      }
      for (std::size_t x = 0; x <= left; ++x) {
        cur[pos] = x;
        self(self, pos + 1, left - x);
      }
    };
    rec(rec, 0, R);
    return pts;
  };

  std::size_t R = opt.grid;
  if (R == 0) {
    R = 1;
    for (std::size_t cand = 2; cand <= 4096; ++cand) {
      const std::uint64_t per = binomial(cand + s - 1, s - 1);
      if (sat_pow(per, t) > opt.grid_budget) break;
      R = cand;
    }
  }
  const std::uint64_t per = binomial(R + s - 1, s - 1);
  const double usup = u.sup_norm().get_d();
  const double jmax = j.sup_norm().get_d();
  const detail::FastKernelEnergy fast(u, j);
  std::vector<std::vector<double>> gd(t, std::vector<double>(s, 0.0));
  std::vector<std::vector<std::size_t>> best_idx(t, std::vector<std::size_t>(s, 0));
  double best = -std::numeric_limits<double>::infinity();
  if (sat_pow(per, t) <= opt.grid_budget && R >= 2) {
    const auto pts = simplex_points(R);
    for_each_tuple(pts.size(), t, [&](std::span<const std::size_t> pick) {
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t b = 0; b < s; ++b) gd[i][b] = static_cast<double>(pts[pick[i]][b]) / static_cast<double>(R);
      const double v = fast(gd);
      if (v > best) {
        best = v;
        for (std::size_t i = 0; i < t; ++i) best_idx[i] = pts[pick[i]];
      }
    });
    res.memberships.assign(t, std::vector<Rational>(s));
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t b = 0; b < s; ++b)
        res.memberships[i][b] = ratio(static_cast<unsigned long>(best_idx[i][b]), static_cast<unsigned long>(R));
    res.value = kernel_energy(u, j, res.memberships);
    res.upper = res.value.get_d() + static_cast<double>(r) * static_cast<double>(s) / static_cast<double>(R) * jmax * usup;
    res.certificate = "grid";
    return res;
  }

  // coordinate ascent: one class at a time over its own simplex grid
  const std::size_t R1 = 64;
  const auto pts = simplex_points(R1);
  std::vector<std::vector<double>> best_g;
  for (std::size_t rs = 0; rs < std::max<std::size_t>(opt.restarts, 1); ++rs) {
    Rng rng(derive_seed(opt.seed, rs));
    for (auto& row : gd) {
      const auto& p = pts[uniform_index(rng, pts.size())];
      for (std::size_t b = 0; b < s; ++b) row[b] = static_cast<double>(p[b]) / R1;
    }
    double cur = fast(gd);
    for (std::size_t round = 0; round < 100; ++round) {
      bool improved = false;
      for (std::size_t i = 0; i < t; ++i) {
        auto keep = gd[i];
        for (const auto& p : pts) {
          for (std::size_t b = 0; b < s; ++b) gd[i][b] = static_cast<double>(p[b]) / R1;
          const double v = fast(gd);
          if (v > cur + 1e-12) {
            cur = v;
            keep = gd[i];
            improved = true;
          }
        }
        gd[i] = keep;
      }
      if (!improved) break;
    }
    if (cur > best) {
      best = cur;
      best_g = gd;
    }
  }
  res.memberships.assign(t, std::vector<Rational>(s));
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t b = 0; b < s; ++b) res.memberships[i][b] = parse_rational(scalar_text(best_g[i][b]));
  // rows are multiples of 1/R1, so the decimal round trip is exact up to
  // representation; renormalise the last entry to keep rows on the simplex
  for (auto& row : res.memberships) {
    Rational sum = 0;
    for (std::size_t b = 0; b + 1 < s; ++b) sum += row[b];
    row[s - 1] = 1 - sum;
  }
  res.value = kernel_energy(u, j, res.memberships);
  if (sat_pow(s, t) <= opt.grid_budget) {
    auto vert = gse_kernel(u, j, KernelGseMode::vertex, opt);
    if (vert.value > res.value) {
      res.value = vert.value;
      res.memberships = std::move(vert.memberships);
    }
  }
  res.upper = std::numeric_limits<double>::infinity();
  res.certificate = "heuristic";
  return res;
}

/// Γ̂ of the weighted sample H(q, U). Its diagonal is zero, so the energy is
/// multilinear in per-point memberships and the optimum sits on integer
/// assignments; points of one class are interchangeable, so only the counts
/// m[i][a] of class-i points put into part a matter.
inline GseResult gse_of_sample(const StepKernel<Rational>& u, const RealArray& j, const KernelSample& smp,
                               std::uint64_t guard = default_guards().enumeration) {
  const std::size_t t = u.t, s = j.s, r = u.r;
  std::uint64_t total = 1;
  for (auto n : smp.counts) total = sat_mul(total, binomial(n + s - 1, s - 1));
  check_guard(total, guard, "gse_of_sample");
  // per class, all compositions of n_i into s parts
  std::vector<std::vector<std::vector<std::size_t>>> comps(t);
  for (std::size_t i = 0; i < t; ++i) {
    std::vector<std::size_t> cur(s);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
      if (pos + 1 == s) {
        cur[pos] = left;
        comps[i].push_back(cur);
        return;
      }
      for (std::size_t x = 0; x <= left; ++x) {
        cur[pos] = x;
        self(self, pos + 1, left - x);
      }
    };
    rec(rec, 0, smp.counts[i]);
  }
  // coefficient table: cell of (class, part) pairs -> U·J
  const std::size_t ts = t * s;
  std::vector<double> coef(ipow(ts, r), 0.0);
  std::vector<Rational> coef_exact(coef.size(), Rational(0));
  std::vector<std::size_t> uc(r), jc(r);
  for (std::size_t idx = 0; idx < coef.size(); ++idx) {
    const auto pc = cell_of_index(idx, ts, r);
    for (std::size_t i = 0; i < r; ++i) {
      uc[i] = pc[i] / s;
      jc[i] = pc[i] % s;
    }
    coef_exact[idx] = u.values[cell_index(uc, t)] * j.at(jc);
    coef[idx] = coef_exact[idx].get_d();
  }
  std::vector<std::size_t> m(ts);
  // nonzero coefficients with their (class, part) tuples, flattened
  std::vector<double> nz_coef;
  std::vector<std::size_t> nz_cells;
  for (std::size_t idx = 0; idx < coef.size(); ++idx) {
    if (coef[idx] == 0) continue;
    nz_coef.push_back(coef[idx]);
    const auto pc = cell_of_index(idx, ts, r);
    nz_cells.insert(nz_cells.end(), pc.begin(), pc.end());
  }
  std::vector<std::size_t> used(ts, 0);
  auto energy_d = [&]() {
    double e = 0;
    for (std::size_t c = 0; c < nz_coef.size(); ++c) {
      const std::size_t* pc = nz_cells.data() + c * r;
      double cnt = 1;
      for (std::size_t i = 0; i < r && cnt != 0; ++i) {
        const std::size_t have = m[pc[i]];
        cnt = have <= used[pc[i]] ? 0 : cnt * static_cast<double>(have - used[pc[i]]);
        ++used[pc[i]];
      }
      for (std::size_t i = 0; i < r; ++i) used[pc[i]] = 0;
      e += nz_coef[c] * cnt;
    }
    return e;
  };
  auto energy_exact = [&]() -> Rational {
    Rational e = 0;
    std::vector<std::size_t> used(ts, 0);
    for (std::size_t idx = 0; idx < coef.size(); ++idx) {
      if (coef_exact[idx] == 0) continue;
      const auto pc = cell_of_index(idx, ts, r);
      Rational cnt = 1;
      std::fill(used.begin(), used.end(), 0);
      for (auto p : pc) {
        const std::size_t have = m[p];
        if (have <= used[p]) {
          cnt = 0;
          break;
        }
        cnt *= static_cast<unsigned long>(have - used[p]);
        ++used[p];
      }
      e += coef_exact[idx] * cnt;
    }
    return e / detail::n_pow(smp.q(), r);
  };
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_m;
  std::vector<std::size_t> pick(t, 0);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == t) {
      const double e = energy_d();
      if (e > best) {
        best = e;
        best_m = m;
      }
      return;
    }
    for (const auto& c : comps[i]) {
      for (std::size_t a = 0; a < s; ++a) m[i * s + a] = c[a];
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  m = best_m;
  GseResult res;
  res.value = energy_exact();
  // a concrete partition: points of class i filled into parts in order
  std::vector<std::size_t> left = best_m;
  res.partition.resize(smp.q());
  for (std::size_t v = 0; v < smp.q(); ++v) {
    const std::size_t i = smp.classes[v];
    std::size_t a = 0;
    while (left[i * s + a] == 0) ++a;
    --left[i * s + a];
    res.partition[v] = a;
  }
  res.exact = true;
  res.certificate = "exact";
  return res;
}

struct GseSamplingReport {
  Rational gamma;        // Γ(U,J) lower end (value at the grid maximiser)
  double gamma_upper = 0;
  std::string gamma_certificate;
  double threshold = 0;  // δ ‖U‖_∞
  std::size_t q = 0;
  std::size_t trials = 0;
  std::size_t deviations = 0;
  double rate = 0;
  double std_error = 0;
  double bound = 0;  // 2 exp(-δ² q / (8 r²))
  double max_deviation = 0;
  bool guaranteed_regime = false;
  bool violation = false;
};

/// Frequency of |Γ(U,J) − Γ̂(H(q,U),J)| > δ‖U‖_∞. When Γ is only bracketed
/// the larger of the two possible deviations is counted, so the rate is an
/// upper estimate.
inline GseSamplingReport gse_sampling_check(const StepKernel<Rational>& u, const RealArray& j, std::size_t q,
                                            double delta, std::size_t trials, std::uint64_t seed,
                                            const KernelGseOptions& kopt = {}) {
  if (!(delta > 0)) throw InvalidArgument("delta must be positive");
  GseSamplingReport rep;
  const auto g = gse_kernel(u, j, KernelGseMode::fractional, kopt);
  rep.gamma = g.value;
  rep.gamma_upper = g.upper;
  rep.gamma_certificate = g.certificate;
  rep.threshold = delta * u.sup_norm().get_d();
  rep.q = q;
  rep.trials = trials;
  const double rr = static_cast<double>(u.r);
  rep.bound = 2 * std::exp(-delta * delta * static_cast<double>(q) / (8 * rr * rr));
  rep.guaranteed_regime = static_cast<double>(q) >= theta_bound(u.r, j.s, parse_rational(scalar_text(delta))).q_min;
  const double lo = g.value.get_d();
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, i));
    const auto smp = draw_kernel_sample(u.weights, q, rng);
    const double hat = gse_of_sample(u, j, smp).value.get_d();
    const double dev = std::max(std::fabs(lo - hat), std::fabs(g.upper - hat));
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > rep.threshold) ++rep.deviations;
  }
  rep.rate = static_cast<double>(rep.deviations) / static_cast<double>(std::max<std::size_t>(trials, 1));
  rep.std_error = std::sqrt(rep.rate * (1 - rep.rate) / static_cast<double>(std::max<std::size_t>(trials, 1)));
  rep.violation = rep.rate > rep.bound + 3 * rep.std_error;
  return rep;
}

// ---------------------------------------------------------------------------
// Generalized ground state energy over partitions of (r-1)-subsets.

/// Energy Σ_α (1/n^r) Σ over ordered r-tuples spanning an α-edge of
/// J^α(class of the tuple minus u_1, …, class of the tuple minus u_r).
/// `cls` is indexed by colex rank of the (r-1)-subset.
inline Rational ggse_energy(const ColoredHypergraph& h, const std::vector<RealArray>& js,
                            const std::vector<std::size_t>& cls) {
  const std::size_t r = h.r();
  if (js.size() != h.k()) throw InvalidArgument("need one array per colour");
  Rational total = 0;
  std::vector<std::size_t> perm(r), c(r), rest;
  for_each_subset(h.n(), r, [&](std::span<const std::size_t> e) {
    const Color a = h.color(e);
    const RealArray& j = js[a];
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      for (std::size_t pos = 0; pos < r; ++pos) {
        rest.clear();
        for (std::size_t i = 0; i < r; ++i)
          if (i != perm[pos]) rest.push_back(e[i]);
        c[pos] = cls[colex_rank(rest)];
      }
      total += j.at(c);
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
  return total / detail::n_pow(h.n(), r);
}

inline GseResult ggse(const ColoredHypergraph& h, const std::vector<RealArray>& js, std::size_t t,
                      GseMode mode = GseMode::exact, const LocalSearchOptions& opt = {},
                      std::uint64_t guard = default_guards().enumeration) {
  const std::size_t r = h.r(), n = h.n();
  if (r < 2) throw InvalidArgument("ggse needs r >= 2");
  if (js.size() != h.k()) throw InvalidArgument("need one array per colour");
  for (const auto& j : js) {
    if (j.r != r || j.s != t) throw InvalidArgument("arrays must be r-dimensional of side t");
    if (j.sup_norm() > 1) throw RangeError("arrays must satisfy |J| <= 1");
  }
  const std::size_t sets = static_cast<std::size_t>(binomial(n, r - 1));
  // precompute for each (edge, ordering) the list of (r-1)-set ranks
  struct Term {
    std::size_t color;
    std::vector<std::size_t> ranks;
  };
  std::vector<Term> terms;
  std::vector<std::vector<std::size_t>> touching(sets);
  std::vector<std::size_t> perm(r), rest;
  for_each_subset(n, r, [&](std::span<const std::size_t> e) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      Term tm{h.color(e), std::vector<std::size_t>(r)};
      for (std::size_t pos = 0; pos < r; ++pos) {
        rest.clear();
        for (std::size_t i = 0; i < r; ++i)
          if (i != perm[pos]) rest.push_back(e[i]);
        tm.ranks[pos] = colex_rank(rest);
      }
      for (auto rk : tm.ranks) touching[rk].push_back(terms.size());
      terms.push_back(std::move(tm));
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
  std::vector<std::vector<double>> jd(js.size());
  for (std::size_t a = 0; a < js.size(); ++a)
    for (const auto& v : js[a].values) jd[a].push_back(v.get_d());
  std::vector<std::size_t> c(r);
  auto term_val = [&](std::size_t ti, const std::vector<std::size_t>& cls) {
    const auto& tm = terms[ti];
    for (std::size_t pos = 0; pos < r; ++pos) c[pos] = cls[tm.ranks[pos]];
    return jd[tm.color][cell_index(c, t)];
  };
  GseResult res;
  if (mode == GseMode::exact) {
    check_guard(sat_pow(t, sets), guard, "ggse");
    std::vector<std::size_t> cls(sets, 0), best;
    Rational best_exact;
    double best_val = -std::numeric_limits<double>::infinity();
    for_each_tuple(t, sets, [&](std::span<const std::size_t> a) {
      cls.assign(a.begin(), a.end());
      double v = 0;
      for (std::size_t ti = 0; ti < terms.size(); ++ti) v += term_val(ti, cls);
      if (best.empty() || v > best_val - 1e-9 * (1 + std::fabs(best_val))) {
        const Rational ex = ggse_energy(h, js, cls);
        if (best.empty() || ex > best_exact) {
          best_exact = ex;
          best = cls;
          best_val = v;
        }
      }
    });
    res.value = best_exact;
    res.partition = best;
    res.certificate = "exact";
    return res;
  }
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best;
  for (std::size_t rs = 0; rs < std::max<std::size_t>(opt.restarts, 1); ++rs) {
    Rng rng(derive_seed(opt.seed, rs));
    std::vector<std::size_t> cls(sets);
    for (auto& x : cls) x = uniform_index(rng, t);
    double cur = 0;
    for (std::size_t ti = 0; ti < terms.size(); ++ti) cur += term_val(ti, cls);
    for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      bool moved = false;
      for (std::size_t sidx = 0; sidx < sets; ++sidx) {
        const std::size_t old = cls[sidx];
        double here = 0;
        for (auto ti : touching[sidx]) here += term_val(ti, cls);
        std::size_t arg = old;
        double gain = 0;
        for (std::size_t b = 0; b < t; ++b) {
          if (b == old) continue;
          cls[sidx] = b;
          double there = 0;
          for (auto ti : touching[sidx]) there += term_val(ti, cls);
          if (there - here > gain + 1e-12) {
            gain = there - here;
            arg = b;
          }
        }
        cls[sidx] = arg;
        if (arg != old) {
          cur += gain;
          moved = true;
        }
      }
      if (!moved) break;
    }
    if (cur > best_val) {
      best_val = cur;
      best = cls;
    }
  }
  res.partition = best;
  res.value = ggse_energy(h, js, best);
  res.exact = false;
  res.certificate = "heuristic";
  return res;
}

// ---------------------------------------------------------------------------
// Density tensors.

/// For each level s = 1..r-1, a class in [k] per s-subset (colex order).
struct PartitionFamily {
  std::size_t r = 2;
  std::size_t n = 0;
  std::size_t k = 1;
  std::vector<std::vector<std::size_t>> levels;  // levels[s-1][colex rank]

  std::size_t cls(std::span<const std::size_t> sorted_set) const {
    return levels[sorted_set.size() - 1][colex_rank(sorted_set)];
  }
  static PartitionFamily uniform(std::size_t r, std::size_t n, std::size_t k, std::size_t label = 0) {
    PartitionFamily p{r, n, k, {}};
    for (std::size_t s = 1; s < r; ++s) p.levels.emplace_back(binomial(n, s), label);
    return p;
  }
  friend bool operator==(const PartitionFamily&, const PartitionFamily&) = default;
};

/// ρ^s_i = |P_i(s)|/n^s and μ_φ for every colouring φ of the proper nonempty
/// subsets of [r]. Subsets A are ordered by bitmask (1 .. 2^r - 2) and φ is
/// indexed as Σ_j φ(A_j) k^j.
struct DensityTensor {
  std::size_t r = 2;
  std::size_t k = 1;
  std::vector<std::vector<Rational>> rho;  // rho[s-1][i]
  std::vector<Rational> mu;                // k^{2^r - 2}

  static std::size_t subset_count(std::size_t r) { return (std::size_t{1} << r) - 2; }
  friend bool operator==(const DensityTensor&, const DensityTensor&) = default;
};

namespace detail {

/// The φ index of an ordered tuple u (distinct vertices).
inline std::size_t phi_index(std::span<const std::size_t> u, const PartitionFamily& p) {
  const std::size_t r = u.size();
  std::size_t idx = 0, scale = 1;
  std::vector<std::size_t> a;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << r); ++mask) {
    a.clear();
    for (std::size_t i = 0; i < r; ++i)
      if ((mask >> i) & 1) a.push_back(u[i]);
    std::sort(a.begin(), a.end());
    idx += p.cls(a) * scale;
    scale *= p.k;
  }
  return idx;
}

}  // namespace detail

inline DensityTensor density_tensor_of(const Hypergraph& h, const PartitionFamily& p) {
  const std::size_t r = h.r(), n = h.n(), k = p.k;
  if (p.r != r || p.n != n || p.levels.size() + 1 != r) throw InvalidArgument("partition family does not match H");
  DensityTensor d;
  d.r = r;
  d.k = k;
  for (std::size_t s = 1; s < r; ++s) {
    std::vector<unsigned long> cnt(k, 0);
    for (auto c : p.levels[s - 1]) {
      if (c >= k) throw InvalidColor("partition label outside [k]");
      ++cnt[c];
    }
    std::vector<Rational> row;
    const Rational ns = detail::n_pow(n, s);
    for (auto c : cnt) row.push_back(Rational(c) / ns);
    d.rho.push_back(std::move(row));
  }
  std::vector<unsigned long> mu_cnt(ipow(k, DensityTensor::subset_count(r)), 0);
  // direct n^r enumeration of ordered tuples
  for_each_tuple(n, r, [&](std::span<const std::size_t> u) {
    std::vector<std::size_t> e(u.begin(), u.end());
    std::sort(e.begin(), e.end());
    if (std::adjacent_find(e.begin(), e.end()) != e.end()) return;
    if (!h.has_edge(e)) return;
    ++mu_cnt[detail::phi_index(u, p)];
  });
  const Rational nr = detail::n_pow(n, r);
  for (auto c : mu_cnt) d.mu.push_back(Rational(c) / nr);
  return d;
}

/// Largest deviation over all tensor entries.
inline Rational tensor_distance(const DensityTensor& a, const DensityTensor& b) {
  if (a.r != b.r || a.k != b.k || a.mu.size() != b.mu.size()) throw InvalidArgument("tensors differ in shape");
  Rational m = 0;
  for (std::size_t s = 0; s < a.rho.size(); ++s)
    for (std::size_t i = 0; i < a.k; ++i) m = std::max(m, Rational(abs(a.rho[s][i] - b.rho[s][i])));
  for (std::size_t i = 0; i < a.mu.size(); ++i) m = std::max(m, Rational(abs(a.mu[i] - b.mu[i])));
  return m;
}

/// Depth-first search over partition families for one whose tensor is
/// within `tol` of ψ in every entry. Sets are labelled level by level in
/// colex order, labels tried in increasing order, so the first witness is
/// the lexicographically smallest. Branches are cut as soon as a class
/// size or an edge statistic can no longer land in its window.
inline std::optional<PartitionFamily> satisfies_tensor(const Hypergraph& h, const DensityTensor& psi,
                                                       const Rational& tol,
                                                       std::uint64_t node_guard = default_guards().search_nodes) {
  const std::size_t r = h.r(), n = h.n(), k = psi.k;
  if (psi.r != r || psi.rho.size() + 1 != r || psi.mu.size() != ipow(k, DensityTensor::subset_count(r)))
    throw InvalidArgument("tensor does not match H");
  // global order of the sets to label
  struct Slot {
    std::size_t level;
    std::size_t rank;
  };
  std::vector<Slot> order;
  for (std::size_t s = 1; s < r; ++s)
    for (std::size_t i = 0; i < binomial(n, s); ++i) order.push_back({s, i});
  std::vector<std::size_t> level_start(r, 0);
  for (std::size_t s = 2; s < r; ++s) level_start[s] = level_start[s - 1] + static_cast<std::size_t>(binomial(n, s - 1));
  auto pos_of = [&](std::span<const std::size_t> set) { return level_start[set.size()] + colex_rank(set); };

  // ordered edge tuples, each attached to the slot whose labelling completes it
  std::vector<std::vector<std::vector<std::size_t>>> completes(order.size());
  const auto edges = h.edges();
  std::vector<std::size_t> perm(r), a;
  for (const auto& e : edges) {
    std::size_t last = 0;
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << r); ++mask) {
      a.clear();
      for (std::size_t i = 0; i < r; ++i)
        if ((mask >> i) & 1) a.push_back(e[i]);
      last = std::max(last, pos_of(a));
    }
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      std::vector<std::size_t> u(r);
      for (std::size_t i = 0; i < r; ++i) u[i] = e[perm[i]];
      completes[last].push_back(std::move(u));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  // integer windows: count c is allowed iff |c/n^s - target| ≤ tol
  auto window = [&](const Rational& target, const Rational& scale) {
    const Rational lo = (target - tol) * scale, hi = (target + tol) * scale;
    mpz_class l, u;
    mpz_cdiv_q(l.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
    mpz_fdiv_q(u.get_mpz_t(), hi.get_num_mpz_t(), hi.get_den_mpz_t());
    const long ll = std::max<long>(0, l.fits_slong_p() ? l.get_si() : 0);
    const long uu = u.fits_slong_p() ? u.get_si() : std::numeric_limits<long>::max();
    return std::pair<long, long>{ll, uu};
  };
  std::vector<std::vector<std::pair<long, long>>> rho_win(r);
  for (std::size_t s = 1; s < r; ++s)
    for (std::size_t i = 0; i < k; ++i) rho_win[s].push_back(window(psi.rho[s - 1][i], detail::n_pow(n, s)));
  std::vector<std::pair<long, long>> mu_win;
  for (const auto& m : psi.mu) mu_win.push_back(window(m, detail::n_pow(n, r)));
  for (auto& [lo, hi] : mu_win)
    if (lo > hi) return std::nullopt;
  for (std::size_t s = 1; s < r; ++s)
    for (auto& [lo, hi] : rho_win[s])
      if (lo > hi) return std::nullopt;

  PartitionFamily p = PartitionFamily::uniform(r, n, k);
  std::vector<std::vector<long>> size(r, std::vector<long>(k, 0));
  std::vector<long> mu_cnt(psi.mu.size(), 0);
  std::vector<long> remaining(r, 0);
  for (std::size_t s = 1; s < r; ++s) remaining[s] = static_cast<long>(binomial(n, s));
  // how many edge tuples are still to complete, for the lower windows
  std::vector<long> pending_after(order.size() + 1, 0);
  for (std::size_t i = order.size(); i-- > 0;)
    pending_after[i] = pending_after[i + 1] + static_cast<long>(completes[i].size());
  std::uint64_t nodes = 0;
  bool found = false;

  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (found) return;
    if (++nodes > node_guard) throw GuardExceeded("satisfies_tensor: search exceeds node guard");
    if (pos == order.size()) {
      for (std::size_t i = 0; i < mu_cnt.size(); ++i)
        if (mu_cnt[i] < mu_win[i].first) return;
      found = true;
      return;
    }
    const auto [s, rank] = order[pos];
    --remaining[s];
    for (std::size_t c = 0; c < k && !found; ++c) {
      if (size[s][c] + 1 > rho_win[s][c].second) continue;
      p.levels[s - 1][rank] = c;
      ++size[s][c];
      // every other class must still be able to reach its lower window
      bool ok = true;
      long need = 0;
      for (std::size_t d = 0; d < k; ++d) need += std::max<long>(0, rho_win[s][d].first - size[s][d]);
      if (need > remaining[s]) ok = false;
      std::vector<std::size_t> touched;
      if (ok) {
        for (const auto& u : completes[pos]) {
          const std::size_t idx = detail::phi_index(u, p);
          ++mu_cnt[idx];
          touched.push_back(idx);
          if (mu_cnt[idx] > mu_win[idx].second) ok = false;
        }
      }
      if (ok) {
        // all lower windows must still be reachable with the edges left
        long deficit = 0;
        for (std::size_t i = 0; i < mu_cnt.size(); ++i) deficit += std::max<long>(0, mu_win[i].first - mu_cnt[i]);
        if (deficit > pending_after[pos + 1]) ok = false;
      }
      if (ok) self(self, pos + 1);
      for (auto idx : touched) --mu_cnt[idx];
      --size[s][c];
      if (found) break;
    }
    ++remaining[s];
  };
  rec(rec, 0);
  if (!found) return std::nullopt;
  return p;
}

/// Tester form: searches a uniformly sampled q-vertex induced subgraph.
inline bool satisfies_tensor_sampled(const Hypergraph& h, const DensityTensor& psi, const Rational& tol,
                                     std::size_t q, Rng& rng) {
  const auto sample = sample_q(h, q, rng);
  return satisfies_tensor(sample, psi, tol).has_value();
}

// ---------------------------------------------------------------------------
// Text formats: arrays as "r s" then s^r entries; tensors as "r k", one line
// of k densities per level, then the k^{2^r-2} edge statistics.

inline RealArray read_array(std::istream& in) {
  TokenReader tr(in);
  const auto r = static_cast<std::size_t>(std::max<long long>(0, tr.expect_int("r")));
  const auto s = static_cast<std::size_t>(std::max<long long>(0, tr.expect_int("s")));
  if (r == 0 || s == 0) throw ParseError("array dimensions must be positive", tr.line());
  std::vector<Rational> v;
  for (std::size_t i = 0; i < ipow(s, r); ++i) v.push_back(tr.expect_rational("entry"));
  tr.expect_end();
  return RealArray(r, s, std::move(v));
}

inline void write_array(std::ostream& out, const RealArray& j) {
  out << j.r << ' ' << j.s << '\n';
  for (std::size_t i = 0; i < j.values.size(); ++i)
    out << j.values[i].get_str() << ((i + 1) % j.s == 0 ? '\n' : ' ');
}

inline RealArray load_array(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return read_array(in);
}

inline DensityTensor read_tensor(std::istream& in) {
  TokenReader tr(in);
  DensityTensor d;
  d.r = static_cast<std::size_t>(std::max<long long>(0, tr.expect_int("r")));
  d.k = static_cast<std::size_t>(std::max<long long>(0, tr.expect_int("k")));
  if (d.r < 1 || d.k < 1) throw ParseError("tensor dimensions must be positive", tr.line());
  for (std::size_t s = 1; s < d.r; ++s) {
    std::vector<Rational> row;
    for (std::size_t i = 0; i < d.k; ++i) row.push_back(tr.expect_rational("rho"));
    d.rho.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < ipow(d.k, DensityTensor::subset_count(d.r)); ++i) d.mu.push_back(tr.expect_rational("mu"));
  tr.expect_end();
  return d;
}

inline void write_tensor(std::ostream& out, const DensityTensor& d) {
  out << d.r << ' ' << d.k << '\n';
  for (const auto& row : d.rho) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i].get_str();
    out << '\n';
  }
  for (std::size_t i = 0; i < d.mu.size(); ++i) out << (i ? " " : "") << d.mu[i].get_str();
  out << '\n';
}

}  // namespace hypertest
