#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include "hypertest/common.hpp"
#include "hypertest/kernel.hpp"
#include "hypertest/kernel_ops.hpp"
#include "hypertest/rational.hpp"

namespace hypertest {

enum class NormMode { exact, ascent };

struct AscentOptions {
  std::size_t restarts = 16;
  std::uint64_t seed = 1;
  std::size_t max_rounds = 200;
};

/// Value of a norm plus the test sets (cut norms) or sign vectors (true = +1,
/// ⊞ norm) attaining it, one per coordinate. `exact` is false when the value
/// is only a lower bound found by ascent.
template <class T>
struct NormResult {
  T value = 0;
  std::vector<std::vector<bool>> witness;
  bool exact = true;
  std::uint64_t evaluations = 0;
};

namespace detail {

/// Adds sign * w_i * (slice i of A along coordinate m) into B at block Q[i].
/// A has shape tq^m x t x t^{rest}; B has shape tq^{m+1} x t^{rest}.
template <class T>
void add_slice(std::vector<T>& b, const std::vector<T>& a, std::size_t i, const std::type_identity_t<T>& coef,
               std::size_t prefix_count, std::size_t t, std::size_t rest, std::size_t tq,
               std::size_t block) {
  for (std::size_t p = 0; p < prefix_count; ++p) {
    const T* src = a.data() + (p * t + i) * rest;
    T* dst = b.data() + (p * tq + block) * rest;
    for (std::size_t x = 0; x < rest; ++x)
      if (src[x] != 0) dst[x] += coef * src[x];
  }
}

/// Contracts coordinate m with a fixed 0/1 or ±1 vector.
template <class T>
std::vector<T> contract(const std::vector<T>& a, std::size_t m, std::size_t r, std::size_t t,
                        const std::vector<T>& w, const CellPartition& q,
                        const std::vector<signed char>& x) {
  const std::size_t tq = q.block_count();
  const std::size_t prefix = ipow(tq, m);
  const std::size_t rest = ipow(t, r - m - 1);
  std::vector<T> b(prefix * tq * rest, T(0));
  for (std::size_t i = 0; i < t; ++i)
    if (x[i] != 0) add_slice(b, a, i, T(x[i]) * w[i], prefix, t, rest, tq, q[i]);
  return b;
}

/// Best choice of the last coordinate inside one block of Q:
/// max over U ⊆ members of Σ_cell |Σ_{j∈U} w_j C[cell][j]|.
template <class T>
std::pair<T, std::vector<std::size_t>> best_in_block(const std::vector<T>& c, std::size_t cells,
                                                     std::size_t t,
                                                     const std::vector<std::size_t>& members,
                                                     const std::vector<T>& w) {
  const std::size_t m = members.size();
  if (cells == 1) {
    T pos = 0, neg = 0;
    for (auto j : members) {
      const T v = w[j] * c[j];
      if (v > 0) pos += v;
      else neg -= v;
    }
    std::vector<std::size_t> u;
    const bool take_pos = !(neg > pos);
    for (auto j : members) {
      const T v = c[j];
      if (take_pos ? v > 0 : v < 0) u.push_back(j);
    }
    return {take_pos ? pos : neg, u};
  }
  T best = -1;
  std::vector<std::size_t> best_u;
  if (cells < 63 && cells <= m) {
    // enumerate cell sign patterns; for fixed signs the optimal U is the
    // positive part
    std::vector<T> col(m);
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << cells); ++s) {
      T val = 0;
      std::vector<std::size_t> u;
      for (std::size_t jj = 0; jj < m; ++jj) {
        const std::size_t j = members[jj];
        T acc = 0;
        for (std::size_t cell = 0; cell < cells; ++cell) {
          const T& v = c[cell * t + j];
          if ((s >> cell) & 1) acc -= v;
          else acc += v;
        }
        if (acc > 0) {
          val += w[j] * acc;
          u.push_back(j);
        }
      }
      if (val > best || (val == best && u < best_u)) {
        best = val;
        best_u = std::move(u);
      }
    }
    return {best, best_u};
  }
  if (m >= 63) throw GuardExceeded("best_in_block: block too large for exact search");
  std::vector<T> sums(cells, T(0));
  std::uint64_t mask = 0;
  auto consider = [&]() {
    T val = 0;
    for (const auto& s : sums) val += scalar_abs(s);
    if (val > best) {
      best = val;
      best_u.clear();
      for (std::size_t jj = 0; jj < m; ++jj)
        if ((mask >> jj) & 1) best_u.push_back(members[jj]);
    }
  };
  consider();
  for (std::uint64_t g = 1; g < (std::uint64_t{1} << m); ++g) {
    const std::size_t bit = static_cast<std::size_t>(std::countr_zero(g));
    mask ^= std::uint64_t{1} << bit;
    const std::size_t j = members[bit];
    const bool added = (mask >> bit) & 1;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const T v = w[j] * c[cell * t + j];
      if (added) sums[cell] += v;
      else sums[cell] -= v;
    }
    consider();
  }
  return {best, best_u};
}

inline std::vector<bool> mask_to_set(std::uint64_t mask, std::size_t t) {
  std::vector<bool> s(t);
  for (std::size_t i = 0; i < t; ++i) s[i] = (mask >> i) & 1;
  return s;
}

/// Exact enumeration engine shared by the cut-* and cut-(*,Q) norms (0/1
/// test vectors) and the ⊞ norm (±1 test vectors, trivial Q only).
template <class T>
NormResult<T> exact_engine(const StepKernel<T>& w, const CellPartition& q, bool signs,
                           std::uint64_t guard) {
  const std::size_t t = w.t, r = w.r, tq = q.block_count();
  check_guard(sat_pow(2, t * (r - 1)), guard, signs ? "boxplus_norm" : "cut_star_norm");
  const auto blocks = blocks_of(q);
  NormResult<T> res;
  res.value = -1;
  std::vector<std::uint64_t> masks(r - 1, 0);

  auto leaf = [&](const std::vector<T>& c) {
    ++res.evaluations;
    const std::size_t cells = ipow(tq, r - 1);
    T val = 0;
    std::vector<bool> last(t, false);
    if (signs) {
      for (std::size_t j = 0; j < t; ++j) {
        val += w.weights[j] * scalar_abs(c[j]);
        last[j] = !(c[j] < 0);
      }
    } else {
      for (const auto& members : blocks) {
        auto [v, u] = best_in_block(c, cells, t, members, w.weights);
        val += v;
        for (auto j : u) last[j] = true;
      }
    }
    if (val < res.value) return;
    std::vector<std::vector<bool>> wit;
    for (auto m : masks) wit.push_back(mask_to_set(m, t));
    wit.push_back(std::move(last));
    if (val > res.value || wit < res.witness) {
      res.value = val;
      res.witness = std::move(wit);
    }
  };

  auto rec = [&](auto&& self, const std::vector<T>& a, std::size_t m) -> void {
    if (m + 1 >= r) {
      leaf(a);
      return;
    }
    const std::size_t prefix = ipow(tq, m);
    const std::size_t rest = ipow(t, r - m - 1);
    std::vector<T> b(prefix * tq * rest, T(0));
    std::uint64_t& mask = masks[m];
    mask = 0;
    if (signs)
      for (std::size_t i = 0; i < t; ++i) add_slice(b, a, i, T(-1) * w.weights[i], prefix, t, rest, tq, q[i]);
    self(self, b, m + 1);
    for (std::uint64_t g = 1; g < (std::uint64_t{1} << t); ++g) {
      const std::size_t bit = static_cast<std::size_t>(std::countr_zero(g));
      mask ^= std::uint64_t{1} << bit;
      const bool on = (mask >> bit) & 1;
      T coef = w.weights[bit];
      if (signs) coef *= 2;
      if (!on) coef = -coef;
      add_slice(b, a, bit, coef, prefix, t, rest, tq, q[bit]);
      self(self, b, m + 1);
    }
    mask = 0;
  };
  rec(rec, w.values, 0);
  // witness masks were recorded per leaf; the enumeration order is Gray code,
  // ties resolved lexicographically above
  res.exact = true;
  return res;
}

/// Per-coordinate best response: coordinate `free` is optimised with all
/// other coordinates fixed. Uses symmetry of W to move it last.
template <class T>
std::vector<T> contract_all_but(const StepKernel<T>& w, const CellPartition& q,
                                const std::vector<std::vector<signed char>>& xs, std::size_t free) {
  std::vector<T> a = w.values;
  std::size_t m = 0;
  for (std::size_t j = 0; j < w.r; ++j) {
    if (j == free) continue;
    a = contract(a, m, w.r, w.t, w.weights, q, xs[j]);
    ++m;
  }
  return a;
}

template <class T>
T evaluate_q_norm_at(const StepKernel<T>& w, const CellPartition& q,
                     const std::vector<std::vector<signed char>>& xs, bool signs) {
  // contract every coordinate except the last, then the last one explicitly
  auto c = contract_all_but(w, q, xs, w.r - 1);
  const std::size_t cells = ipow(q.block_count(), w.r - 1);
  std::vector<T> sums(cells * q.block_count(), T(0));
  for (std::size_t cell = 0; cell < cells; ++cell)
    for (std::size_t j = 0; j < w.t; ++j)
      if (xs[w.r - 1][j] != 0)
        sums[cell * q.block_count() + q[j]] += T(xs[w.r - 1][j]) * w.weights[j] * c[cell * w.t + j];
  T val = 0;
  if (signs) return scalar_abs(sums[0]);
  for (const auto& s : sums) val += scalar_abs(s);
  return val;
}

template <class T>
NormResult<T> ascent_engine(const StepKernel<T>& w, const CellPartition& q, bool signs,
                            const AscentOptions& opt) {
  const std::size_t t = w.t, r = w.r, tq = q.block_count();
  const auto blocks = blocks_of(q);
  const std::size_t cells = ipow(tq, r - 1);
  NormResult<T> res;
  res.value = -1;
  res.exact = false;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(opt.restarts, 1); ++restart) {
    Rng rng(derive_seed(opt.seed, restart));
    std::vector<std::vector<signed char>> xs(r, std::vector<signed char>(t, 1));
    if (restart > 0)
      for (auto& x : xs)
        for (auto& v : x) v = uniform01(rng) < 0.5 ? (signs ? -1 : 0) : 1;
    T current = evaluate_q_norm_at(w, q, xs, signs);
    for (std::size_t round = 0; round < opt.max_rounds; ++round) {
      bool improved = false;
      for (std::size_t j = 0; j < r; ++j) {
        auto c = contract_all_but(w, q, xs, j);
        std::vector<signed char> nx(t, 0);
        if (signs) {
          T s = 0;
          for (std::size_t i = 0; i < t; ++i) s += w.weights[i] * c[i];
          // maximise |Σ x_i w_i c_i|: all signs agree with the sign of the sum
          const bool pos = !(s < 0);
          for (std::size_t i = 0; i < t; ++i) nx[i] = ((c[i] < 0) != pos) ? 1 : -1;
          for (std::size_t i = 0; i < t; ++i) if (c[i] == 0) nx[i] = 1;
        } else {
          for (const auto& members : blocks) {
            std::vector<std::size_t> u;
            if (cells == 1 || (cells < 20 && cells <= members.size()) || members.size() < 20) {
              u = best_in_block(c, cells, t, members, w.weights).second;
            } else {
              // heuristic: follow the current cell signs
              std::vector<T> sums(cells, T(0));
              for (std::size_t cell = 0; cell < cells; ++cell)
                for (auto i : members)
                  if (xs[j][i]) sums[cell] += w.weights[i] * c[cell * t + i];
              for (auto i : members) {
                T acc = 0;
                for (std::size_t cell = 0; cell < cells; ++cell)
                  acc += (sums[cell] < 0 ? T(-1) : T(1)) * c[cell * t + i];
                if (acc > 0) u.push_back(i);
              }
            }
            for (auto i : u) nx[i] = 1;
          }
        }
        auto old = xs[j];
        xs[j] = nx;
        const T val = evaluate_q_norm_at(w, q, xs, signs);
        ++res.evaluations;
        if (val > current) {
          current = val;
          improved = true;
        } else {
          xs[j] = old;
        }
      }
      if (!improved) break;
    }
    if (current > res.value) {
      res.value = current;
      res.witness.clear();
      for (const auto& x : xs) {
        std::vector<bool> s(t);
        for (std::size_t i = 0; i < t; ++i) s[i] = x[i] > 0;
        res.witness.push_back(std::move(s));
      }
    }
  }
  return res;
}

}  // namespace detail

/// ‖W‖_{□,*}: sup over class subsets S_1..S_r of |∫_{S_1×…×S_r} W|.
template <class T>
NormResult<T> cut_star_norm(const StepKernel<T>& w, NormMode mode = NormMode::exact,
                            const AscentOptions& opt = {},
                            std::uint64_t guard = default_guards().enumeration) {
  const auto q = CellPartition::trivial(w.t);
  if (mode == NormMode::exact) return detail::exact_engine(w, q, false, guard);
  return detail::ascent_engine(w, q, false, opt);
}

/// ‖W‖_{□,*,Q}: sup over S_1..S_r of Σ over Q-cells of the absolute
/// cell-restricted integrals. Q partitions the class set.
template <class T>
NormResult<T> cut_star_P_norm(const StepKernel<T>& w, const CellPartition& q,
                              NormMode mode = NormMode::exact, const AscentOptions& opt = {},
                              std::uint64_t guard = default_guards().enumeration) {
  if (q.size() != w.t) throw InvalidArgument("partition does not cover the kernel classes");
  if (mode == NormMode::exact) {
    check_guard(sat_mul(sat_pow(2, w.t * w.r), ipow(q.block_count(), w.r - 1)), guard,
                "cut_star_P_norm");
    return detail::exact_engine(w, q, false, guard);
  }
  return detail::ascent_engine(w, q, false, opt);
}

/// ‖W‖_⊞: sup over ±1 class vectors f_1..f_r of |∫ W f_1⊗…⊗f_r|.
template <class T>
NormResult<T> boxplus_norm(const StepKernel<T>& w, NormMode mode = NormMode::exact,
                           const AscentOptions& opt = {},
                           std::uint64_t guard = default_guards().enumeration) {
  const auto q = CellPartition::trivial(w.t);
  if (mode == NormMode::exact) return detail::exact_engine(w, q, true, guard);
  return detail::ascent_engine(w, q, true, opt);
}

/// ∫_{S_1×…×S_r} W for explicit class subsets.
template <class T>
T box_integral(const StepKernel<T>& w, const std::vector<std::vector<bool>>& sets) {
  T total = 0;
  for (std::size_t idx = 0; idx < w.values.size(); ++idx) {
    auto cell = cell_of_index(idx, w.t, w.r);
    T m = w.values[idx];
    for (std::size_t j = 0; j < w.r && m != 0; ++j) m = sets[j][cell[j]] ? m * w.weights[cell[j]] : T(0);
    total += m;
  }
  return total;
}

/// ∫|W|: bounds every cut-(*,Q) norm from above.
template <class T>
T l1_norm(const StepKernel<T>& w) {
  T total = 0;
  for (std::size_t idx = 0; idx < w.values.size(); ++idx) {
    if (w.values[idx] == 0) continue;
    auto cell = cell_of_index(idx, w.t, w.r);
    T m = scalar_abs(w.values[idx]);
    for (auto c : cell) m *= w.weights[c];
    total += m;
  }
  return total;
}

/// For r = 2: ‖√w W √w‖_op, an upper bound on ‖W‖_{□,*}; a partition with
/// t_Q blocks costs a factor t_Q on the cut-(*,Q) norm.
template <class T>
double spectral_bound(const StepKernel<T>& w) {
  if (w.r != 2) throw InvalidArgument("spectral bound needs r = 2");
  Eigen::MatrixXd m(w.t, w.t);
  for (std::size_t i = 0; i < w.t; ++i)
    for (std::size_t j = 0; j < w.t; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::sqrt(to_double(w.weights[i]) * to_double(w.weights[j])) *
          to_double(w.values[i * w.t + j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double op = es.eigenvalues().cwiseAbs().maxCoeff();
  // slack for rounding in the eigen solve
  return op * (1 + 1e-9) + 1e-12 * static_cast<double>(w.t);
}

/// Rigorous upper bound on sup_{t_Q ≤ tq} ‖W‖_{□,*,Q}.
template <class T>
double cut_P_upper_bound(const StepKernel<T>& w, std::size_t tq) {
  double best = to_double(l1_norm(w)) * (1 + 1e-12);
  if (w.r == 2) best = std::min(best, static_cast<double>(tq) * spectral_bound(w));
  return best;
}

/// t*(K_r², W). The two copies of the last coordinate are independent given
/// the others, so the sum factors into a square.
template <class T>
T kr2_density(const StepKernel<T>& w, std::uint64_t guard = default_guards().enumeration) {
  const std::size_t r = w.r, t = w.t;
  check_guard(sat_mul(sat_pow(t, 2 * (r - 1) + 1), std::uint64_t{1} << (r - 1)), guard, "kr2_density");
  const std::size_t corners = std::size_t{1} << (r - 1);
  T total = 0;
  std::vector<std::size_t> cell(r);
  // pair (a_j, b_j) for each of the first r-1 coordinates
  for_each_assignment(w.weights, 2 * (r - 1), [&](std::span<const std::size_t> ab, const T& p) {
    T inner = 0;
    for (std::size_t j = 0; j < t; ++j) {
      T prod = w.weights[j];
      for (std::size_t corner = 0; corner < corners && prod != 0; ++corner) {
        for (std::size_t i = 0; i + 1 < r; ++i) cell[i] = ab[2 * i + ((corner >> i) & 1)];
        cell[r - 1] = j;
        prod *= w.values[cell_index(cell, t)];
      }
      inner += prod;
    }
    total += p * inner * inner;
  });
  return total;
}

template <class T>
struct Sandwich {
  T tstar = 0;       // t*(K_r², W)
  T lower = 0;       // 2^{-r} t*
  double upper = 0;  // t*^{1/2^r}
  T cut = 0;         // ‖W‖_{□,*}
  bool lower_holds = false;
  bool upper_holds = false;
  bool holds() const { return lower_holds && upper_holds; }
};

/// Lemma bounds 2^{-r} t*(K_r²,W) ≤ ‖W‖_{□,*} ≤ t*(K_r²,W)^{1/2^r}, checked
/// against the exact cut-* norm. The upper side is compared as
/// ‖W‖^{2^r} ≤ t*, which stays exact over the rationals.
template <class T>
Sandwich<T> sandwich_bounds(const StepKernel<T>& w,
                            std::uint64_t guard = default_guards().enumeration) {
  if (w.sup_norm() > 1) throw RangeError("sandwich needs ‖W‖_∞ ≤ 1");
  Sandwich<T> s;
  s.tstar = kr2_density(w, guard);
  T scale = 1;
  for (std::size_t i = 0; i < w.r; ++i) scale /= 2;
  s.lower = s.tstar * scale;
  s.upper = std::pow(to_double(s.tstar), 1.0 / static_cast<double>(std::size_t{1} << w.r));
  s.cut = cut_star_norm(w, NormMode::exact, {}, guard).value;
  T p = s.cut;
  for (std::size_t i = 0; i < w.r; ++i) p *= p;
  if constexpr (is_exact_v<T>) {
    s.lower_holds = s.lower <= s.cut;
    s.upper_holds = p <= s.tstar;
  } else {
    s.lower_holds = s.lower <= s.cut + 1e-9;
    s.upper_holds = s.cut <= s.upper + 1e-9;
  }
  return s;
}

/// Σ_α ‖U^α − V^α‖ on the common refinement of the two kernels, in the cut-*
/// norm, or the cut-(*,Q) norm when Q (a partition of U's classes) is given.
template <class T>
NormResult<T> cut_distance(const ColoredStepKernel<T>& u, const ColoredStepKernel<T>& v,
                           const std::optional<CellPartition>& q = std::nullopt,
                           NormMode mode = NormMode::exact, const AscentOptions& opt = {},
                           std::uint64_t guard = default_guards().enumeration) {
  if (u.r != v.r || u.k != v.k) throw InvalidArgument("kernels differ in r or k");
  auto [pa, pb] = common_refinement(u.weights, v.weights);
  auto ua = relayout(u, pa);
  auto vb = relayout(v, pb);
  std::optional<CellPartition> lifted;
  if (q) {
    if (q->size() != u.t) throw InvalidArgument("partition does not cover U's classes");
    std::vector<std::size_t> labels;
    for (const auto& p : pa) labels.push_back((*q)[p.source]);
    lifted = CellPartition(std::move(labels));
  }
  NormResult<T> total;
  total.value = 0;
  for (std::size_t a = 0; a < u.k; ++a) {
    StepKernel<T> d = ua.component(a);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= vb.values[a][i];
    auto part = lifted ? cut_star_P_norm(d, *lifted, mode, opt, guard)
                       : cut_star_norm(d, mode, opt, guard);
    total.value += part.value;
    total.exact = total.exact && part.exact;
    total.evaluations += part.evaluations;
    total.witness.insert(total.witness.end(), part.witness.begin(), part.witness.end());
  }
  return total;
}

}  // namespace hypertest
