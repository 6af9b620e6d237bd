#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hypertest/density.hpp"
#include "hypertest/kernel.hpp"
#include "hypertest/kernel_ops.hpp"
#include "hypertest/norms.hpp"

namespace hypertest {

/// Canonical code of a coloured pattern: (q, |E|, then the edge list as
/// (sorted vertices…, colour) records in sorted order), minimised over all
/// relabellings of the q vertices. Two patterns are isomorphic iff their
/// codes agree.
inline std::vector<std::size_t> canonical_code(const Pattern& p, Pattern* relabelled = nullptr) {
  const std::size_t q = p.q, r = p.r;
  std::vector<std::size_t> perm(q);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best;
  std::vector<std::size_t> best_perm;
  std::vector<std::vector<std::size_t>> recs(p.edges.size(), std::vector<std::size_t>(r + 1));
  do {
    for (std::size_t e = 0; e < p.edges.size(); ++e) {
      for (std::size_t i = 0; i < r; ++i) recs[e][i] = perm[p.edges[e][i]];
      std::sort(recs[e].begin(), recs[e].begin() + static_cast<std::ptrdiff_t>(r));
      recs[e][r] = p.colors[e];
    }
    std::sort(recs.begin(), recs.end());
    std::vector<std::size_t> code{q, p.edges.size()};
    for (const auto& rec : recs) code.insert(code.end(), rec.begin(), rec.end());
    if (best.empty() || code < best) {
      best = std::move(code);
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (relabelled) {
    relabelled->r = r;
    relabelled->q = q;
    relabelled->edges.clear();
    relabelled->colors.clear();
    for (std::size_t e = 0; e < p.edges.size(); ++e) {
      const std::size_t base = 2 + e * (r + 1);
      relabelled->edges.emplace_back(best.begin() + static_cast<std::ptrdiff_t>(base),
                                     best.begin() + static_cast<std::ptrdiff_t>(base + r));
      relabelled->colors.push_back(static_cast<Color>(best[base + r]));
    }
  }
  return best;
}

/// Readable form of a canonical code, e.g. "v3|0-1:2|1-2:0".
inline std::string pattern_key(const Pattern& p) {
  const auto code = canonical_code(p);
  std::string s = "v" + std::to_string(p.q);
  for (std::size_t e = 0; e < p.edges.size(); ++e) {
    const std::size_t base = 2 + e * (p.r + 1);
    s += '|';
    for (std::size_t i = 0; i < p.r; ++i) {
      if (i) s += '-';
      s += std::to_string(code[base + i]);
    }
    s += ':' + std::to_string(code[base + p.r]);
  }
  return s;
}

/// Any two edges share at most one vertex.
inline bool is_linear(const Pattern& p) {
  for (std::size_t a = 0; a < p.edges.size(); ++a)
    for (std::size_t b = a + 1; b < p.edges.size(); ++b) {
      std::size_t common = 0;
      for (auto v : p.edges[a])
        if (std::find(p.edges[b].begin(), p.edges[b].end(), v) != p.edges[b].end()) ++common;
      if (common > 1) return false;
    }
  return true;
}

/// One representative per isomorphism class of linear r-graphs with between
/// r and size_cap vertices, at least one edge, no isolated vertex, and edges
/// coloured from [colors]. Representatives are in canonical labelling,
/// ordered by canonical code.
inline std::vector<Pattern> linear_patterns(std::size_t r, std::size_t colors, std::size_t size_cap,
                                            std::uint64_t guard = default_guards().enumeration) {
  if (r == 0 || colors == 0) throw InvalidArgument("need r >= 1 and at least one colour");
  std::map<std::vector<std::size_t>, Pattern> out;
  std::uint64_t work = 0;
  for (std::size_t q = r; q <= size_cap; ++q) {
    std::vector<Edge> slots;
    for_each_subset(q, r, [&](std::span<const std::size_t> s) { slots.emplace_back(s.begin(), s.end()); });
    const std::uint64_t perms = factorial(q);
    std::map<std::vector<std::size_t>, Pattern> shapes;
    std::vector<std::size_t> chosen;
    auto shares_two = [&](const Edge& a, const Edge& b) {
      std::size_t common = 0;
      for (auto v : a)
        if (std::binary_search(b.begin(), b.end(), v)) ++common;
      return common > 1;
    };
    auto rec = [&](auto&& self, std::size_t pos) -> void {
      if (pos == slots.size()) {
        if (chosen.empty()) return;
        std::vector<char> covered(q, 0);
        for (auto e : chosen)
          for (auto v : slots[e]) covered[v] = 1;
        if (std::find(covered.begin(), covered.end(), 0) != covered.end()) return;
        work = sat_add(work, perms);
        check_guard(work, guard, "linear_patterns");
        Pattern p{r, q, {}, {}};
        for (auto e : chosen) p.edges.push_back(slots[e]);
        p.colors.assign(p.edges.size(), 0);
        Pattern canon;
        auto code = canonical_code(p, &canon);
        shapes.emplace(std::move(code), std::move(canon));
        return;
      }
      self(self, pos + 1);
      for (auto e : chosen)
        if (shares_two(slots[e], slots[pos])) return;
      chosen.push_back(pos);
      self(self, pos + 1);
      chosen.pop_back();
    };
    rec(rec, 0);
    for (const auto& [code, shape] : shapes) {
      const std::size_t m = shape.edges.size();
      work = sat_add(work, sat_mul(sat_pow(colors, m), perms));
      check_guard(work, guard, "linear_patterns");
      Pattern p = shape;
      for_each_tuple(colors, m, [&](std::span<const std::size_t> cs) {
        for (std::size_t e = 0; e < m; ++e) p.colors[e] = static_cast<Color>(cs[e]);
        Pattern canon;
        auto c = canonical_code(p, &canon);
        out.emplace(std::move(c), std::move(canon));
      });
    }
  }
  std::vector<Pattern> result;
  for (auto& [code, p] : out) result.push_back(std::move(p));
  return result;
}

struct LinearDensityVector {
  std::size_t r = 2;
  std::size_t colors = 0;
  std::size_t size_cap = 0;
  std::vector<Pattern> patterns;
  std::vector<std::string> keys;
  std::vector<Rational> densities;

  std::optional<Rational> find(const std::string& key) const {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i] == key) return densities[i];
    return std::nullopt;
  }
};

namespace detail {

inline LinearDensityVector linear_frame(std::size_t r, std::size_t colors, std::size_t size_cap,
                                        std::uint64_t guard) {
  LinearDensityVector v;
  v.r = r;
  v.colors = colors;
  v.size_cap = size_cap;
  v.patterns = linear_patterns(r, colors, size_cap, guard);
  for (const auto& p : v.patterns) v.keys.push_back(pattern_key(p));
  return v;
}

}  // namespace detail

/// t*(F, G) for every coloured linear F up to size_cap vertices.
inline LinearDensityVector linear_density_vector(const ColoredHypergraph& g, std::size_t size_cap,
                                                 std::uint64_t guard = default_guards().enumeration) {
  auto v = detail::linear_frame(g.r(), g.k(), size_cap, guard);
  for (const auto& p : v.patterns) v.densities.push_back(tstar_density(p, g, guard));
  return v;
}

/// t*(F, W) over the colours a sampled graph can carry (the loop colour is
/// skipped).
inline LinearDensityVector linear_density_vector(const ColoredStepKernel<Rational>& w, std::size_t size_cap,
                                                 std::uint64_t guard = default_guards().enumeration) {
  auto v = detail::linear_frame(w.r, w.real_colors(), size_cap, guard);
  for (const auto& p : v.patterns) v.densities.push_back(tstar_kernel(p, w, guard));
  return v;
}

/// Sums a refined vector (palette [t] x [k]) over the second colour
/// coordinate of every edge, giving the vector of the discoloured graph.
inline LinearDensityVector marginalize(const LinearDensityVector& refined, std::size_t k,
                                       std::uint64_t guard = default_guards().enumeration) {
  if (k == 0 || refined.colors % k != 0) throw InvalidColor("palette is not a product with k");
  auto out = detail::linear_frame(refined.r, refined.colors / k, refined.size_cap, guard);
  std::map<std::string, Rational> lookup;
  for (std::size_t i = 0; i < refined.keys.size(); ++i) lookup[refined.keys[i]] = refined.densities[i];
  for (const auto& p : out.patterns) {
    Rational total = 0;
    Pattern lifted = p;
    for_each_tuple(k, p.edges.size(), [&](std::span<const std::size_t> bs) {
      for (std::size_t e = 0; e < p.edges.size(); ++e)
        lifted.colors[e] = Coloring::encode(p.colors[e], static_cast<Color>(bs[e]), k);
      total += lookup.at(pattern_key(lifted));
    });
    out.densities.push_back(total);
  }
  return out;
}

struct LinearCountingReport {
  Rational distance = 0;  // Σ_α ‖U^α − W^α‖_{□,*} over the real colours
  std::vector<std::string> keys;
  std::vector<Rational> gaps;    // |t*(F,U) − t*(F,W)|
  std::vector<Rational> bounds;  // |E(F)| · distance
  std::size_t violations = 0;
  bool holds() const { return violations == 0; }
};

/// Linear counting lemma: for linear F, |t*(F,U) − t*(F,W)| ≤ |E(F)| ·
/// max_α ‖U^α − W^α‖_{□,*}, checked against the (larger) colour sum with the
/// exact cut-* norm.
inline LinearCountingReport linear_counting_check(const ColoredStepKernel<Rational>& u,
                                                  const ColoredStepKernel<Rational>& w, std::size_t size_cap,
                                                  std::uint64_t guard = default_guards().enumeration) {
  if (u.r != w.r || u.real_colors() != w.real_colors()) throw InvalidArgument("kernels differ in r or palette");
  LinearCountingReport rep;
  auto [ua, wb] = align(u, w);
  for (std::size_t a = 0; a < u.real_colors(); ++a) {
    StepKernel<Rational> d = ua.component(a);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= wb.values[a][i];
    rep.distance += cut_star_norm(d, NormMode::exact, {}, guard).value;
  }
  const auto vu = linear_density_vector(u, size_cap, guard);
  const auto vw = linear_density_vector(w, size_cap, guard);
  for (std::size_t i = 0; i < vu.patterns.size(); ++i) {
    const Rational gap = abs(vu.densities[i] - vw.densities[i]);
    const Rational bound = Rational(static_cast<long>(vu.patterns[i].edges.size())) * rep.distance;
    rep.keys.push_back(vu.keys[i]);
    rep.gaps.push_back(gap);
    rep.bounds.push_back(bound);
    if (gap > bound) ++rep.violations;
  }
  return rep;
}

}  // namespace hypertest
