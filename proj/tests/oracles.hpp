#pragma once

// Brute-force reference implementations. They share no code with the
// library beyond the data types and are only meant for tiny inputs.

#include <hypertest/hypergraph.hpp>
#include <hypertest/kernel.hpp>
#include <hypertest/rational.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

using hypertest::ColoredHypergraph;
using hypertest::Hypergraph;
using hypertest::Rational;
using hypertest::StepKernel;

inline Rational cell_mass(const StepKernel<Rational>& w, const std::vector<std::size_t>& cell) {
  Rational m = w.values[hypertest::cell_index(cell, w.t)];
  for (auto c : cell) m *= w.weights[c];
  return m;
}

/// sup over all r-tuples of class subsets, no contraction tricks.
inline Rational cut_star(const StepKernel<Rational>& w) {
  const std::size_t t = w.t, r = w.r;
  Rational best = 0;
  const std::size_t total = hypertest::ipow(std::size_t{1} << t, r);
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> masks(r);
    std::size_t c = code;
    for (auto& m : masks) {
      m = c % (std::size_t{1} << t);
      c >>= t;
    }
    Rational s = 0;
    for (std::size_t idx = 0; idx < w.values.size(); ++idx) {
      auto cell = hypertest::cell_of_index(idx, t, r);
      bool in = true;
      for (std::size_t j = 0; j < r; ++j) in = in && ((masks[j] >> cell[j]) & 1);
      if (in) s += cell_mass(w, cell);
    }
    best = std::max(best, Rational(abs(s)));
  }
  return best;
}

/// sup over all r-tuples of subsets of Σ over Q-cells of |cell integral|.
inline Rational cut_star_P(const StepKernel<Rational>& w, const std::vector<std::size_t>& labels) {
  const std::size_t t = w.t, r = w.r;
  const std::size_t tq = *std::max_element(labels.begin(), labels.end()) + 1;
  Rational best = 0;
  const std::size_t total = hypertest::ipow(std::size_t{1} << t, r);
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> masks(r);
    std::size_t c = code;
    for (auto& m : masks) {
      m = c % (std::size_t{1} << t);
      c >>= t;
    }
    std::vector<Rational> per(hypertest::ipow(tq, r), Rational(0));
    for (std::size_t idx = 0; idx < w.values.size(); ++idx) {
      auto cell = hypertest::cell_of_index(idx, t, r);
      bool in = true;
      std::vector<std::size_t> b(r);
      for (std::size_t j = 0; j < r; ++j) {
        in = in && ((masks[j] >> cell[j]) & 1);
        b[j] = labels[cell[j]];
      }
      if (in) per[hypertest::cell_index(b, tq)] += cell_mass(w, cell);
    }
    Rational s = 0;
    for (auto& p : per) s += abs(p);
    best = std::max(best, s);
  }
  return best;
}

inline Rational boxplus(const StepKernel<Rational>& w) {
  const std::size_t t = w.t, r = w.r;
  Rational best = 0;
  const std::size_t total = hypertest::ipow(std::size_t{1} << t, r);
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> masks(r);
    std::size_t c = code;
    for (auto& m : masks) {
      m = c % (std::size_t{1} << t);
      c >>= t;
    }
    Rational s = 0;
    for (std::size_t idx = 0; idx < w.values.size(); ++idx) {
      auto cell = hypertest::cell_of_index(idx, t, r);
      int sign = 1;
      for (std::size_t j = 0; j < r; ++j) sign *= ((masks[j] >> cell[j]) & 1) ? 1 : -1;
      s += sign * cell_mass(w, cell);
    }
    best = std::max(best, Rational(abs(s)));
  }
  return best;
}

/// t*(K_r², W) by summing over all t^{2r} class assignments.
inline Rational kr2(const StepKernel<Rational>& w) {
  const std::size_t t = w.t, r = w.r;
  Rational total = 0;
  const std::size_t n = hypertest::ipow(t, 2 * r);
  for (std::size_t code = 0; code < n; ++code) {
    auto x = hypertest::cell_of_index(code, t, 2 * r);  // x[2j], x[2j+1] copies of coord j
    Rational p = 1;
    for (auto c : x) p *= w.weights[c];
    for (std::size_t corner = 0; corner < (std::size_t{1} << r); ++corner) {
      std::vector<std::size_t> cell(r);
      for (std::size_t j = 0; j < r; ++j) cell[j] = x[2 * j + ((corner >> j) & 1)];
      p *= w.values[hypertest::cell_index(cell, t)];
    }
    total += p;
  }
  return total;
}

/// t(F,G) averaged over q-subsets S: the fraction of orderings of S under
/// which G[S] reads as F.
inline Rational induced_density(const ColoredHypergraph& f, const ColoredHypergraph& g) {
  const std::size_t q = f.n();
  std::uint64_t subsets = 0, hits = 0, orders = 0;
  hypertest::for_each_subset(g.n(), q, [&](std::span<const std::size_t> s) {
    ++subsets;
    std::vector<std::size_t> perm(q);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      ++orders;
      bool match = true;
      hypertest::for_each_subset(q, f.r(), [&](std::span<const std::size_t> e) {
        std::vector<std::size_t> img;
        for (auto v : e) img.push_back(s[perm[v]]);
        std::sort(img.begin(), img.end());
        if (g.color(img) != f.color(e)) match = false;
      });
      if (match) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
  return hypertest::ratio(static_cast<unsigned long>(hits), static_cast<unsigned long>(orders));
}

/// Homomorphism count by plain n^q enumeration.
inline std::uint64_t hom_count(const Hypergraph& h, const Hypergraph& g) {
  const std::size_t q = h.n(), n = g.n();
  const auto edges = h.edges();
  std::uint64_t count = 0;
  const std::size_t total = hypertest::ipow(n, q);
  for (std::size_t code = 0; code < total; ++code) {
    auto img = hypertest::cell_of_index(code, n, q);
    bool ok = true;
    for (const auto& e : edges) {
      std::vector<std::size_t> im;
      for (auto v : e) im.push_back(img[v]);
      std::sort(im.begin(), im.end());
      if (std::adjacent_find(im.begin(), im.end()) != im.end() || !g.has_edge(im)) {
        ok = false;
        break;
      }
    }
    if (ok) ++count;
  }
  return count;
}

/// Largest cut of a simple graph, by all 2^n vertex 2-colourings.
inline std::size_t maxcut(const Hypergraph& g) {
  std::size_t best = 0;
  const auto edges = g.edges();
  for (std::size_t mask = 0; mask < (std::size_t{1} << g.n()); ++mask) {
    std::size_t cut = 0;
    for (const auto& e : edges)
      if (((mask >> e[0]) & 1) != ((mask >> e[1]) & 1)) ++cut;
    best = std::max(best, cut);
  }
  return best;
}

/// Ground state energy over all s^n vertex assignments, with J given as an
/// s^r array of rationals: (1/n^r) Σ over ordered tuples of distinct vertices
/// spanning an edge of J(classes).
inline Rational gse(const Hypergraph& g, const std::vector<Rational>& j, std::size_t s) {
  const std::size_t n = g.n(), r = g.r();
  Rational best;
  bool first = true;
  const std::size_t total = hypertest::ipow(s, n);
  for (std::size_t code = 0; code < total; ++code) {
    auto cls = hypertest::cell_of_index(code, s, n);
    Rational e = 0;
    const std::size_t tuples = hypertest::ipow(n, r);
    for (std::size_t tc = 0; tc < tuples; ++tc) {
      auto tup = hypertest::cell_of_index(tc, n, r);
      auto sorted = tup;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
      if (!g.has_edge(sorted)) continue;
      std::vector<std::size_t> c(r);
      for (std::size_t i = 0; i < r; ++i) c[i] = cls[tup[i]];
      e += j[hypertest::cell_index(c, s)];
    }
    if (first || e > best) {
      best = e;
      first = false;
    }
  }
  Rational nr(static_cast<long>(hypertest::ipow(n, r)));
  return best / nr;
}

/// Number of maps V(F) -> [n] sending every listed edge onto a genuine r-set
/// of G with the listed colour.
inline std::uint64_t colored_hom_count(std::size_t q, const std::vector<std::vector<std::size_t>>& edges,
                                       const std::vector<hypertest::Color>& colors, const ColoredHypergraph& g) {
  const std::size_t n = g.n();
  std::uint64_t count = 0;
  const std::size_t total = hypertest::ipow(n, q);
  for (std::size_t code = 0; code < total; ++code) {
    auto phi = hypertest::cell_of_index(code, n, q);
    bool ok = true;
    for (std::size_t e = 0; e < edges.size() && ok; ++e) {
      std::vector<std::size_t> img;
      for (auto v : edges[e]) img.push_back(phi[v]);
      std::sort(img.begin(), img.end());
      ok = std::adjacent_find(img.begin(), img.end()) == img.end() && g.color(img) == colors[e];
    }
    if (ok) ++count;
  }
  return count;
}

/// Coloured edge lists equal up to a vertex relabelling.
inline bool isomorphic(std::size_t q, std::vector<std::vector<std::size_t>> ea, std::vector<hypertest::Color> ca,
                       std::vector<std::vector<std::size_t>> eb, std::vector<hypertest::Color> cb) {
  if (ea.size() != eb.size()) return false;
  using Rec = std::pair<std::vector<std::size_t>, hypertest::Color>;
  std::vector<Rec> target;
  for (std::size_t i = 0; i < eb.size(); ++i) {
    std::sort(eb[i].begin(), eb[i].end());
    target.push_back({eb[i], cb[i]});
  }
  std::sort(target.begin(), target.end());
  std::vector<std::size_t> perm(q);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    std::vector<Rec> img;
    for (std::size_t i = 0; i < ea.size(); ++i) {
      std::vector<std::size_t> e;
      for (auto v : ea[i]) e.push_back(perm[v]);
      std::sort(e.begin(), e.end());
      img.push_back({e, ca[i]});
    }
    std::sort(img.begin(), img.end());
    if (img == target) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

/// min |E(G) Δ E(H)| over all H with pred(H), by enumerating every graph on
/// the same vertex set; returns SIZE_MAX if none qualifies.
template <class Pred>
std::size_t edit_distance(const Hypergraph& g, Pred&& pred) {
  const std::size_t slots = g.colored().slot_count();
  std::size_t best = SIZE_MAX;
  for (std::size_t mask = 0; mask < (std::size_t{1} << slots); ++mask) {
    Hypergraph h(g.r(), g.n());
    std::size_t diff = 0;
    for (std::size_t i = 0; i < slots; ++i) {
      const bool e = (mask >> i) & 1;
      if (e) h.toggle_at(i);
      if (e != g.has_edge_at(i)) ++diff;
    }
    if (pred(h)) best = std::min(best, diff);
  }
  return best;
}

/// Triangle test straight from the adjacency relation.
inline bool has_triangle(const Hypergraph& g) {
  for (std::size_t a = 0; a < g.n(); ++a)
    for (std::size_t b = a + 1; b < g.n(); ++b)
      for (std::size_t c = b + 1; c < g.n(); ++c) {
        const std::vector<std::size_t> ab{a, b}, ac{a, c}, bc{b, c};
        if (g.has_edge(ab) && g.has_edge(ac) && g.has_edge(bc)) return true;
      }
  return false;
}

}  // namespace oracle
