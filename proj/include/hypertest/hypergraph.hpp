#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hypertest/common.hpp"

namespace hypertest {

using Color = std::uint16_t;
using Edge = std::vector<std::size_t>;  // strictly increasing vertex ids, 0-based

/// A partition of all r-subsets of [n] into k colour classes. Colours are
/// 0-based internally; the loop colour is never stored because repeated-vertex
/// tuples are not slots.
///
/// Slots are addressed by the colex rank of the sorted r-subset, which keeps
/// full scans contiguous.
class ColoredHypergraph {
 public:
  ColoredHypergraph() = default;
  ColoredHypergraph(std::size_t r, std::size_t n, std::size_t k, Color fill = 0)
      : r_(r), n_(n), k_(k), colors_(static_cast<std::size_t>(binomial(n, r)), fill) {
    if (r == 0) throw InvalidArgument("uniformity r must be >= 1");
    if (k == 0) throw InvalidArgument("colour count k must be >= 1");
    if (fill >= k) throw InvalidColor("fill colour out of range");
  }

  std::size_t r() const { return r_; }
  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t slot_count() const { return colors_.size(); }

  Color color_at(std::size_t rank) const { return colors_[rank]; }
  Color color(std::span<const std::size_t> sorted_edge) const {
    return colors_[colex_rank(sorted_edge)];
  }
  void set_color_at(std::size_t rank, Color c) {
    if (c >= k_) throw InvalidColor("colour " + std::to_string(c) + " outside [0," +
                                    std::to_string(k_) + ")");
    colors_[rank] = c;
  }
  void set_color(std::span<const std::size_t> sorted_edge, Color c) {
    set_color_at(colex_rank(sorted_edge), c);
  }

  const std::vector<Color>& colors() const { return colors_; }

  std::size_t count(Color c) const {
    return static_cast<std::size_t>(std::count(colors_.begin(), colors_.end(), c));
  }

  friend bool operator==(const ColoredHypergraph&, const ColoredHypergraph&) = default;

 private:
  std::size_t r_ = 1;
  std::size_t n_ = 0;
  std::size_t k_ = 1;
  std::vector<Color> colors_;
};

/// Simple r-uniform hypergraph. As a coloured graph it is 2-coloured with
/// colour 0 = edge and colour 1 = non-edge.
class Hypergraph {
 public:
  static constexpr Color kEdge = 0;
  static constexpr Color kNonEdge = 1;

  Hypergraph() = default;
  Hypergraph(std::size_t r, std::size_t n) : g_(r, n, 2, kNonEdge) {}

  static Hypergraph from_colored(const ColoredHypergraph& g, Color edge_color = kEdge) {
    Hypergraph h(g.r(), g.n());
    for (std::size_t i = 0; i < g.slot_count(); ++i)
      if (g.color_at(i) == edge_color) h.g_.set_color_at(i, kEdge);
    return h;
  }

  std::size_t r() const { return g_.r(); }
  std::size_t n() const { return g_.n(); }

  bool has_edge(std::span<const std::size_t> sorted_edge) const {
    return g_.color(sorted_edge) == kEdge;
  }
  bool has_edge_at(std::size_t rank) const { return g_.color_at(rank) == kEdge; }

  void add_edge(std::span<const std::size_t> e) { g_.set_color(checked(e), kEdge); }
  void remove_edge(std::span<const std::size_t> e) { g_.set_color(checked(e), kNonEdge); }
  void toggle_at(std::size_t rank) {
    g_.set_color_at(rank, g_.color_at(rank) == kEdge ? kNonEdge : kEdge);
  }

  std::size_t edge_count() const { return g_.count(kEdge); }

  /// Edges in lexicographic order of their sorted vertex tuples.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for_each_subset(n(), r(), [&](std::span<const std::size_t> s) {
      if (g_.color(s) == kEdge) out.emplace_back(s.begin(), s.end());
    });
    std::sort(out.begin(), out.end());
    return out;
  }

  const ColoredHypergraph& colored() const { return g_; }

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  std::span<const std::size_t> checked(std::span<const std::size_t> e) const {
    if (e.size() != r()) throw InvalidArgument("edge has wrong arity");
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] >= n()) throw InvalidArgument("edge vertex out of range");
      if (i > 0 && e[i - 1] >= e[i]) throw InvalidArgument("edge must be strictly increasing");
    }
    return e;
  }

  ColoredHypergraph g_{1, 0, 2, kNonEdge};
};

/// A k-colouring of a t-coloured graph: refined colours are pairs (a, b)
/// encoded as a * k + b.
struct Coloring {
  ColoredHypergraph base;
  ColoredHypergraph refined;
  std::size_t k = 1;

  static Color encode(Color base_color, Color sub, std::size_t k) {
    return static_cast<Color>(base_color * k + sub);
  }
};

/// Forgets the second colour coordinate.
inline ColoredHypergraph discolor(const ColoredHypergraph& refined, std::size_t k) {
  if (k == 0 || refined.k() % k != 0)
    throw InvalidColor("refined palette of size " + std::to_string(refined.k()) +
                       " is not a product with " + std::to_string(k));
  ColoredHypergraph out(refined.r(), refined.n(), refined.k() / k);
  for (std::size_t i = 0; i < refined.slot_count(); ++i)
    out.set_color_at(i, static_cast<Color>(refined.color_at(i) / k));
  return out;
}

inline ColoredHypergraph discolor(const Coloring& c) {
  if (c.refined.k() != c.base.k() * c.k)
    throw InvalidColor("refined palette does not match [t] x [k]");
  return discolor(c.refined, c.k);
}

inline Coloring make_coloring(const ColoredHypergraph& base, const ColoredHypergraph& refined,
                              std::size_t k) {
  Coloring c{base, refined, k};
  if (discolor(c) != base) throw InvalidColor("refined colouring does not discolour to base");
  return c;
}

/// Restriction to the r-subsets of S, relabelled in increasing vertex order.
inline ColoredHypergraph induced_subgraph(const ColoredHypergraph& g,
                                          std::vector<std::size_t> vertices) {
  std::sort(vertices.begin(), vertices.end());
  if (std::adjacent_find(vertices.begin(), vertices.end()) != vertices.end())
    throw InvalidSample("vertex subset has duplicates");
  if (!vertices.empty() && vertices.back() >= g.n())
    throw InvalidSample("vertex subset out of range");
  if (vertices.size() < g.r())
    throw InvalidSample("subset of size " + std::to_string(vertices.size()) +
                        " smaller than r = " + std::to_string(g.r()));
  ColoredHypergraph out(g.r(), vertices.size(), g.k());
  std::vector<std::size_t> image(g.r());
  for_each_subset(vertices.size(), g.r(), [&](std::span<const std::size_t> s) {
    for (std::size_t i = 0; i < s.size(); ++i) image[i] = vertices[s[i]];
    out.set_color(s, g.color(image));
  });
  return out;
}

inline Hypergraph induced_subgraph(const Hypergraph& g, std::vector<std::size_t> vertices) {
  return Hypergraph::from_colored(induced_subgraph(g.colored(), std::move(vertices)));
}

/// Relabels vertices: vertex v of g becomes perm[v].
inline ColoredHypergraph relabel(const ColoredHypergraph& g, std::span<const std::size_t> perm) {
  ColoredHypergraph out(g.r(), g.n(), g.k());
  std::vector<std::size_t> image(g.r());
  for_each_subset(g.n(), g.r(), [&](std::span<const std::size_t> s) {
    for (std::size_t i = 0; i < s.size(); ++i) image[i] = perm[s[i]];
    std::sort(image.begin(), image.end());
    out.set_color(image, g.color(s));
  });
  return out;
}

inline Hypergraph relabel(const Hypergraph& g, std::span<const std::size_t> perm) {
  return Hypergraph::from_colored(relabel(g.colored(), perm));
}

struct Sample {
  ColoredHypergraph graph;
  std::vector<std::size_t> vertices;  // sorted; sample vertex i is vertices[i]
};

inline Sample sample_q_with_map(const ColoredHypergraph& g, std::size_t q, Rng& rng) {
  if (q > g.n() || q < g.r())
    throw InvalidSample("sample size " + std::to_string(q) + " outside [r, n] = [" +
                        std::to_string(g.r()) + ", " + std::to_string(g.n()) + "]");
  auto vertices = random_subset(rng, g.n(), q);
  auto sub = induced_subgraph(g, vertices);
  return {std::move(sub), std::move(vertices)};
}

/// G(q, G): induced subgraph on a uniformly random q-subset.
inline ColoredHypergraph sample_q(const ColoredHypergraph& g, std::size_t q, Rng& rng) {
  return sample_q_with_map(g, q, rng).graph;
}

inline Hypergraph sample_q(const Hypergraph& g, std::size_t q, Rng& rng) {
  return Hypergraph::from_colored(sample_q(g.colored(), q, rng));
}

/// Visits every k-colouring of g (each slot of base colour a gets a colour
/// (a, b), b in [k]). Only slots whose base colour is flagged in
/// `refined_base_colors` are refined; the others stay at b = 0. An empty mask
/// refines every slot. Return false from `fn` to stop early.
///
/// Throws GuardExceeded when the number of colourings exceeds `guard`.
inline std::uint64_t enumerate_colorings(
    const ColoredHypergraph& g, std::size_t k,
    const std::function<bool(const Coloring&)>& fn,
    std::uint64_t guard = default_guards().enumeration,
    const std::vector<bool>& refined_base_colors = {}) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  std::vector<std::size_t> free_slots;
  for (std::size_t i = 0; i < g.slot_count(); ++i)
    if (refined_base_colors.empty() || refined_base_colors.at(g.color_at(i)))
      free_slots.push_back(i);
  const std::uint64_t total = sat_pow(k, free_slots.size());
  check_guard(total, guard, "enumerate_colorings");

  Coloring c{g, ColoredHypergraph(g.r(), g.n(), g.k() * k), k};
  for (std::size_t i = 0; i < g.slot_count(); ++i)
    c.refined.set_color_at(i, Coloring::encode(g.color_at(i), 0, k));
  std::vector<std::size_t> digits(free_slots.size(), 0);
  std::uint64_t visited = 0;
  while (true) {
    ++visited;
    if (!fn(c)) return visited;
    std::size_t i = 0;
    for (; i < digits.size(); ++i) {
      const std::size_t slot = free_slots[i];
      if (++digits[i] < k) {
        c.refined.set_color_at(slot, Coloring::encode(g.color_at(slot), static_cast<Color>(digits[i]), k));
        break;
      }
      digits[i] = 0;
      c.refined.set_color_at(slot, Coloring::encode(g.color_at(slot), 0, k));
    }
    if (i == digits.size()) return visited;
  }
}

}  // namespace hypertest
