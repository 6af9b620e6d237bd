#pragma once

#include <cmath>
#include <vector>

#include "hypertest/distribution.hpp"
#include "hypertest/hypergraph.hpp"
#include "hypertest/rational.hpp"

namespace hypertest {

/// Visits every injective map [q] -> [n] (as the image tuple). Returns the
/// number of maps visited.
template <class Fn>
std::uint64_t for_each_injection(std::size_t n, std::size_t q, Fn&& fn) {
  std::vector<std::size_t> image(q);
  std::vector<char> used(n, 0);
  std::uint64_t count = 0;
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == q) {
      ++count;
      fn(std::span<const std::size_t>(image));
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v]) continue;
      used[v] = 1;
      image[pos] = v;
      self(self, pos + 1);
      used[v] = 0;
    }
  };
  rec(rec, 0);
  return count;
}

/// Slot colours (colex order) of the graph pulled back along `image`:
/// slot e of [q] gets G's colour of image(e).
inline void pullback_colors(const ColoredHypergraph& g, std::span<const std::size_t> image,
                            std::vector<Color>& out) {
  const std::size_t q = image.size();
  out.clear();
  std::vector<std::size_t> img(g.r());
  for_each_subset(q, g.r(), [&](std::span<const std::size_t> s) {
    for (std::size_t i = 0; i < s.size(); ++i) img[i] = image[s[i]];
    std::sort(img.begin(), img.end());
    out.push_back(g.color(img));
  });
}

/// Exact law of the labelled sample: q distinct vertices drawn uniformly in
/// random order, slot colours read off G.
inline Distribution sample_distribution(const ColoredHypergraph& g, std::size_t q,
                                        std::uint64_t guard = default_guards().enumeration) {
  if (q > g.n() || q < 1) throw InvalidSample("sample size outside [1, n]");
  check_guard(falling_factorial(g.n(), q), guard, "sample_distribution");
  Distribution d{g.r(), q, g.k(), {}, 0};
  std::map<std::vector<Color>, std::uint64_t> counts;
  std::vector<Color> key;
  const auto total = for_each_injection(g.n(), q, [&](std::span<const std::size_t> image) {
    pullback_colors(g, image, key);
    ++counts[key];
  });
  for (const auto& [k, c] : counts) d.atoms[k] = ratio(c, total);
  return d;
}

/// t(F, G): probability that the labelled q-sample of G equals F.
inline Rational induced_density(const ColoredHypergraph& f, const ColoredHypergraph& g,
                                std::uint64_t guard = default_guards().enumeration) {
  if (f.r() != g.r() || f.k() != g.k()) throw InvalidArgument("F and G differ in r or k");
  if (f.n() > g.n()) throw InvalidSample("F has more vertices than G");
  if (f.n() == 0) return 1;
  check_guard(falling_factorial(g.n(), f.n()), guard, "induced_density");
  std::uint64_t hits = 0;
  std::vector<Color> key;
  const auto total = for_each_injection(g.n(), f.n(), [&](std::span<const std::size_t> image) {
    pullback_colors(g, image, key);
    if (key == f.colors()) ++hits;
  });
  return ratio(hits, total);
}

inline Rational induced_density(const Hypergraph& f, const Hypergraph& g,
                                std::uint64_t guard = default_guards().enumeration) {
  return induced_density(f.colored(), g.colored(), guard);
}

struct Estimate {
  double value = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
};

/// Monte Carlo estimate of t(F, G) with its binomial standard error.
inline Estimate induced_density_mc(const ColoredHypergraph& f, const ColoredHypergraph& g,
                                   std::uint64_t samples, Rng& rng) {
  if (f.n() > g.n()) throw InvalidSample("F has more vertices than G");
  if (samples == 0) throw InvalidArgument("need at least one sample");
  std::uint64_t hits = 0;
  std::vector<Color> key;
  std::vector<std::size_t> image;
  for (std::uint64_t s = 0; s < samples; ++s) {
    image = random_subset(rng, g.n(), f.n());
    std::shuffle(image.begin(), image.end(), rng);
    pullback_colors(g, image, key);
    if (key == f.colors()) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(samples)), samples};
}

// ---------------------------------------------------------------------------
// Homomorphism-type densities.

/// A coloured pattern on q vertices: edges that must carry the given colours.
/// Slots not listed are unconstrained.
struct Pattern {
  std::size_t r = 2;
  std::size_t q = 0;
  std::vector<Edge> edges;
  std::vector<Color> colors;
};

inline Pattern pattern_of(const Hypergraph& h) {
  Pattern p{h.r(), h.n(), h.edges(), {}};
  p.colors.assign(p.edges.size(), Hypergraph::kEdge);
  return p;
}

/// Every slot of F with its colour.
inline Pattern pattern_of(const ColoredHypergraph& f) {
  Pattern p{f.r(), f.n(), {}, {}};
  for_each_subset(f.n(), f.r(), [&](std::span<const std::size_t> s) {
    p.edges.emplace_back(s.begin(), s.end());
    p.colors.push_back(f.color(s));
  });
  return p;
}

/// Number of maps [q] -> [n] under which every pattern edge lands on a
/// genuine r-set of G with the required colour. Repeated vertices inside an
/// edge hit the diagonal, which carries the loop colour and never matches.
inline std::uint64_t hom_count(const Pattern& p, const ColoredHypergraph& g,
                               std::uint64_t guard = default_guards().enumeration) {
  if (p.r != g.r()) throw InvalidArgument("pattern and graph differ in r");
  check_guard(sat_pow(g.n(), p.q), guard, "hom_count");
  // edges grouped by their largest vertex so each is checked once its
  // vertices are all placed
  std::vector<std::vector<std::size_t>> closing(p.q);
  for (std::size_t e = 0; e < p.edges.size(); ++e) closing[p.edges[e].back()].push_back(e);
  std::vector<std::size_t> image(p.q);
  std::vector<std::size_t> img(p.r);
  std::uint64_t count = 0;
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == p.q) {
      ++count;
      return;
    }
    for (std::size_t v = 0; v < g.n(); ++v) {
      image[pos] = v;
      bool ok = true;
      for (std::size_t e : closing[pos]) {
        for (std::size_t i = 0; i < p.r; ++i) img[i] = image[p.edges[e][i]];
        std::sort(img.begin(), img.end());
        if (std::adjacent_find(img.begin(), img.end()) != img.end() ||
            g.color(img) != p.colors[e]) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return count;
}

/// t*(H, G) = t*(H, W_G): homomorphism count over n^q.
inline Rational tstar_density(const Pattern& p, const ColoredHypergraph& g,
                              std::uint64_t guard = default_guards().enumeration) {
  if (p.q == 0) return 1;
  mpz_class denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), g.n(), p.q);
  Rational out(mpz_class(static_cast<unsigned long>(hom_count(p, g, guard))), denom);
  out.canonicalize();
  return out;
}

inline Rational tstar_density(const Hypergraph& h, const Hypergraph& g,
                              std::uint64_t guard = default_guards().enumeration) {
  return tstar_density(pattern_of(h), g.colored(), guard);
}

/// t*(H, G) for a simple pattern against colour `edge_color` of a coloured G.
inline Rational tstar_density(const Hypergraph& h, const ColoredHypergraph& g, Color edge_color,
                              std::uint64_t guard = default_guards().enumeration) {
  auto p = pattern_of(h);
  p.colors.assign(p.edges.size(), edge_color);
  return tstar_density(p, g, guard);
}

}  // namespace hypertest
