#pragma once

#include <map>
#include <string>
#include <vector>

#include "hypertest/hypergraph.hpp"
#include "hypertest/rational.hpp"

namespace hypertest {

/// Exact law of a random k-coloured r-graph on q labelled vertices. Atoms are
/// keyed by the slot colours in colex order. `loop_mass` is the probability
/// of outcomes in which some slot received the loop colour; those outcomes are
/// kept as one extra atom so the law still has total mass one.
struct Distribution {
  std::size_t r = 2;
  std::size_t q = 2;
  std::size_t k = 2;
  std::map<std::vector<Color>, Rational> atoms;
  Rational loop_mass = 0;

  Rational total() const {
    Rational s = loop_mass;
    for (const auto& [key, p] : atoms) s += p;
    return s;
  }

  Rational mass(const ColoredHypergraph& f) const {
    auto it = atoms.find(f.colors());
    return it == atoms.end() ? Rational(0) : it->second;
  }

  /// Law conditioned on avoiding the loop colour.
  Distribution conditioned() const {
    Distribution out = *this;
    out.loop_mass = 0;
    const Rational keep = Rational(1) - loop_mass;
    if (keep == 0) throw InvalidArgument("cannot condition: loop colour has mass one");
    for (auto& [key, p] : out.atoms) p /= keep;
    return out;
  }

  void add(const std::vector<Color>& key, const Rational& p) {
    if (p == 0) return;
    atoms[key] += p;
  }
};

inline void check_same_universe(const Distribution& a, const Distribution& b) {
  if (a.r != b.r || a.q != b.q || a.k != b.k)
    throw InvalidArgument("distributions live on different universes (r, q, k)");
}

inline Rational tv_distance(const Distribution& a, const Distribution& b) {
  check_same_universe(a, b);
  Rational s = abs(a.loop_mass - b.loop_mass);
  auto ia = a.atoms.begin();
  auto ib = b.atoms.begin();
  while (ia != a.atoms.end() || ib != b.atoms.end()) {
    if (ib == b.atoms.end() || (ia != a.atoms.end() && ia->first < ib->first)) {
      s += abs(ia->second);
      ++ia;
    } else if (ia == a.atoms.end() || ib->first < ia->first) {
      s += abs(ib->second);
      ++ib;
    } else {
      s += abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return s / 2;
}

/// A coupling of two laws as a list of (outcome, outcome, mass) triples. An
/// empty key stands for the loop outcome.
struct Coupling {
  struct Entry {
    std::vector<Color> left;
    std::vector<Color> right;
    Rational mass;
  };
  std::vector<Entry> entries;

  Rational disagreement() const {
    Rational s = 0;
    for (const auto& e : entries)
      if (e.left != e.right) s += e.mass;
    return s;
  }
  Rational left_marginal(const std::vector<Color>& key) const {
    Rational s = 0;
    for (const auto& e : entries)
      if (e.left == key) s += e.mass;
    return s;
  }
  Rational right_marginal(const std::vector<Color>& key) const {
    Rational s = 0;
    for (const auto& e : entries)
      if (e.right == key) s += e.mass;
    return s;
  }
};

namespace detail {

inline std::map<std::vector<Color>, Rational> with_loop_atom(const Distribution& d) {
  auto m = d.atoms;
  if (d.loop_mass != 0) m[{}] = d.loop_mass;
  return m;
}

}  // namespace detail

/// Maximal coupling: the common part min(a, b) sits on the diagonal and the
/// residuals are coupled independently, so P(left != right) = d_tv(a, b).
inline Coupling maximal_coupling(const Distribution& a, const Distribution& b) {
  check_same_universe(a, b);
  const auto ma = detail::with_loop_atom(a);
  const auto mb = detail::with_loop_atom(b);
  Coupling c;
  std::vector<std::pair<std::vector<Color>, Rational>> ra, rb;
  for (const auto& [key, p] : ma) {
    auto it = mb.find(key);
    const Rational other = it == mb.end() ? Rational(0) : it->second;
    const Rational common = std::min(p, other);
    if (common > 0) c.entries.push_back({key, key, common});
    if (p > common) ra.emplace_back(key, p - common);
  }
  for (const auto& [key, p] : mb) {
    auto it = ma.find(key);
    const Rational other = it == ma.end() ? Rational(0) : it->second;
    if (p > other) rb.emplace_back(key, p - other);
  }
  const Rational d = tv_distance(a, b);
  if (d > 0)
    for (const auto& [ka, pa] : ra)
      for (const auto& [kb, pb] : rb) c.entries.push_back({ka, kb, pa * pb / d});
  return c;
}

}  // namespace hypertest
