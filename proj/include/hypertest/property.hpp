#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypertest/common.hpp"
#include "hypertest/hypergraph.hpp"
#include "hypertest/rational.hpp"

namespace hypertest {

using PropertyOracle = std::function<bool(const Hypergraph&)>;

// ---------------------------------------------------------------------------
// Named properties

inline bool is_edgeless(const Hypergraph& g) { return g.edge_count() == 0; }

inline bool is_complete(const Hypergraph& g) { return g.edge_count() == g.colored().slot_count(); }

/// No r+1 vertices all of whose r-subsets are edges (triangle-free at r = 2).
inline bool is_clique_free(const Hypergraph& g) {
  const std::size_t r = g.r();
  bool found = false;
  std::vector<std::size_t> sub(r);
  for_each_subset(g.n(), r + 1, [&](std::span<const std::size_t> s) {
    if (found) return;
    for (std::size_t skip = 0; skip <= r; ++skip) {
      std::size_t j = 0;
      for (std::size_t i = 0; i <= r; ++i)
        if (i != skip) sub[j++] = s[i];
      if (!g.has_edge(sub)) return;
    }
    found = true;
  });
  return !found;
}

/// Vertices 2-colourable with no monochromatic edge (bipartite at r = 2).
inline bool is_two_colorable(const Hypergraph& g) {
  const std::size_t n = g.n();
  if (n <= 1) return true;
  if (n > 30) throw GuardExceeded("two-colourability check limited to 30 vertices");
  const auto edges = g.edges();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    bool ok = true;
    for (const auto& e : edges) {
      const auto side = [&](std::size_t v) { return (mask >> v) & 1; };
      bool mono = true;
      for (auto v : e) mono = mono && side(v) == side(e[0]);
      if (mono) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

inline std::vector<std::string> property_names() {
  return {"edgeless", "complete", "triangle-free", "bipartite"};
}

inline PropertyOracle property_by_name(const std::string& name) {
  if (name == "edgeless") return is_edgeless;
  if (name == "complete") return is_complete;
  if (name == "triangle-free" || name == "clique-free") return is_clique_free;
  if (name == "bipartite" || name == "two-colorable") return is_two_colorable;
  throw InvalidArgument("unknown property '" + name + "'");
}

// ---------------------------------------------------------------------------
// Edit distance

struct EditDistanceResult {
  Rational lower = 0;
  std::optional<Rational> upper;  // empty when no member of P was found
  bool exact = false;
  std::size_t edits = 0;           // when exact
  std::size_t radius_searched = 0;
  std::optional<Hypergraph> nearest;
};

/// d₁(G, P) = min edits / n^r. Radius 0, 1, … up to `radius_cap` is searched
/// exhaustively; past the cap the result is a bracket whose upper end comes
/// from the edgeless and complete graphs when they lie in P.
inline EditDistanceResult edit_distance_to_property(const Hypergraph& g, const PropertyOracle& p,
                                                    std::size_t radius_cap = default_guards().edit_radius,
                                                    std::uint64_t guard = default_guards().enumeration) {
  const std::size_t slots = g.colored().slot_count();
  mpz_class denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), g.n(), g.r());
  auto normalized = [&](std::size_t edits) {
    Rational x(mpz_class(static_cast<unsigned long>(edits)), denom);
    x.canonicalize();
    return x;
  };
  EditDistanceResult res;
  std::uint64_t work = 0;
  Hypergraph h = g;
  for (std::size_t d = 0; d <= std::min(radius_cap, slots); ++d) {
    work = sat_add(work, binomial(slots, d));
    check_guard(work, guard, "edit_distance_to_property");
    bool hit = false;
    for_each_subset(slots, d, [&](std::span<const std::size_t> s) {
      if (hit) return;
      for (auto i : s) h.toggle_at(i);
      if (p(h)) {
        hit = true;
        res.nearest = h;
      }
      for (auto i : s) h.toggle_at(i);
    });
    res.radius_searched = d;
    if (hit) {
      res.exact = true;
      res.edits = d;
      res.lower = normalized(d);
      res.upper = res.lower;
      return res;
    }
  }
  res.lower = normalized(res.radius_searched + 1);
  const Hypergraph empty(g.r(), g.n());
  if (p(empty)) res.upper = normalized(g.edge_count());
  Hypergraph full = empty;
  for (std::size_t i = 0; i < slots; ++i) full.toggle_at(i);
  if (p(full)) {
    const auto c = normalized(slots - g.edge_count());
    if (!res.upper || c < *res.upper) res.upper = c;
  }
  return res;
}

struct EditTesterReport {
  Rational c = 0;
  std::size_t q = 0;
  std::size_t trials = 0;
  std::size_t accepts = 0;
  std::size_t rejects = 0;
  std::size_t undetermined = 0;
  bool verdict = false;  // d₁(G, P) < c, by majority of decided trials
};

/// Tester for d₁(·, P) < c: per trial, the exact (or bracketed) edit distance
/// of G(q, G) is compared with c.
inline EditTesterReport edit_distance_tester(const Hypergraph& g, const PropertyOracle& p, const Rational& c,
                                             std::size_t q, std::size_t trials, std::uint64_t seed,
                                             std::size_t radius_cap = default_guards().edit_radius) {
  EditTesterReport rep;
  rep.c = c;
  rep.q = q;
  rep.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, i));
    const auto s = sample_q(g, q, rng);
    const auto d = edit_distance_to_property(s, p, radius_cap);
    if (d.upper && *d.upper < c) ++rep.accepts;
    else if (d.lower >= c) ++rep.rejects;
    else ++rep.undetermined;
  }
  rep.verdict = rep.accepts > rep.rejects;
  return rep;
}

// ---------------------------------------------------------------------------
// Prefix formulas ∃u_1..u_l ∀v_1..v_k φ

/// Symmetric predicate: a set of `arity`-subsets of [n], indexed by colex rank.
struct PredicateTable {
  std::size_t arity = 1;
  std::vector<bool> members;

  static PredicateTable empty(std::size_t arity, std::size_t n) {
    return {arity, std::vector<bool>(static_cast<std::size_t>(binomial(n, arity)), false)};
  }
  bool contains(std::span<const std::size_t> sorted) const { return members[colex_rank(sorted)]; }
  void insert(std::vector<std::size_t> set) {
    std::sort(set.begin(), set.end());
    members[colex_rank(set)] = true;
  }
};

struct FONode {
  enum Kind { kTrue, kFalse, kEdge, kEq, kPred, kNot, kAnd, kOr, kImplies } kind = kTrue;
  std::size_t pred = 0;               // kPred: 0-based index of L_{pred+1}
  std::vector<std::size_t> args;      // variable slots
  std::unique_ptr<FONode> lhs, rhs;
};

struct FOFormula {
  std::vector<std::string> exists_vars;
  std::vector<std::string> forall_vars;
  std::vector<std::size_t> pred_arity;  // by predicate index; 0 = unused
  std::size_t edge_arity = 0;           // 0 when E does not occur
  std::shared_ptr<FONode> matrix;
  std::size_t variables() const { return exists_vars.size() + forall_vars.size(); }
};

namespace detail {

class FOParser {
 public:
  explicit FOParser(std::string text) : s_(std::move(text)) {}

  FOFormula parse() {
    FOFormula f;
    skip();
    bool prefix = false;
    if (keyword("exists")) {
      prefix = true;
      f.exists_vars = var_list();
    }
    if (keyword("forall")) {
      prefix = true;
      f.forall_vars = var_list();
    }
    if (prefix || peek() == ':') expect(':');
    for (const auto& v : f.exists_vars) declare(v);
    for (const auto& v : f.forall_vars) declare(v);
    formula_ = &f;
    f.matrix = std::shared_ptr<FONode>(implication().release());
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("formula, column " + std::to_string(pos_ + 1) + ": " + msg, 1);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool keyword(const std::string& w) {
    skip();
    if (s_.compare(pos_, w.size(), w) != 0) return false;
    const std::size_t end = pos_ + w.size();
    if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) return false;
    pos_ = end;
    return true;
  }
  std::string ident() {
    skip();
    const std::size_t b = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (b == pos_) fail("expected an identifier");
    return s_.substr(b, pos_ - b);
  }
  std::vector<std::string> var_list() {
    std::vector<std::string> out;
    while (true) {
      const char c = peek();
      if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) break;
      const std::size_t save = pos_;
      if (keyword("forall")) {
        pos_ = save;
        break;
      }
      out.push_back(ident());
      if (peek() == ',') ++pos_;
    }
    if (out.empty()) fail("quantifier without variables");
    return out;
  }
  void declare(const std::string& v) {
    if (vars_.count(v)) fail("variable '" + v + "' bound twice");
    const std::size_t slot = vars_.size();
    vars_[v] = slot;
  }
  std::size_t variable() {
    const auto name = ident();
    auto it = vars_.find(name);
    if (it == vars_.end()) fail("unbound variable '" + name + "'");
    return it->second;
  }

  using Node = std::unique_ptr<FONode>;
  Node make(FONode::Kind k, Node l = nullptr, Node r = nullptr) {
    auto n = std::make_unique<FONode>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  Node implication() {
    auto l = disjunction();
    skip();
    if (s_.compare(pos_, 2, "->") == 0) {
      pos_ += 2;
      return make(FONode::kImplies, std::move(l), implication());
    }
    return l;
  }
  Node disjunction() {
    auto l = conjunction();
    while (peek() == '|') {
      ++pos_;
      l = make(FONode::kOr, std::move(l), conjunction());
    }
    return l;
  }
  Node conjunction() {
    auto l = unary();
    while (peek() == '&') {
      ++pos_;
      l = make(FONode::kAnd, std::move(l), unary());
    }
    return l;
  }
  Node unary() {
    const char c = peek();
    if (c == '!') {
      ++pos_;
      return make(FONode::kNot, unary());
    }
    if (c == '(') {
      ++pos_;
      auto inner = implication();
      expect(')');
      return inner;
    }
    if (keyword("true")) return make(FONode::kTrue);
    if (keyword("false")) return make(FONode::kFalse);
    const std::size_t save = pos_;
    const auto name = ident();
    if (peek() == '(') {
      ++pos_;
      auto n = make(FONode::kEdge);
      if (name == "E") {
        n->kind = FONode::kEdge;
      } else if (name.size() > 1 && name[0] == 'L' &&
                 std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
        const auto idx = std::stoul(name.substr(1));
        if (idx == 0) fail("predicates are numbered from L1");
        n->kind = FONode::kPred;
        n->pred = idx - 1;
      } else {
        fail("unknown relation symbol '" + name + "'");
      }
      while (true) {
        n->args.push_back(variable());
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        expect(')');
        break;
      }
      if (n->kind == FONode::kEdge) {
        if (formula_->edge_arity && formula_->edge_arity != n->args.size()) fail("E used with two arities");
        formula_->edge_arity = n->args.size();
      } else {
        auto& ar = formula_->pred_arity;
        if (ar.size() <= n->pred) ar.resize(n->pred + 1, 0);
        if (ar[n->pred] && ar[n->pred] != n->args.size()) fail("predicate " + name + " used with two arities");
        ar[n->pred] = n->args.size();
      }
      return n;
    }
    pos_ = save;
    auto n = make(FONode::kEq);
    n->args.push_back(variable());
    expect('=');
    n->args.push_back(variable());
    return n;
  }

  std::string s_;
  std::size_t pos_ = 0;
  std::map<std::string, std::size_t> vars_;
  FOFormula* formula_ = nullptr;
};

inline bool holds_on_set(std::span<const std::size_t> vars, const std::vector<std::size_t>& args,
                         std::vector<std::size_t>& buf, const std::function<bool(std::span<const std::size_t>)>& in) {
  buf.clear();
  for (auto a : args) buf.push_back(vars[a]);
  std::sort(buf.begin(), buf.end());
  if (std::adjacent_find(buf.begin(), buf.end()) != buf.end()) return false;
  return in(buf);
}

}  // namespace detail

/// Grammar: [exists x, y, …] [forall u, v, …] ':' matrix. The matrix uses
/// E(…), Li(…), x = y, true, false, !, &, |, -> and parentheses.
inline FOFormula parse_fo(const std::string& text) { return detail::FOParser(text).parse(); }

/// Truth value under an assignment of all l + k variables.
inline bool eval_matrix(const FONode& node, const Hypergraph& g, const std::vector<PredicateTable>& rel,
                        std::span<const std::size_t> vars, std::vector<std::size_t>& buf) {
  switch (node.kind) {
    case FONode::kTrue: return true;
    case FONode::kFalse: return false;
    case FONode::kEq: return vars[node.args[0]] == vars[node.args[1]];
    case FONode::kEdge:
      return detail::holds_on_set(vars, node.args, buf, [&](std::span<const std::size_t> s) { return g.has_edge(s); });
    case FONode::kPred: {
      const auto& t = rel.at(node.pred);
      return detail::holds_on_set(vars, node.args, buf, [&](std::span<const std::size_t> s) { return t.contains(s); });
    }
    case FONode::kNot: return !eval_matrix(*node.lhs, g, rel, vars, buf);
    case FONode::kAnd: return eval_matrix(*node.lhs, g, rel, vars, buf) && eval_matrix(*node.rhs, g, rel, vars, buf);
    case FONode::kOr: return eval_matrix(*node.lhs, g, rel, vars, buf) || eval_matrix(*node.rhs, g, rel, vars, buf);
    case FONode::kImplies: return !eval_matrix(*node.lhs, g, rel, vars, buf) || eval_matrix(*node.rhs, g, rel, vars, buf);
  }
  return false;
}

/// Brute force over all n^l existential and n^k universal assignments.
/// Relations are symmetric and hold only on tuples of distinct vertices.
inline bool fo_property_check(const Hypergraph& g, const std::vector<PredicateTable>& rel, const FOFormula& phi,
                              std::uint64_t guard = default_guards().enumeration) {
  if (phi.edge_arity && phi.edge_arity != g.r()) throw InvalidArgument("E has arity " + std::to_string(phi.edge_arity) + " but the graph is " + std::to_string(g.r()) + "-uniform");
  for (std::size_t i = 0; i < phi.pred_arity.size(); ++i) {
    if (!phi.pred_arity[i]) continue;
    if (i >= rel.size()) throw InvalidArgument("no table for predicate L" + std::to_string(i + 1));
    if (rel[i].arity != phi.pred_arity[i]) throw InvalidArgument("table arity mismatch for L" + std::to_string(i + 1));
    if (rel[i].members.size() != binomial(g.n(), rel[i].arity)) throw InvalidArgument("table size mismatch for L" + std::to_string(i + 1));
  }
  const std::size_t l = phi.exists_vars.size(), kk = phi.forall_vars.size();
  check_guard(sat_pow(g.n(), l + kk), guard, "fo_property_check");
  std::vector<std::size_t> vars(l + kk, 0), buf;
  bool found = false;
  for_each_tuple(g.n(), l, [&](std::span<const std::size_t> u) {
    if (found) return;
    std::copy(u.begin(), u.end(), vars.begin());
    bool all = true;
    for_each_tuple(g.n(), kk, [&](std::span<const std::size_t> v) {
      if (!all) return;
      std::copy(v.begin(), v.end(), vars.begin() + static_cast<std::ptrdiff_t>(l));
      all = eval_matrix(*phi.matrix, g, rel, vars, buf);
    });
    found = all;
  });
  return found;
}

struct FONdResult {
  bool value = false;
  std::vector<PredicateTable> relations;  // a satisfying choice when value is true
  std::uint64_t tables_tried = 0;
};

/// ∃L_1 … L_m: the fixed-relations check inside a search over every choice of
/// predicate tables.
inline FONdResult fo_property_check_nd(const Hypergraph& g, const FOFormula& phi,
                                       std::uint64_t guard = default_guards().enumeration) {
  std::vector<PredicateTable> rel;
  std::size_t bits = 0;
  for (std::size_t i = 0; i < phi.pred_arity.size(); ++i) {
    const std::size_t a = std::max<std::size_t>(phi.pred_arity[i], 1);
    rel.push_back(PredicateTable::empty(a, g.n()));
    if (phi.pred_arity[i]) bits += rel.back().members.size();
  }
  const std::uint64_t choices = sat_pow(2, bits);
  check_guard(sat_mul(choices, sat_pow(g.n(), phi.variables())), guard, "fo_property_check_nd");
  FONdResult res;
  for (std::uint64_t code = 0; code < choices; ++code) {
    std::uint64_t c = code;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      if (!phi.pred_arity[i]) continue;
      for (std::size_t j = 0; j < rel[i].members.size(); ++j) {
        rel[i].members[j] = c & 1;
        c >>= 1;
      }
    }
    ++res.tables_tried;
    if (fo_property_check(g, rel, phi, guard)) {
      res.value = true;
      res.relations = rel;
      return res;
    }
  }
  return res;
}

}  // namespace hypertest
