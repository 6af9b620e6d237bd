#include <gtest/gtest.h>

#include <hypertest/property.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace hypertest;

namespace {

Hypergraph complete_graph(std::size_t r, std::size_t n) {
  Hypergraph g(r, n);
  for (std::size_t i = 0; i < g.colored().slot_count(); ++i) g.toggle_at(i);
  return g;
}

Hypergraph two_k2() {
  Hypergraph g(2, 4);
  g.add_edge(std::vector<std::size_t>{0, 1});
  g.add_edge(std::vector<std::size_t>{2, 3});
  return g;
}

bool bipartite_brute(const Hypergraph& g) {
  for (std::size_t mask = 0; mask < (std::size_t{1} << g.n()); ++mask) {
    bool ok = true;
    for (const auto& e : g.edges()) ok = ok && (((mask >> e[0]) & 1) != ((mask >> e[1]) & 1));
    if (ok) return true;
  }
  return false;
}

}  // namespace

TEST(EditDistance, MemberIsZero) {
  const auto r = edit_distance_to_property(Hypergraph(2, 5), is_edgeless);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.lower, 0);
}

TEST(EditDistance, EdgelessNeedsAllDeletions) {
  Rng rng(51);
  const auto g = gen::random_graph(rng, 2, 5, 0.2);
  const auto r = edit_distance_to_property(g, is_edgeless, 10);
  ASSERT_TRUE(r.exact);
  EXPECT_EQ(r.lower, ratio(static_cast<long>(g.edge_count()), 25L));
}

TEST(EditDistance, K4TriangleFree) {
  const auto r = edit_distance_to_property(complete_graph(2, 4), property_by_name("triangle-free"));
  ASSERT_TRUE(r.exact);
  EXPECT_EQ(r.edits, 2u);
  EXPECT_EQ(r.lower, ratio(2L, 16L));
  EXPECT_FALSE(oracle::has_triangle(*r.nearest));
}

TEST(EditDistance, MatchesExhaustiveSearch) {
  Rng rng(52);
  for (int rep = 0; rep < 10; ++rep) {
    const auto g = gen::random_graph(rng, 2, 5);
    const auto tf = edit_distance_to_property(g, is_clique_free, 10);
    const auto bp = edit_distance_to_property(g, is_two_colorable, 10);
    EXPECT_EQ(tf.edits, oracle::edit_distance(g, [](const Hypergraph& h) { return !oracle::has_triangle(h); }));
    EXPECT_EQ(bp.edits, oracle::edit_distance(g, bipartite_brute));
  }
}

TEST(EditDistance, BracketPastTheCap) {
  // K5 needs 4 deletions to become triangle-free
  const auto r = edit_distance_to_property(complete_graph(2, 5), is_clique_free, 2);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.lower, ratio(3L, 25L));
  ASSERT_TRUE(r.upper.has_value());
  EXPECT_EQ(*r.upper, ratio(10L, 25L));
}

TEST(EditDistance, TesterVerdicts) {
  Rng rng(53);
  Hypergraph g(2, 12);
  for (std::size_t u = 0; u < 6; ++u)
    for (std::size_t v = 6; v < 12; ++v) g.add_edge(std::vector<std::size_t>{u, v});
  const auto yes = edit_distance_tester(g, is_clique_free, ratio(1L, 20L), 6, 10, 1);
  EXPECT_TRUE(yes.verdict);
  EXPECT_EQ(yes.accepts, 10u);
  const auto no = edit_distance_tester(complete_graph(2, 12), is_edgeless, ratio(1L, 20L), 6, 10, 1, 20);
  EXPECT_FALSE(no.verdict);
}

TEST(FO, ConstantFormulas) {
  const Hypergraph g(2, 3);
  EXPECT_TRUE(fo_property_check(g, {}, parse_fo("true")));
  EXPECT_FALSE(fo_property_check(g, {}, parse_fo("false")));
  EXPECT_TRUE(fo_property_check(g, {}, parse_fo(": !false & (true | false)")));
}

TEST(FO, DominatingVertex) {
  const auto phi = parse_fo("exists u forall v : u = v | E(u, v)");
  Hypergraph star(2, 5);
  for (std::size_t v = 1; v < 5; ++v) star.add_edge(std::vector<std::size_t>{0, v});
  EXPECT_TRUE(fo_property_check(star, {}, phi));
  EXPECT_FALSE(fo_property_check(two_k2(), {}, phi));
  Rng rng(54);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = gen::random_graph(rng, 2, 5);
    bool expect = false;
    for (std::size_t u = 0; u < 5; ++u) {
      bool dom = true;
      for (std::size_t v = 0; v < 5; ++v)
        if (v != u) dom = dom && g.has_edge(std::vector<std::size_t>{std::min(u, v), std::max(u, v)});
      expect = expect || dom;
    }
    EXPECT_EQ(fo_property_check(g, {}, phi), expect);
  }
}

TEST(FO, FixedRelations) {
  // L1 is an independent set containing vertex u
  const auto phi = parse_fo("exists u forall v w : L1(u) & ((L1(v) & L1(w)) -> !E(v, w))");
  const auto g = two_k2();
  auto t = PredicateTable::empty(1, 4);
  t.insert({0});
  t.insert({2});
  EXPECT_TRUE(fo_property_check(g, {t}, phi));
  t.insert({1});
  EXPECT_FALSE(fo_property_check(g, {t}, phi));
}

TEST(FO, ExistentialPredicatesDecideBipartiteness) {
  const auto phi = parse_fo("forall u v : E(u, v) -> ((L1(u) & !L1(v)) | (!L1(u) & L1(v)))");
  Rng rng(55);
  for (int rep = 0; rep < 15; ++rep) {
    const auto g = gen::random_graph(rng, 2, 5, 0.35);
    EXPECT_EQ(fo_property_check_nd(g, phi).value, bipartite_brute(g));
  }
}

TEST(FO, HyperedgeAtoms) {
  Hypergraph g(3, 4);
  g.add_edge(std::vector<std::size_t>{0, 1, 2});
  EXPECT_TRUE(fo_property_check(g, {}, parse_fo("exists a b c : E(c, a, b)")));
  EXPECT_FALSE(fo_property_check(g, {}, parse_fo("exists a b : E(a, a, b)")));
  EXPECT_THROW(fo_property_check(g, {}, parse_fo("exists a b : E(a, b)")), InvalidArgument);
}

TEST(FO, ParseErrors) {
  EXPECT_THROW(parse_fo("exists u : E(u, v)"), ParseError);
  EXPECT_THROW(parse_fo("exists u : E(u, u"), ParseError);
  EXPECT_THROW(parse_fo("exists u u : true"), ParseError);
  EXPECT_THROW(parse_fo("forall u : L1(u) & L1(u, u)"), ParseError);
  EXPECT_THROW(parse_fo("exists : true"), ParseError);
}

TEST(FO, Guard) {
  const auto phi = parse_fo("exists a b c forall d e f : true");
  EXPECT_THROW(fo_property_check(Hypergraph(2, 30), {}, phi, 1000), GuardExceeded);
}
