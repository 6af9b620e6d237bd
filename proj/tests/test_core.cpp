#include <gtest/gtest.h>

#include <hypertest/density.hpp>
#include <hypertest/hypergraph.hpp>
#include <hypertest/hypergraph_io.hpp>

#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"

using namespace hypertest;

namespace {

Hypergraph complete_graph(std::size_t r, std::size_t n) {
  Hypergraph h(r, n);
  for (std::size_t i = 0; i < h.colored().slot_count(); ++i) h.toggle_at(i);
  return h;
}

Hypergraph fano() {
  Hypergraph h(3, 7);
  const std::size_t lines[7][3] = {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5},
                                   {1, 4, 6}, {2, 3, 6}, {2, 4, 5}};
  for (auto& l : lines) h.add_edge(std::vector<std::size_t>(l, l + 3));
  return h;
}

}  // namespace

TEST(Combinatorics, ColexRankRoundTrip) {
  for (std::size_t r = 1; r <= 4; ++r) {
    std::size_t expected = 0;
    for_each_subset(9, r, [&](std::span<const std::size_t> s) {
      EXPECT_EQ(colex_rank(s), expected);
      EXPECT_EQ(colex_unrank(expected, r), std::vector<std::size_t>(s.begin(), s.end()));
      ++expected;
    });
    EXPECT_EQ(expected, binomial(9, r));
  }
}

TEST(Combinatorics, TupleEnumerationCountsAndOrder) {
  std::vector<std::vector<std::size_t>> seen;
  for_each_tuple(3, 2, [&](std::span<const std::size_t> t) { seen.emplace_back(t.begin(), t.end()); });
  ASSERT_EQ(seen.size(), 9u);
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  std::size_t empty_calls = 0;
  for_each_tuple(5, 0, [&](std::span<const std::size_t>) { ++empty_calls; });
  EXPECT_EQ(empty_calls, 1u);
}

TEST(Combinatorics, SaturatingArithmetic) {
  EXPECT_EQ(binomial(60, 30), 118264581564861424ULL);
  EXPECT_EQ(sat_pow(2, 64), std::numeric_limits<std::uint64_t>::max());
  EXPECT_EQ(falling_factorial(8, 3), 336u);
}

TEST(Seeds, DerivedStreamsAreDeterministicAndDistinct) {
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_NE(derive_seed(7, 3), derive_seed(7, 4));
  EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
  Rng a(derive_seed(1, 1)), b(derive_seed(1, 1));
  for (int i = 0; i < 10; ++i) EXPECT_EQ(uniform01(a), uniform01(b));
}

TEST(RandomSubset, UniformAndSorted) {
  Rng rng(11);
  std::vector<int> hits(10, 0);
  for (int i = 0; i < 20000; ++i) {
    auto s = random_subset(rng, 10, 3);
    ASSERT_EQ(s.size(), 3u);
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
    ASSERT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
    for (auto v : s) ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h / 20000.0, 0.3, 0.02);
}

TEST(InducedSubgraph, FullSetIsIdentity) {
  Rng rng(3);
  auto g = gen::random_colored_graph(rng, 3, 6, 3);
  std::vector<std::size_t> all(6);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(induced_subgraph(g, all), g);
}

TEST(InducedSubgraph, CompleteGraphRestrictsToComplete) {
  auto k5 = complete_graph(2, 5);
  auto k3 = induced_subgraph(k5, {0, 1, 2});
  EXPECT_EQ(k3, complete_graph(2, 3));
}

TEST(InducedSubgraph, FanoFourSetsMatchDirectCount) {
  const auto f = fano();
  const auto edges = f.edges();
  for_each_subset(7, 4, [&](std::span<const std::size_t> s) {
    std::vector<std::size_t> sv(s.begin(), s.end());
    std::size_t direct = 0;
    for (const auto& e : edges)
      if (std::includes(sv.begin(), sv.end(), e.begin(), e.end())) ++direct;
    EXPECT_EQ(induced_subgraph(f, sv).edge_count(), direct);
  });
}

TEST(InducedSubgraph, RejectsSmallOrBadSubsets) {
  auto k5 = complete_graph(3, 5);
  EXPECT_THROW(induced_subgraph(k5, {0, 1}), InvalidSample);
  EXPECT_THROW(induced_subgraph(k5, {0, 1, 1}), InvalidSample);
  EXPECT_THROW(induced_subgraph(k5, {0, 1, 9}), InvalidSample);
}

TEST(SampleQ, FullSampleAndEdgelessAndDeterminism) {
  Rng rng(5);
  auto g = gen::random_graph(rng, 2, 8);
  Rng a(42), b(42), c2(42);
  EXPECT_EQ(sample_q(g, 8, a), g);  // sorted-order relabelling of all vertices
  EXPECT_EQ(sample_q(g, 5, b), sample_q(g, 5, c2));
  Hypergraph empty(3, 9);
  Rng c(1);
  EXPECT_EQ(sample_q(empty, 4, c).edge_count(), 0u);
  EXPECT_THROW(sample_q(g, 9, c), InvalidSample);
  EXPECT_THROW(sample_q(g, 1, c), InvalidSample);
}

TEST(SampleQ, EdgeDensityMatchesExpectation) {
  Rng rng(9);
  auto g = gen::random_graph(rng, 3, 10, 0.4);
  const double expected = static_cast<double>(g.edge_count()) / static_cast<double>(binomial(10, 3));
  const int trials = 10000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < trials; ++i) {
    auto s = sample_q(g, 5, rng);
    const double d = static_cast<double>(s.edge_count()) / 10.0;
    sum += d;
    sumsq += d * d;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sumsq / trials - mean * mean) / trials);
  EXPECT_LE(std::fabs(mean - expected), 3 * se);
}

TEST(Colorings, CountsAndRoundTrip) {
  Hypergraph tri(2, 3);
  for (std::size_t i = 0; i < 3; ++i) tri.toggle_at(i);
  std::size_t count = 0;
  enumerate_colorings(tri.colored(), 2, [&](const Coloring& c) {
    ++count;
    EXPECT_EQ(discolor(c), tri.colored());
    return true;
  });
  EXPECT_EQ(count, 8u);

  std::size_t single = 0;
  enumerate_colorings(tri.colored(), 1, [&](const Coloring& c) {
    ++single;
    EXPECT_EQ(discolor(c), c.base);
    return true;
  });
  EXPECT_EQ(single, 1u);

  auto k5 = complete_graph(2, 5);
  EXPECT_THROW(enumerate_colorings(k5.colored(), 2, [](const Coloring&) { return true; }, 512),
               GuardExceeded);
}

TEST(Colorings, DiscolorRecoversBaseEdgeByEdge) {
  Rng rng(17);
  auto base = gen::random_colored_graph(rng, 2, 4, 2);
  ColoredHypergraph refined(2, 4, 4);
  for (std::size_t i = 0; i < base.slot_count(); ++i)
    refined.set_color_at(i, Coloring::encode(base.color_at(i), static_cast<Color>(uniform_index(rng, 2)), 2));
  auto c = make_coloring(base, refined, 2);
  auto back = discolor(c);
  for (std::size_t i = 0; i < base.slot_count(); ++i) EXPECT_EQ(back.color_at(i), base.color_at(i));

  ColoredHypergraph bad(2, 4, 3);
  EXPECT_THROW(discolor(bad, 2), InvalidColor);
  ColoredHypergraph mono(2, 4, 1);
  EXPECT_EQ(discolor(Coloring{mono, ColoredHypergraph(2, 4, 3), 3}).k(), 1u);
}

TEST(InducedDensity, TrivialCases) {
  Rng rng(23);
  auto g = gen::random_graph(rng, 2, 6);
  Hypergraph single_vertex(2, 1);
  EXPECT_EQ(induced_density(single_vertex, g), 1);
  Hypergraph edge(2, 2);
  edge.toggle_at(0);
  EXPECT_EQ(induced_density(edge, g), ratio(static_cast<long>(g.edge_count()), 15L));
  Hypergraph big(2, 7);
  EXPECT_THROW(induced_density(big, g), InvalidSample);
}

TEST(InducedDensity, MatchesOracleAndSumsToOne) {
  Rng rng(29);
  for (std::size_t r : {2u, 3u}) {
    auto g = gen::random_colored_graph(rng, r, 6, 2);
    const std::size_t q = r + 1;
    Rational total = 0;
    ColoredHypergraph f(r, q, 2);
    const std::size_t slots = f.slot_count();
    for (std::size_t code = 0; code < (std::size_t{1} << slots); ++code) {
      for (std::size_t i = 0; i < slots; ++i) f.set_color_at(i, static_cast<Color>((code >> i) & 1));
      const auto d = induced_density(f, g);
      EXPECT_EQ(d, oracle::induced_density(f, g));
      total += d;
    }
    EXPECT_EQ(total, 1);
  }
}

TEST(InducedDensity, MonteCarloWithinErrorBars) {
  Rng rng(31);
  auto g = gen::random_colored_graph(rng, 2, 7, 2);
  ColoredHypergraph f(2, 3, 2);
  f.set_color_at(0, 0);
  const double exact = induced_density(f, g).get_d();
  auto est = induced_density_mc(f, g, 20000, rng);
  EXPECT_LE(std::fabs(est.value - exact), 4 * est.std_error + 1e-9);
}

TEST(InducedDensity, RelabelingInvariance) {
  Rng rng(37);
  for (int rep = 0; rep < 5; ++rep) {
    auto g = gen::random_colored_graph(rng, 2, 6, 3);
    auto perm = gen::random_permutation(rng, 6);
    auto h = relabel(g, perm);
    auto f = gen::random_colored_graph(rng, 2, 3, 3);
    EXPECT_EQ(induced_density(f, g), induced_density(f, h));
  }
}

TEST(SampleDistribution, AgreesWithInducedDensityAtQEqualsR) {
  Rng rng(41);
  auto g = gen::random_colored_graph(rng, 3, 6, 3);
  auto d = sample_distribution(g, 3);
  EXPECT_EQ(d.total(), 1);
  for (Color c = 0; c < 3; ++c) {
    ColoredHypergraph f(3, 3, 3, c);
    EXPECT_EQ(d.mass(f), induced_density(f, g));
    EXPECT_EQ(d.mass(f), ratio(static_cast<long>(g.count(c)), 20L));
  }
}

TEST(TstarDensity, SingleEdgeAndEmptyPattern) {
  auto k5 = complete_graph(2, 5);
  Hypergraph edge(2, 2);
  edge.toggle_at(0);
  EXPECT_EQ(tstar_density(edge, k5), ratio(20L, 25L));  // (n)_r / n^r
  Hypergraph empty(2, 3);
  EXPECT_EQ(tstar_density(empty, k5), 1);
}

TEST(TstarDensity, MatchesDirectSummation) {
  Rng rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t r = rep % 2 ? 3 : 2;
    auto g = gen::random_graph(rng, r, 5);
    auto h = gen::random_graph(rng, r, 4, 0.5);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 5, 4);
    Rational expected(mpz_class(static_cast<unsigned long>(oracle::hom_count(h, g))), den);
    expected.canonicalize();
    EXPECT_EQ(tstar_density(h, g), expected);
  }
}

TEST(Eq1, InjectiveAndKernelDensitiesAreClose) {
  // |t(F,G) − t(F,W_G)| ≤ C(q,2)/(n − C(q,2)), with t(F,W_G) from the
  // collision-free share of independent vertex draws
  Rng rng(47);
  auto g = gen::random_graph(rng, 2, 8);
  Hypergraph f(2, 3);
  f.toggle_at(0);
  const Rational t_inj = induced_density(f, g);
  // probability that three independent uniform vertices are distinct
  const Rational distinct(8 * 7 * 6, 512);
  const Rational t_kernel = t_inj * distinct;
  const Rational bound(3, 8 - 3);
  EXPECT_LE(abs(t_inj - t_kernel), bound);
}

TEST(HypergraphIO, RoundTripIsByteStable) {
  Rng rng(53);
  auto g = gen::random_colored_graph(rng, 3, 7, 3);
  const auto text = to_text(g);
  std::istringstream in(text);
  auto back = read_colored_hypergraph(in);
  EXPECT_EQ(back, g);
  EXPECT_EQ(to_text(back), text);
}

TEST(HypergraphIO, ReportsLineNumbers) {
  auto expect_line = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      read_colored_hypergraph(in);
      FAIL() << "accepted malformed input";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line, line) << e.what();
    }
  };
  expect_line("2 4 2 2\n1 2 1\n3 3 1\n", 3);      // loop
  expect_line("2 4 1 2\n# c\n\n2 1 1\n", 4);      // unsorted
  expect_line("2 4 2 2\n1 2 1\n1 2 1\n", 3);      // duplicate
  expect_line("2 4 1 2\n1 5 1\n", 2);             // out of range
  expect_line("2 4 1 2\n1 2 3\n", 2);             // colour out of range
  expect_line("2 4 1 2\n1 2 1\n1 3 1\n", 3);      // trailing
  expect_line("2 4 x 2\n", 1);
}
