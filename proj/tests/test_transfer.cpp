#include <gtest/gtest.h>

#include <hypertest/linear.hpp>
#include <hypertest/nd.hpp>
#include <hypertest/transfer.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace hypertest;

namespace {

/// Splits every colour of u into k parts with random proportions.
ColoredStepKernel<Rational> random_split(Rng& rng, const ColoredStepKernel<Rational>& u, std::size_t k) {
  std::vector<std::vector<Rational>> vals(u.k * k, std::vector<Rational>(u.cell_count(), Rational(0)));
  std::vector<std::vector<Rational>> parts(u.cell_count());
  for (std::size_t i = 0; i < u.cell_count(); ++i) {
    auto s = cell_of_index(i, u.t, u.r);
    std::sort(s.begin(), s.end());
    const std::size_t rep = cell_index(s, u.t);
    parts[i] = rep == i ? gen::random_weights(rng, k) : parts[rep];
  }
  for (std::size_t i = 0; i < u.cell_count(); ++i)
    for (std::size_t a = 0; a < u.k; ++a)
      for (std::size_t b = 0; b < k; ++b) vals[a * k + b][i] = u.values[a][i] * parts[i][b];
  return ColoredStepKernel<Rational>(u.r, u.weights, std::move(vals));
}

Hypergraph random_bipartite(Rng& rng, std::size_t n, double p) {
  Hypergraph g(2, n);
  for (std::size_t u = 0; u < n / 2; ++u)
    for (std::size_t v = n / 2; v < n; ++v)
      if (uniform01(rng) < p) g.add_edge(std::vector<std::size_t>{u, v});
  return g;
}

Rational edge_hom_density(std::size_t n, std::size_t r, std::uint64_t homs) {
  return Rational(static_cast<long>(homs)) / Rational(static_cast<long>(ipow(n, r)));
}

}  // namespace

TEST(ColoringLemma, IdentityReproducesSplit) {
  Rng rng(31);
  for (int rep = 0; rep < 6; ++rep) {
    const auto u = gen::random_colored_kernel(rng, 2, 2, 2);
    const auto uhat = random_split(rng, u, 2);
    const auto res = coloring_lemma(uhat, 2, u, ratio(1L, 100L));
    EXPECT_EQ(res.vhat, uhat);
    EXPECT_EQ(res.pre_distance, 0);
    EXPECT_EQ(res.post_distance, 0);
    EXPECT_TRUE(res.holds);
  }
}

TEST(ColoringLemma, UniformSplitStaysUniform) {
  Rng rng(32);
  const auto u = gen::random_colored_kernel(rng, 2, 2, 2);
  std::vector<std::vector<Rational>> even;
  for (const auto& arr : u.values)
    for (int b = 0; b < 3; ++b) {
      even.push_back(arr);
      for (auto& x : even.back()) x /= 3;
    }
  const ColoredStepKernel<Rational> uhat(2, u.weights, even);
  const auto v = gen::random_colored_kernel(rng, 2, 3, 2);
  const auto res = coloring_lemma(uhat, 3, v, 1);
  for (std::size_t i = 0; i < res.vhat.cell_count(); ++i)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 1; b < 3; ++b) EXPECT_EQ(res.vhat.values[a * 3 + b][i], res.vhat.values[a * 3][i]);
}

TEST(ColoringLemma, PostHocWithinKTimesPre) {
  Rng rng(33);
  for (int rep = 0; rep < 12; ++rep) {
    const auto u = gen::random_colored_kernel(rng, 2, 2, 2);
    const auto uhat = random_split(rng, u, 2);
    const auto v = gen::random_colored_kernel(rng, 2, 2, 2);
    const auto res = coloring_lemma(uhat, 2, v, 2);
    EXPECT_TRUE(res.hypothesis_met);
    EXPECT_TRUE(res.holds);
    EXPECT_LE(res.post_distance, 2 * res.pre_distance);
    // independent re-evaluation of the post-hoc distance on the refinement
    auto [a, b] = align(uhat, res.vhat);
    auto [pa, pb] = common_refinement(uhat.weights, res.vhat.weights);
    std::vector<std::size_t> labels;
    for (const auto& p : pa) labels.push_back(p.source);
    Rational post = 0;
    for (std::size_t c = 0; c < uhat.k; ++c) {
      StepKernel<Rational> d = a.component(c);
      for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[c][i];
      post += oracle::cut_star_P(d, labels);
    }
    EXPECT_EQ(post, res.post_distance);
  }
}

TEST(ColoringLemma, UnmetHypothesisIsReported) {
  const auto u = as_two_colored(StepKernel<Rational>::constant(2, 1, 2));
  const auto v = as_two_colored(StepKernel<Rational>::constant(2, 0, 2));
  std::vector<std::vector<Rational>> vals(4, std::vector<Rational>(4, Rational(0)));
  vals[0].assign(4, Rational(1));
  const ColoredStepKernel<Rational> uhat(2, u.weights, vals);
  const auto res = coloring_lemma(uhat, 2, v, ratio(1L, 10L));
  EXPECT_FALSE(res.hypothesis_met);
  EXPECT_TRUE(res.holds);
}

TEST(Linear, PatternCounts) {
  EXPECT_EQ(linear_patterns(2, 1, 2).size(), 1u);
  EXPECT_EQ(linear_patterns(2, 1, 3).size(), 3u);
  EXPECT_EQ(linear_patterns(2, 1, 4).size(), 10u);
  EXPECT_EQ(linear_patterns(2, 1, 5).size(), 33u);
  EXPECT_EQ(linear_patterns(3, 1, 5).size(), 2u);
  // coloured single edges and 2-coloured paths/triangles on 3 vertices
  EXPECT_EQ(linear_patterns(2, 2, 3).size(), 2u + 3u + 4u);
}

TEST(Linear, CanonicalKeysAgreeWithIsomorphism) {
  Rng rng(34);
  std::vector<Pattern> ps;
  for (int rep = 0; rep < 80; ++rep) {
    Pattern p{2, 4, {}, {}};
    for_each_subset(4, 2, [&](std::span<const std::size_t> s) {
      if (uniform01(rng) < 0.4) {
        p.edges.emplace_back(s.begin(), s.end());
        p.colors.push_back(static_cast<Color>(uniform_index(rng, 2)));
      }
    });
    ps.push_back(p);
  }
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = i; j < ps.size(); ++j)
      EXPECT_EQ(pattern_key(ps[i]) == pattern_key(ps[j]),
                oracle::isomorphic(4, ps[i].edges, ps[i].colors, ps[j].edges, ps[j].colors));
}

TEST(Linear, RepresentativesPairwiseNonIsomorphic) {
  const auto ps = linear_patterns(2, 1, 5);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_TRUE(is_linear(ps[i]));
    for (std::size_t j = i + 1; j < ps.size(); ++j)
      if (ps[i].q == ps[j].q)
        EXPECT_FALSE(oracle::isomorphic(ps[i].q, ps[i].edges, ps[i].colors, ps[j].edges, ps[j].colors));
  }
}

TEST(Linear, SingleEdgeDensities) {
  Rng rng(35);
  const auto g = gen::random_colored_graph(rng, 3, 6, 3);
  const auto v = linear_density_vector(g, 3);
  ASSERT_EQ(v.patterns.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto c = v.patterns[i].colors[0];
    EXPECT_EQ(v.densities[i], ratio(static_cast<long>(6 * g.count(c)), 216L));
  }
}

TEST(Linear, PathsMatchBruteForce) {
  Rng rng(36);
  const auto g = gen::random_colored_graph(rng, 2, 6, 2);
  const auto v = linear_density_vector(g, 3);
  for (std::size_t i = 0; i < v.patterns.size(); ++i) {
    const auto& p = v.patterns[i];
    EXPECT_EQ(v.densities[i], edge_hom_density(6, p.q, oracle::colored_hom_count(p.q, p.edges, p.colors, g)))
        << v.keys[i];
  }
}

TEST(Linear, EdgelessGraph) {
  const Hypergraph g(2, 5);
  const auto v = linear_density_vector(g.colored(), 3);
  for (std::size_t i = 0; i < v.patterns.size(); ++i) {
    const auto& cs = v.patterns[i].colors;
    if (std::find(cs.begin(), cs.end(), Hypergraph::kEdge) != cs.end()) EXPECT_EQ(v.densities[i], 0);
  }
}

TEST(Linear, MarginalizationIsExact) {
  Rng rng(37);
  const auto g = gen::random_colored_graph(rng, 2, 6, 4);
  const auto refined = linear_density_vector(g, 3);
  const auto base = linear_density_vector(discolor(g, 2), 3);
  const auto marg = marginalize(refined, 2);
  EXPECT_EQ(base.keys, marg.keys);
  EXPECT_EQ(base.densities, marg.densities);
}

TEST(Linear, CountingLemmaHolds) {
  Rng rng(38);
  for (int rep = 0; rep < 6; ++rep) {
    const auto u = gen::random_colored_kernel(rng, 2, 2, 2);
    const auto w = gen::random_colored_kernel(rng, 2, 2, 2);
    const auto rep_ = linear_counting_check(u, w, 3);
    EXPECT_TRUE(rep_.holds());
    EXPECT_EQ(rep_.gaps.size(), 9u);
  }
}

TEST(Linear, GuardOnLargeCaps) {
  EXPECT_THROW(linear_patterns(2, 4, 6, 1000), GuardExceeded);
}

TEST(Transfer, FullSampleReproducesColoring) {
  Rng rng(39);
  const auto g = gen::random_graph(rng, 2, 12);
  std::vector<std::size_t> all(12);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto fhat = nd_eval(NDParameter{maxcut_witness()}, g).witness.refined;
  const auto rep = coloring_transfer(g, all, fhat, 2, 0.1);
  EXPECT_EQ(rep.ghat, fhat);
  for (const auto& s : rep.stages) EXPECT_EQ(s.distance, 0) << s.name;
  EXPECT_TRUE(rep.certified);
  EXPECT_EQ(rep.discrepancy, 0);
}

TEST(Transfer, MaxcutColoringOfSample) {
  Rng rng(40);
  const auto g = random_bipartite(rng, 60, 0.8);
  auto perm = gen::random_permutation(rng, 60);
  const auto gp = relabel(g, perm);
  const auto smp = random_subset(rng, 60, 20);
  const auto f = induced_subgraph(gp, smp);
  const auto fhat = nd_eval(NDParameter{maxcut_witness()}, f).witness.refined;
  const auto rep = coloring_transfer(gp, smp, fhat, 2, 0.1);
  EXPECT_TRUE(rep.certified) << rep.failed_stage;
  double sum = 0;
  for (const auto& s : rep.stages) sum += s.distance;
  EXPECT_DOUBLE_EQ(sum, rep.total_distance);
  EXPECT_LE(rep.discrepancy, rep.budget);
  EXPECT_EQ(rep.pattern_violations, 0u);
  EXPECT_EQ(discolor(rep.ghat, 2), gp.colored());
  // slots inside the sample copy F̂
  EXPECT_EQ(induced_subgraph(rep.ghat, smp), fhat);
}

TEST(Transfer, HugeDeltaMeetsTargets) {
  Rng rng(41);
  const auto g = random_bipartite(rng, 30, 0.6);
  const auto smp = random_subset(rng, 30, 12);
  const auto fhat = nd_eval(NDParameter{maxcut_witness()}, induced_subgraph(g, smp)).witness.refined;
  TransferOptions opt;
  opt.eps = 1e9;
  const auto rep = coloring_transfer(g, smp, fhat, 2, 1e9, opt);
  EXPECT_TRUE(rep.within_targets);
}

TEST(Transfer, RejectsForeignColoring) {
  Rng rng(42);
  const auto g = gen::random_graph(rng, 2, 10);
  const auto smp = random_subset(rng, 10, 5);
  ColoredHypergraph wrong(2, 5, 4);
  EXPECT_THROW(coloring_transfer(g, smp, wrong, 2, 0.1), InvalidColor);
}
