#include <gtest/gtest.h>

#include <hypertest/norms.hpp>
#include <hypertest/regularity.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace hypertest;

TEST(CutStar, ConstantAndZero) {
  for (std::size_t r : {1u, 2u, 3u}) {
    auto c = StepKernel<Rational>::constant(r, Rational(-3, 7), 3);
    EXPECT_EQ(cut_star_norm(c).value, Rational(3, 7));
    EXPECT_EQ(boxplus_norm(c).value, Rational(3, 7));
    auto z = StepKernel<Rational>::constant(r, 0, 2);
    EXPECT_EQ(cut_star_norm(z).value, 0);
  }
}

TEST(CutStar, ExactMatchesBruteForce) {
  Rng rng(113);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t r = rep % 3 == 0 ? 3 : 2;
    const std::size_t t = 1 + rep % (r == 3 ? 3 : 4);
    auto w = gen::random_signed_kernel(rng, r, t);
    auto res = cut_star_norm(w);
    EXPECT_EQ(res.value, oracle::cut_star(w));
    EXPECT_EQ(abs(box_integral(w, res.witness)), res.value);
    EXPECT_EQ(boxplus_norm(w).value, oracle::boxplus(w));
  }
}

TEST(CutStar, AscentIsLowerBoundAndUsuallyExact) {
  Rng rng(127);
  int equal = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto v = gen::symmetric_values(4, 2, [&] { return Rational(uniform01(rng) < 0.5 ? -1 : 1); });
    StepKernel<Rational> w(2, gen::random_weights(rng, 4), v);
    AscentOptions opt;
    opt.seed = static_cast<std::uint64_t>(rep);
    auto a = cut_star_norm(w, NormMode::ascent, opt);
    auto e = cut_star_norm(w);
    EXPECT_FALSE(a.exact);
    EXPECT_LE(a.value, e.value);
    EXPECT_EQ(abs(box_integral(w, a.witness)), a.value);
    if (a.value == e.value) ++equal;
  }
  EXPECT_GE(equal, 90);
}

TEST(CutStar, ExtremePointsBeatFractionalGrid) {
  // the multilinear objective over fractional memberships never exceeds the
  // 0/1 optimum
  Rng rng(131);
  for (int rep = 0; rep < 10; ++rep) {
    auto w = gen::random_signed_kernel(rng, 2, 3);
    const double exact = cut_star_norm(w).value.get_d();
    const int steps = 4;
    double best = 0;
    const std::size_t grid = ipow(steps + 1, 6);
    for (std::size_t code = 0; code < grid; ++code) {
      auto f = cell_of_index(code, steps + 1, 6);
      double s = 0;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          s += w.weights[i].get_d() * w.weights[j].get_d() * w.values[i * 3 + j].get_d() *
               (f[i] / double(steps)) * (f[3 + j] / double(steps));
      best = std::max(best, std::fabs(s));
    }
    EXPECT_LE(best, exact + 1e-12);
  }
}

TEST(CutStarP, TrivialDiscreteAndMonotone) {
  Rng rng(137);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t r = rep % 2 ? 3 : 2;
    const std::size_t t = r == 3 ? 3 : 4;
    auto w = gen::random_signed_kernel(rng, r, t);
    EXPECT_EQ(cut_star_P_norm(w, CellPartition::trivial(t)).value, cut_star_norm(w).value);
    std::vector<std::size_t> labels(t);
    for (auto& l : labels) l = uniform_index(rng, 2);
    labels[0] = 0;
    labels[t - 1] = 1;
    CellPartition q(labels);
    const auto coarse = cut_star_P_norm(w, q).value;
    EXPECT_EQ(coarse, oracle::cut_star_P(w, labels));
    const auto fine = cut_star_P_norm(w, CellPartition::discrete(t)).value;
    EXPECT_EQ(fine, oracle::cut_star_P(w, CellPartition::discrete(t).labels()));
    EXPECT_LE(cut_star_norm(w).value, coarse);
    EXPECT_LE(coarse, fine);
    auto asc = cut_star_P_norm(w, q, NormMode::ascent);
    EXPECT_LE(asc.value, coarse);
  }
}

TEST(CutStarP, ZeroOneKernelDiscretePartition) {
  // for a 0/1 kernel and singleton blocks every cell is taken whole when it
  // is 1, so the value is the total mass
  StepKernel<Rational> w(2, {Rational(1, 4), Rational(1, 4), Rational(1, 2)}, {0, 1, 1, 1, 0, 0, 1, 0, 1});
  EXPECT_EQ(cut_star_P_norm(w, CellPartition::discrete(3)).value, l1_norm(w));
}

TEST(Norms, HomogeneityAndTriangle) {
  Rng rng(139);
  for (int rep = 0; rep < 30; ++rep) {
    auto a = gen::random_signed_kernel(rng, 2, 3);
    auto b = gen::random_signed_kernel(rng, 2, 2);
    const Rational c(-5, 3);
    EXPECT_EQ(cut_star_norm(scaled(a, c)).value, abs(c) * cut_star_norm(a).value);
    EXPECT_EQ(boxplus_norm(scaled(a, c)).value, abs(c) * boxplus_norm(a).value);
    auto sum = added(a, b);
    EXPECT_LE(cut_star_norm(sum).value, cut_star_norm(a).value + cut_star_norm(b).value);
    EXPECT_LE(boxplus_norm(sum).value, boxplus_norm(a).value + boxplus_norm(b).value);
  }
}

TEST(Norms, BoxplusSandwichesCutStar) {
  Rng rng(149);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t r = rep % 2 ? 3 : 2;
    auto w = gen::random_signed_kernel(rng, r, 3);
    const auto cut = cut_star_norm(w).value;
    const auto box = boxplus_norm(w).value;
    EXPECT_LE(box / (1 << r), cut);
    EXPECT_LE(cut, box);
  }
}

TEST(Norms, RankOneBoxplus) {
  // W(x,y) = f(x) f(y) with mean-zero f: ‖W‖_⊞ = (∫|f|)²
  StepKernel<Rational> w(2, {Rational(1, 4), Rational(1, 4), Rational(1, 2)},
                         {1, 0, Rational(-1, 2), 0, 0, 0, Rational(-1, 2), 0, Rational(1, 4)});
  // f = (1, 0, -1/2): mean 1/4 - 1/4 = 0
  EXPECT_EQ(boxplus_norm(w).value, Rational(1, 4) * Rational(1, 4) * 4);
  // cut-* of a rank-one kernel is (max positive part)², here (1/4)²
  EXPECT_EQ(cut_star_norm(w).value, Rational(1, 16));
}

TEST(KR2, ConstantAndNonnegativeAndC4) {
  EXPECT_EQ(kr2_density(StepKernel<Rational>::constant(2, 1, 3)), 1);
  EXPECT_EQ(kr2_density(StepKernel<Rational>::constant(3, 1, 2)), 1);
  Rng rng(151);
  for (int rep = 0; rep < 80; ++rep) {
    const std::size_t r = rep % 2 ? 3 : 2;
    auto w = gen::random_signed_kernel(rng, r, r == 3 ? 2 : 3);
    const auto d = kr2_density(w);
    EXPECT_GE(d, 0);
    EXPECT_EQ(d, oracle::kr2(w));
  }
  // r = 2: the 4-cycle homomorphism density of a graph
  auto g = gen::random_graph(rng, 2, 6);
  Hypergraph c4(2, 4);
  c4.add_edge(std::vector<std::size_t>{0, 1});
  c4.add_edge(std::vector<std::size_t>{1, 2});
  c4.add_edge(std::vector<std::size_t>{2, 3});
  c4.add_edge(std::vector<std::size_t>{0, 3});
  EXPECT_EQ(kr2_density(edge_kernel(g)), ratio(static_cast<long>(oracle::hom_count(c4, g)), 1296L));
}

TEST(Sandwich, ConstantsAndZero) {
  auto one = sandwich_bounds(StepKernel<Rational>::constant(2, 1, 2));
  EXPECT_EQ(one.lower, Rational(1, 4));
  EXPECT_DOUBLE_EQ(one.upper, 1.0);
  EXPECT_TRUE(one.holds());
  auto zero = sandwich_bounds(StepKernel<Rational>::constant(3, 0, 2));
  EXPECT_EQ(zero.lower, 0);
  EXPECT_EQ(zero.upper, 0);
  EXPECT_TRUE(zero.holds());
  EXPECT_THROW(sandwich_bounds(StepKernel<Rational>::constant(2, 2, 1)), RangeError);
}

TEST(Sandwich, FloatPathAgrees) {
  Rng rng(157);
  for (int rep = 0; rep < 30; ++rep) {
    auto w = gen::random_signed_kernel(rng, 2, 4);
    auto exact = sandwich_bounds(w);
    auto flt = sandwich_bounds(convert<double>(w));
    EXPECT_TRUE(exact.holds());
    EXPECT_TRUE(flt.holds());
    EXPECT_NEAR(flt.cut, exact.cut.get_d(), 1e-12);
  }
}

TEST(CutDistance, IdentityTriangleAndGraphs) {
  Rng rng(163);
  for (int rep = 0; rep < 10; ++rep) {
    auto u = gen::random_colored_kernel(rng, 2, 2, 2);
    auto v = gen::random_colored_kernel(rng, 2, 3, 2);
    auto w = gen::random_colored_kernel(rng, 2, 2, 2);
    EXPECT_EQ(cut_distance(u, u).value, 0);
    const auto uv = cut_distance(u, v).value;
    EXPECT_EQ(uv, cut_distance(v, u).value);
    EXPECT_LE(cut_distance(u, w).value, uv + cut_distance(v, w).value);
  }
  Hypergraph k4(2, 4), k4m(2, 4);
  for (std::size_t i = 0; i < 6; ++i) k4.toggle_at(i);
  for (std::size_t i = 1; i < 6; ++i) k4m.toggle_at(i);
  // one edge differs: two cells of mass 1/16 with opposite colour shifts,
  // taken by the same box in both colours
  EXPECT_EQ(cut_distance(graph_to_kernel(k4), graph_to_kernel(k4m)).value, ratio(4L, 16L));
  EXPECT_THROW(cut_distance(graph_to_kernel(k4), gen::random_colored_kernel(rng, 2, 2, 2)), InvalidArgument);
}

TEST(UpperBounds, DominateExactQNorms) {
  Rng rng(167);
  for (int rep = 0; rep < 30; ++rep) {
    auto w = gen::random_signed_kernel(rng, 2, 5);
    const double ub = cut_P_upper_bound(w, 3);
    for_each_set_partition(5, 3, [&](const CellPartition& q) {
      EXPECT_LE(cut_star_P_norm(w, q).value.get_d(), ub + 1e-12);
      return true;
    });
    EXPECT_LE(cut_star_norm(w).value.get_d(), spectral_bound(w));
  }
}

TEST(SetPartitions, CountsMatchStirling) {
  EXPECT_EQ(for_each_set_partition(5, 5, [](const CellPartition&) { return true; }), 52u);
  EXPECT_EQ(for_each_set_partition(5, 4, [](const CellPartition&) { return true; }), 51u);
  EXPECT_EQ(count_set_partitions(5, 4), 51u);
  EXPECT_EQ(count_set_partitions(6, 2), 32u);
}

TEST(WeakRegularity, StepFunctionNeedsNoIterations) {
  Rng rng(173);
  auto w = gen::random_colored_kernel(rng, 2, 4, 2);
  RegularityOptions opt;
  opt.initial = CellPartition::discrete(4);
  auto res = weak_regularity(w, 0.05, opt);
  EXPECT_EQ(res.iterations, 0u);
  EXPECT_EQ(res.v, w);
  EXPECT_TRUE(res.certified);
  EXPECT_EQ(res.deviation, 0);
}

TEST(WeakRegularity, LargeEpsilonAcceptsTrivialPartition) {
  Rng rng(179);
  auto w = gen::random_colored_kernel(rng, 2, 4, 2);
  auto res = weak_regularity(w, 4.0);
  EXPECT_EQ(res.q.block_count(), 1u);
  EXPECT_EQ(res.iterations, 0u);
  EXPECT_TRUE(res.certified);
}

TEST(WeakRegularity, CertifiedAgainstExhaustiveProbes) {
  Rng rng(181);
  for (int rep = 0; rep < 8; ++rep) {
    auto w = gen::random_colored_kernel(rng, 2, 5, 2);
    const double eps = 0.3;
    auto res = weak_regularity(w, eps);
    EXPECT_TRUE(res.certified) << res.certificate;
    EXPECT_FALSE(res.cap_hit);
    EXPECT_LE(res.iterations, res.iteration_cap);
    EXPECT_TRUE(res.within_class_bound);
    double worst = 0;
    for_each_set_partition(5, 4, [&](const CellPartition& probe) {
      Rational total = 0;
      for (std::size_t a = 0; a < 2; ++a) {
        StepKernel<Rational> d = w.component(a);
        for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= res.v.values[a][i];
        total += oracle::cut_star_P(d, probe.labels());
      }
      worst = std::max(worst, total.get_d());
      return true;
    });
    EXPECT_LE(worst, eps);
    EXPECT_NEAR(worst, res.deviation, 1e-12);
  }
}
