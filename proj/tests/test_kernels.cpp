#include <gtest/gtest.h>

#include <hypertest/kernel.hpp>
#include <hypertest/kernel_io.hpp>
#include <hypertest/kernel_ops.hpp>

#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"

using namespace hypertest;

namespace {

ColoredHypergraph all_slots(std::size_t r, std::size_t q, std::size_t k, std::size_t code) {
  ColoredHypergraph f(r, q, k);
  for (std::size_t i = 0; i < f.slot_count(); ++i) {
    f.set_color_at(i, static_cast<Color>(code % k));
    code /= k;
  }
  return f;
}

/// t(F, W_G) by summing over all n^q vertex maps; a map contributes when
/// every slot of F lands on a genuine r-set of G carrying F's colour.
Rational kernel_density_by_maps(const ColoredHypergraph& f, const ColoredHypergraph& g) {
  const std::size_t q = f.n(), n = g.n();
  std::uint64_t hits = 0;
  const std::size_t total = ipow(n, q);
  for (std::size_t code = 0; code < total; ++code) {
    auto img = cell_of_index(code, n, q);
    bool ok = true;
    for_each_subset(q, f.r(), [&](std::span<const std::size_t> e) {
      std::vector<std::size_t> im;
      for (auto v : e) im.push_back(img[v]);
      std::sort(im.begin(), im.end());
      if (std::adjacent_find(im.begin(), im.end()) != im.end() || g.color(im) != f.color(e)) ok = false;
    });
    if (ok) ++hits;
  }
  return ratio(static_cast<unsigned long>(hits), static_cast<unsigned long>(total));
}

}  // namespace

TEST(GraphToKernel, EdgelessAndComplete) {
  Hypergraph empty(2, 4);
  auto w = graph_to_kernel(empty);
  ASSERT_EQ(w.k, 3u);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(w.values[2][i * 4 + j], i == j ? 1 : 0);
      EXPECT_EQ(w.values[Hypergraph::kNonEdge][i * 4 + j], i == j ? 0 : 1);
    }
  Hypergraph k4(2, 4);
  for (std::size_t i = 0; i < 6; ++i) k4.toggle_at(i);
  auto e = edge_kernel(k4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(e.values[i * 4 + j], i == j ? 0 : 1);
}

TEST(KernelDensity, ConstantKernelIsProduct) {
  ColoredStepKernel<Rational> w(2, {Rational(1, 3), Rational(2, 3)},
                                {std::vector<Rational>(4, Rational(1, 4)), std::vector<Rational>(4, Rational(3, 4))});
  for (std::size_t code = 0; code < 8; ++code) {
    auto f = all_slots(2, 3, 2, code);
    Rational expected = 1;
    for (std::size_t i = 0; i < 3; ++i) expected *= f.color_at(i) == 0 ? Rational(1, 4) : Rational(3, 4);
    EXPECT_EQ(t_density_kernel(f, w), expected);
  }
}

TEST(KernelDensity, SumsToOneOverAllF) {
  Rng rng(61);
  for (std::size_t r : {2u, 3u}) {
    auto w = gen::random_colored_kernel(rng, r, 3, 2);
    Rational total = 0;
    const std::size_t slots = binomial(3, r);
    for (std::size_t code = 0; code < (std::size_t{1} << slots); ++code)
      total += t_density_kernel(all_slots(r, 3, 2, code), w);
    EXPECT_EQ(total, 1);
  }
}

TEST(KernelDensity, GraphKernelMatchesMapSummation) {
  Rng rng(67);
  for (std::size_t r : {2u, 3u}) {
    auto g = gen::random_colored_graph(rng, r, 5, 2);
    auto w = graph_to_kernel(g);
    const std::size_t q = r + 1;
    const std::size_t slots = binomial(q, r);
    for (std::size_t code = 0; code < (std::size_t{1} << slots); ++code) {
      auto f = all_slots(r, q, 2, code);
      EXPECT_EQ(t_density_kernel(f, w), kernel_density_by_maps(f, g));
    }
  }
}

TEST(KernelSampling, DeterministicKernelGivesBlowUp) {
  // two classes; colour 0 exactly across classes
  ColoredStepKernel<Rational> w(2, {Rational(1, 2), Rational(1, 2)},
                                {{0, 1, 1, 0}, {1, 0, 0, 1}});
  Rng rng(71);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = sample_from_kernel(w, 6, rng);
    // colour-0 edges form a complete bipartite graph, so no colour-0 triangle
    for_each_subset(6, 3, [&](std::span<const std::size_t> s) {
      int c0 = 0;
      for_each_subset(3, 2, [&](std::span<const std::size_t> e) {
        std::vector<std::size_t> pair{s[e[0]], s[e[1]]};
        if (g.color(pair) == 0) ++c0;
      });
      EXPECT_NE(c0, 3);
    });
  }
}

TEST(KernelSampling, SeedDeterminism) {
  Rng rng(73);
  auto w = gen::random_colored_kernel(rng, 3, 3, 3);
  Rng a(5), b(5);
  EXPECT_EQ(sample_from_kernel(w, 6, a), sample_from_kernel(w, 6, b));
}

TEST(KernelSampling, EmpiricalLawMatchesExactLaw) {
  Rng rng(79);
  auto w = gen::random_colored_kernel(rng, 2, 2, 2);
  auto d = exact_sample_distribution(w, 2);
  const int trials = 100000;
  int zeros = 0;
  for (int i = 0; i < trials; ++i)
    if (sample_from_kernel(w, 2, rng).color_at(0) == 0) ++zeros;
  const double p = d.atoms[{0}].get_d();
  const double se = std::sqrt(p * (1 - p) / trials);
  EXPECT_LE(std::fabs(zeros / static_cast<double>(trials) - p), 4 * se + 1e-12);
}

TEST(KernelSampling, LoopRejection) {
  Hypergraph k3(2, 3);
  for (std::size_t i = 0; i < 3; ++i) k3.toggle_at(i);
  auto w = graph_to_kernel(k3);
  Rng rng(83);
  // three distinct classes are forced, so every accepted sample is K3
  for (int rep = 0; rep < 20; ++rep) EXPECT_EQ(sample_from_kernel(w, 3, rng).count(0), 3u);
}

TEST(ExactDistribution, TwoAtomsAtQEqualsR) {
  Rng rng(89);
  auto w = gen::random_colored_kernel(rng, 2, 3, 2);
  auto d = exact_sample_distribution(w, 2);
  EXPECT_EQ(d.atoms.size(), 2u);
  EXPECT_EQ(d.total(), 1);
  EXPECT_EQ(d.atoms[{0}], t_density_kernel(all_slots(2, 2, 2, 0), w));
}

TEST(ExactDistribution, AgreesWithDensityPerAtom) {
  Rng rng(97);
  auto w = gen::random_colored_kernel(rng, 3, 2, 3);
  auto d = exact_sample_distribution(w, 4);
  EXPECT_EQ(d.total(), 1);
  for (const auto& [key, p] : d.atoms) {
    ColoredHypergraph f(3, 4, 3);
    for (std::size_t i = 0; i < key.size(); ++i) f.set_color_at(i, key[i]);
    EXPECT_EQ(p, t_density_kernel(f, w));
  }
}

TEST(ExactDistribution, GraphKernelCarriesLoopMass) {
  Rng rng(101);
  auto g = gen::random_graph(rng, 2, 5);
  auto d = exact_sample_distribution(graph_to_kernel(g), 3);
  EXPECT_EQ(d.total(), 1);
  EXPECT_EQ(d.loop_mass, 1 - ratio(60L, 125L));
  // conditioned on avoiding loops the law equals the labelled sample law
  auto c = d.conditioned();
  auto s = sample_distribution(g.colored(), 3);
  EXPECT_EQ(c.atoms, s.atoms);
}

TEST(StepAverage, DiscreteTrivialIdempotent) {
  Rng rng(103);
  auto w = gen::random_colored_kernel(rng, 2, 4, 3);
  EXPECT_EQ(step_average(w, CellPartition::discrete(4)), w);
  auto avg = step_average(w, CellPartition::trivial(4));
  for (std::size_t a = 0; a < 3; ++a) {
    Rational mean = 0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) mean += w.weights[i] * w.weights[j] * w.values[a][i * 4 + j];
    for (const auto& v : avg.values[a]) EXPECT_EQ(v, mean);
  }
  CellPartition q({0, 1, 0, 1});
  auto once = step_average(w, q);
  EXPECT_EQ(step_average(once, q), once);
  once.validate();  // simplex and symmetry survive averaging
}

TEST(StepAverage, PlainKernelPreservesIntegral) {
  Rng rng(107);
  auto w = gen::random_signed_kernel(rng, 3, 3);
  CellPartition q({0, 0, 1});
  auto c = coarsen(w, q);
  Rational a = 0, b = 0;
  for (std::size_t idx = 0; idx < w.values.size(); ++idx) a += oracle::cell_mass(w, cell_of_index(idx, 3, 3));
  for (std::size_t idx = 0; idx < c.values.size(); ++idx) b += oracle::cell_mass(c, cell_of_index(idx, 2, 3));
  EXPECT_EQ(a, b);
}

TEST(Kernel, ValidationRejectsBadInput) {
  EXPECT_THROW(StepKernel<Rational>(2, {Rational(1, 2), Rational(1, 3)}, std::vector<Rational>(4, 0)),
               InvalidArgument);
  EXPECT_THROW(StepKernel<Rational>(2, {Rational(1, 2), Rational(1, 2)}, {0, 1, 0, 0}), InvalidArgument);
  EXPECT_THROW(ColoredStepKernel<Rational>(2, {Rational(1)}, {{Rational(1, 2)}, {Rational(1, 3)}}),
               InvalidArgument);
}

TEST(Kernel, CommonRefinementAlignsBreakpoints) {
  StepKernel<Rational> a(2, {Rational(1, 3), Rational(2, 3)}, {1, 0, 0, 1});
  StepKernel<Rational> b(2, {Rational(1, 2), Rational(1, 2)}, {0, 1, 1, 0});
  auto [x, y] = align(a, b);
  ASSERT_EQ(x.t, 3u);
  EXPECT_EQ(x.weights, (std::vector<Rational>{Rational(1, 3), Rational(1, 6), Rational(1, 2)}));
  EXPECT_EQ(x.weights, y.weights);
  auto d = subtract(a, a);
  for (const auto& v : d.values) EXPECT_EQ(v, 0);
}

TEST(KernelIO, RoundTripAndErrors) {
  Rng rng(109);
  auto w = gen::random_colored_kernel(rng, 2, 3, 3);
  w.has_loop_color = true;
  std::istringstream in(kernel_text(w));
  auto back = read_kernel(in);
  ASSERT_TRUE(back.colored);
  EXPECT_EQ(back.kernel, w);
  EXPECT_EQ(kernel_text(back.kernel), kernel_text(w));

  std::istringstream plain("2 2 1\n0.5 1/2\n-1 0.25\n0.25 1\n");
  auto p = read_kernel(plain);
  EXPECT_FALSE(p.colored);
  EXPECT_EQ(p.plain.values[1], Rational(1, 4));

  std::istringstream bad("2 2 1\n1/2 1/2\n0 1\nx 0\n");
  try {
    read_kernel(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 4u);
  }
  std::istringstream asym("2 2 1\n1/2 1/2\n0 1\n0 0\n");
  EXPECT_THROW(read_kernel(asym), ParseError);
}
