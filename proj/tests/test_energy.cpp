#include <gtest/gtest.h>

#include <hypertest/energy.hpp>
#include <hypertest/kernel_ops.hpp>

#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"

using namespace hypertest;

namespace {

RealArray random_array(Rng& rng, std::size_t r, std::size_t s) {
  std::vector<Rational> v(ipow(s, r));
  for (auto& x : v) x = ratio(gen::rand_int(rng, -4, 4), 4L);
  return RealArray(r, s, v);
}

RealArray cut_array(std::size_t s) {
  std::vector<Rational> v(s * s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) v[i * s + j] = i == j ? 0 : 1;
  return RealArray(2, s, v);
}

Hypergraph complete(std::size_t r, std::size_t n) {
  Hypergraph h(r, n);
  for (std::size_t i = 0; i < h.colored().slot_count(); ++i) h.toggle_at(i);
  return h;
}

/// Literal reading of the definition: e_H(r; S_1..S_r) over ordered tuples
/// in [n]^r, summed against J over every index tuple, per colour.
Rational ggse_energy_brute(const ColoredHypergraph& h, const std::vector<RealArray>& js, std::size_t t,
                           const std::vector<std::size_t>& cls) {
  const std::size_t n = h.n(), r = h.r();
  Rational total = 0;
  for (std::size_t a = 0; a < h.k(); ++a) {
    for (std::size_t idx = 0; idx < ipow(t, r); ++idx) {
      const auto is = cell_of_index(idx, t, r);
      const Rational& jv = js[a].at(is);
      if (jv == 0) continue;
      unsigned long count = 0;
      for (std::size_t code = 0; code < ipow(n, r); ++code) {
        const auto u = cell_of_index(code, n, r);
        auto e = u;
        std::sort(e.begin(), e.end());
        if (std::adjacent_find(e.begin(), e.end()) != e.end()) continue;
        if (h.color(e) != a) continue;
        bool ok = true;
        for (std::size_t j = 0; j < r && ok; ++j) {
          std::vector<std::size_t> rest;
          for (std::size_t i = 0; i < r; ++i)
            if (i != j) rest.push_back(u[i]);
          std::sort(rest.begin(), rest.end());
          ok = cls[colex_rank(rest)] == is[j];
        }
        if (ok) ++count;
      }
      total += jv * Rational(count);
    }
  }
  return total / Rational(static_cast<unsigned long>(ipow(n, r)));
}

/// μ_φ and ρ straight from the definition, with φ given as labels of the
/// proper nonempty subsets of [r] in bitmask order.
DensityTensor tensor_brute(const Hypergraph& h, const PartitionFamily& p) {
  const std::size_t n = h.n(), r = h.r(), k = p.k, m = DensityTensor::subset_count(r);
  DensityTensor d;
  d.r = r;
  d.k = k;
  for (std::size_t s = 1; s < r; ++s) {
    std::vector<Rational> row(k, Rational(0));
    for_each_subset(n, s, [&](std::span<const std::size_t> set) { row[p.cls(set)] += 1; });
    for (auto& x : row) x /= Rational(static_cast<unsigned long>(ipow(n, s)));
    d.rho.push_back(row);
  }
  for (std::size_t phi = 0; phi < ipow(k, m); ++phi) {
    const auto lab = cell_of_index(phi, k, m);  // most significant digit first
    unsigned long count = 0;
    for (std::size_t code = 0; code < ipow(n, r); ++code) {
      const auto u = cell_of_index(code, n, r);
      auto e = u;
      std::sort(e.begin(), e.end());
      if (std::adjacent_find(e.begin(), e.end()) != e.end() || !h.has_edge(e)) continue;
      bool ok = true;
      for (std::size_t j = 0; j < m && ok; ++j) {
        const std::size_t mask = j + 1;
        std::vector<std::size_t> a;
        for (std::size_t i = 0; i < r; ++i)
          if ((mask >> i) & 1) a.push_back(u[i]);
        std::sort(a.begin(), a.end());
        ok = p.cls(a) == lab[m - 1 - j];
      }
      if (ok) ++count;
    }
    d.mu.push_back(Rational(count) / Rational(static_cast<unsigned long>(ipow(n, r))));
  }
  return d;
}

PartitionFamily random_family(Rng& rng, std::size_t r, std::size_t n, std::size_t k) {
  PartitionFamily p = PartitionFamily::uniform(r, n, k);
  for (auto& level : p.levels)
    for (auto& c : level) c = uniform_index(rng, k);
  return p;
}

}  // namespace

TEST(Gse, MaxCutOnCompleteGraph) {
  const auto g = gse_graph(complete(2, 4), cut_array(2));
  EXPECT_EQ(g.value, ratio(1L, 2L));
}

TEST(Gse, MatchesMaxCutOracle) {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = gen::random_graph(rng, 2, 7);
    const Rational n2(static_cast<unsigned long>(49));
    EXPECT_EQ(gse_graph(g, cut_array(2)).value, Rational(2 * oracle::maxcut(g)) / n2);
  }
}

TEST(Gse, ExactMatchesBruteForce) {
  Rng rng(22);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t r = rep % 3 == 0 ? 3 : 2;
    const std::size_t s = r == 3 ? 2 : 2 + rep % 2;
    const auto g = gen::random_graph(rng, r, 5);
    const auto j = random_array(rng, r, s);
    const auto res = gse_graph(g, j);
    EXPECT_EQ(res.value, oracle::gse(g, j.values, s));
    EXPECT_EQ(gse_energy(g, j, res.partition), res.value);
    const auto loc = gse_graph(g, j, GseMode::local);
    EXPECT_LE(loc.value, res.value);
    EXPECT_EQ(loc.certificate, "heuristic");
  }
}

TEST(Gse, SingleClass) {
  Rng rng(23);
  const auto g = gen::random_graph(rng, 3, 6);
  const auto j = RealArray::constant(3, 1, ratio(1L, 3L));
  EXPECT_EQ(gse_graph(g, j).value, ratio(static_cast<long>(6 * g.edge_count()), 216L) * ratio(1L, 3L));
}

TEST(Gse, KernelOfGraphAgreesWithGraph) {
  Rng rng(24);
  for (int rep = 0; rep < 8; ++rep) {
    const auto g = gen::random_graph(rng, 2, 4);
    const auto w = edge_kernel(g);
    const auto j = random_array(rng, 2, 2);
    const Rational exact = gse_graph(g, j).value;
    EXPECT_EQ(gse_kernel(w, j, KernelGseMode::vertex).value, exact);
    const auto frac = gse_kernel(w, j, KernelGseMode::fractional);
    EXPECT_EQ(frac.certificate, "grid");
    EXPECT_LE(frac.value, exact);
    EXPECT_GE(frac.upper + 1e-12, exact.get_d());
  }
}

TEST(Gse, SampleEnergyMatchesBruteForce) {
  Rng rng(25);
  for (int rep = 0; rep < 10; ++rep) {
    const auto u = gen::random_signed_kernel(rng, 2, 2);
    const auto j = random_array(rng, 2, 2);
    const auto smp = draw_kernel_sample(u.weights, 5, rng);
    // explicit q-point weighted graph, all 2^q assignments
    const std::size_t q = smp.q();
    Rational best;
    bool first = true;
    for (std::size_t code = 0; code < ipow(2, q); ++code) {
      const auto a = cell_of_index(code, 2, q);
      Rational e = 0;
      for (std::size_t x = 0; x < q; ++x)
        for (std::size_t y = 0; y < q; ++y) {
          if (x == y) continue;
          const std::vector<std::size_t> uc{smp.classes[x], smp.classes[y]}, jc{a[x], a[y]};
          e += u.at(uc) * j.at(jc);
        }
      if (first || e > best) best = e, first = false;
    }
    const auto res = gse_of_sample(u, j, smp);
    EXPECT_EQ(res.value, best / Rational(static_cast<unsigned long>(q * q)));
  }
}

TEST(Gse, SamplingCheckStaysBelowBound) {
  const StepKernel<Rational> u(2, {ratio(1L, 2L), ratio(1L, 2L)}, {0, 1, 1, 0});
  const auto rep = gse_sampling_check(u, cut_array(2), 30, 0.5, 40, 11);
  EXPECT_FALSE(rep.violation);
  EXPECT_EQ(rep.gamma_certificate, "grid");
  EXPECT_FALSE(rep.guaranteed_regime);
}

TEST(Ggse, ReducesToGseForGraphs) {
  Rng rng(26);
  for (int rep = 0; rep < 10; ++rep) {
    const auto g = gen::random_graph(rng, 2, 5);
    const auto j = random_array(rng, 2, 2);
    const std::vector<RealArray> js{j, RealArray::constant(2, 2, 0)};
    EXPECT_EQ(ggse(g.colored(), js, 2).value, gse_graph(g, j).value);
  }
}

TEST(Ggse, EnergyMatchesDefinition) {
  Rng rng(27);
  for (int rep = 0; rep < 10; ++rep) {
    const auto h = gen::random_colored_graph(rng, 3, 5, 2);
    const std::vector<RealArray> js{random_array(rng, 3, 2), random_array(rng, 3, 2)};
    std::vector<std::size_t> cls(binomial(5, 2));
    for (auto& c : cls) c = uniform_index(rng, 2);
    EXPECT_EQ(ggse_energy(h, js, cls), ggse_energy_brute(h, js, 2, cls));
  }
}

TEST(Ggse, ExactDominatesLocalAndRejectsLargeArrays) {
  Rng rng(28);
  const auto h = gen::random_colored_graph(rng, 3, 5, 2);
  const std::vector<RealArray> js{random_array(rng, 3, 2), random_array(rng, 3, 2)};
  const auto ex = ggse(h, js, 2);
  EXPECT_EQ(ggse_energy(h, js, ex.partition), ex.value);
  EXPECT_LE(ggse(h, js, 2, GseMode::local).value, ex.value);
  const std::vector<RealArray> big{RealArray::constant(3, 2, 2), js[1]};
  EXPECT_THROW(ggse(h, big, 2), RangeError);
}

TEST(Tensor, MatchesDefinition) {
  Rng rng(29);
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t r = rep % 2 ? 3 : 2;
    const auto h = gen::random_graph(rng, r, 5);
    const auto p = random_family(rng, r, 5, 2);
    EXPECT_EQ(density_tensor_of(h, p), tensor_brute(h, p));
  }
}

TEST(Tensor, SingleClassValues) {
  Rng rng(30);
  const auto h = gen::random_graph(rng, 3, 6);
  const auto d = density_tensor_of(h, PartitionFamily::uniform(3, 6, 1));
  EXPECT_EQ(d.mu.size(), 1u);
  EXPECT_EQ(d.mu[0], ratio(static_cast<long>(6 * h.edge_count()), 216L));
  EXPECT_EQ(d.rho[0][0], Rational(1));
  EXPECT_EQ(d.rho[1][0], ratio(15L, 36L));
}

TEST(Tensor, SearchRoundTrip) {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t r = rep % 2 ? 3 : 2;
    const std::size_t n = r == 3 ? 5 : 6;
    const auto h = gen::random_graph(rng, r, n);
    const auto p = random_family(rng, r, n, 2);
    const auto psi = density_tensor_of(h, p);
    const auto found = satisfies_tensor(h, psi, 0);
    ASSERT_TRUE(found.has_value());
    EXPECT_EQ(density_tensor_of(h, *found), psi);
    EXPECT_LE(found->levels, p.levels);
  }
}

TEST(Tensor, InfeasibleTarget) {
  Rng rng(32);
  const auto h = gen::random_graph(rng, 2, 5);
  auto psi = density_tensor_of(h, PartitionFamily::uniform(2, 5, 2));
  psi.mu.assign(psi.mu.size(), 0);
  psi.mu[3] = 1;
  EXPECT_FALSE(satisfies_tensor(h, psi, 0).has_value());
}

TEST(Tensor, ToleranceAccepts) {
  Rng rng(33);
  const auto h = gen::random_graph(rng, 2, 6);
  auto psi = density_tensor_of(h, random_family(rng, 2, 6, 2));
  for (auto& m : psi.mu) m += ratio(1L, 100L);
  EXPECT_FALSE(satisfies_tensor(h, psi, 0).has_value());
  EXPECT_TRUE(satisfies_tensor(h, psi, ratio(1L, 50L)).has_value());
}

TEST(EnergyIo, RoundTrips) {
  Rng rng(34);
  const auto j = random_array(rng, 3, 2);
  std::stringstream ss;
  write_array(ss, j);
  EXPECT_EQ(read_array(ss).values, j.values);
  const auto d = density_tensor_of(gen::random_graph(rng, 3, 5), random_family(rng, 3, 5, 2));
  std::stringstream ts;
  write_tensor(ts, d);
  EXPECT_EQ(read_tensor(ts), d);
  std::istringstream bad("2 2\n1 2 3\n");
  EXPECT_THROW(read_array(bad), ParseError);
}
