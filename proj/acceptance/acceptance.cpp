#include <hypertest/bounds.hpp>
#include <hypertest/density.hpp>
#include <hypertest/energy.hpp>
#include <hypertest/kernel_ops.hpp>
#include <hypertest/nd.hpp>
#include <hypertest/norms.hpp>
#include <hypertest/regularity.hpp>
#include <hypertest/sampling.hpp>
#include <hypertest/transfer.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "oracles.hpp"

using namespace hypertest;

namespace {

constexpr double kSandwichSeconds = 120;
constexpr double kCountingSeconds = 60;
constexpr double kConcentrationSeconds = 120;
constexpr double kGseSamplingSeconds = 180;
constexpr double kTransferSeconds = 300;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

Hypergraph complete(std::size_t r, std::size_t n) {
  Hypergraph h(r, n);
  for (std::size_t i = 0; i < h.colored().slot_count(); ++i) h.toggle_at(i);
  return h;
}

Hypergraph random_bipartite(Rng& rng, std::size_t n, double p) {
  Hypergraph g(2, n);
  for (std::size_t u = 0; u < n / 2; ++u)
    for (std::size_t v = n / 2; v < n; ++v)
      if (uniform01(rng) < p) g.add_edge(std::vector<std::size_t>{u, v});
  return relabel(g, gen::random_permutation(rng, n));
}

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

std::vector<std::size_t> compact(std::vector<std::size_t> labels) {
  std::vector<std::size_t> seen;
  for (auto& l : labels) {
    auto it = std::find(seen.begin(), seen.end(), l);
    if (it == seen.end()) it = seen.insert(seen.end(), l);
    l = static_cast<std::size_t>(it - seen.begin());
  }
  return labels;
}

StepKernel<Rational> random_bounded_kernel(Rng& rng, std::size_t r, std::size_t t) {
  auto w = gen::random_signed_kernel(rng, r, t);
  w.weights = gen::random_weights(rng, t);
  return w;
}

Verdict sandwich() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(2024, 1));
  std::size_t bad = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t r = i % 2 ? 3 : 2;
    const std::size_t t = 1 + static_cast<std::size_t>(i / 2) % 4;
    if (!sandwich_bounds(random_bounded_kernel(rng, r, t)).holds()) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs <= kSandwichSeconds,
          "200 kernels, violations " + std::to_string(bad) + ", " + fmt(secs) + " s"};
}

Verdict norm_relations() {
  Rng rng(derive_seed(2024, 1));
  std::size_t bad = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t r = i % 2 ? 3 : 2;
    const std::size_t t = 1 + static_cast<std::size_t>(i / 2) % 4;
    const auto w = random_bounded_kernel(rng, r, t);
    const auto cut = cut_star_norm(w).value;
    const auto box = boxplus_norm(w).value;
    if (box / (1 << r) > cut || cut > box) ++bad;
    // a random coarse partition, one of its refinements, and the extremes
    std::vector<std::size_t> coarse(t), fine(t);
    for (std::size_t c = 0; c < t; ++c) {
      coarse[c] = uniform_index(rng, 2);
      fine[c] = 2 * coarse[c] + uniform_index(rng, 2);
    }
    const auto pc = cut_star_P_norm(w, CellPartition(compact(coarse))).value;
    const auto pf = cut_star_P_norm(w, CellPartition(compact(fine))).value;
    const auto pd = cut_star_P_norm(w, CellPartition::discrete(t)).value;
    if (cut > pc || pc > pf || pf > pd) ++bad;
  }
  return {bad == 0, "200 kernels, violations " + std::to_string(bad)};
}

Verdict counting() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(2024, 3));
  std::size_t bad = 0, coupling_bad = 0;
  for (int i = 0; i < 50; ++i) {
    const auto u = gen::random_colored_kernel(rng, 2, 2, 2);
    const auto w = gen::random_colored_kernel(rng, 2, 2, 2);
    const auto rep = counting_lemma_check(u, w, 3);
    if (!rep.holds) ++bad;
    if (!rep.coupling_exact) ++coupling_bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && coupling_bad == 0 && secs <= kCountingSeconds,
          "50 pairs, violations " + std::to_string(bad) + ", inexact couplings " + std::to_string(coupling_bad) +
              ", " + fmt(secs) + " s"};
}

Verdict concentration() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(2024, 4));
  const auto u = gen::random_graphon(rng, 2, 3);
  Hypergraph c4(2, 4);
  c4.add_edge(std::vector<std::size_t>{0, 1});
  c4.add_edge(std::vector<std::size_t>{1, 2});
  c4.add_edge(std::vector<std::size_t>{2, 3});
  c4.add_edge(std::vector<std::size_t>{0, 3});
  const auto rep = concentration_experiment(u, c4, 500, 0.1, 2000, derive_seed(2024, 40));
  const double secs = seconds_since(t0);
  return {!rep.violation && secs <= kConcentrationSeconds,
          "rate " + fmt(rep.rate) + " vs bound " + fmt(rep.bound) + " + 3se " + fmt(3 * rep.std_error) + ", " +
              fmt(secs) + " s"};
}

Verdict regularity() {
  Rng rng(derive_seed(2024, 5));
  const double eps = 0.3;
  const std::size_t cap = static_cast<std::size_t>(std::ceil(4.0 * 2 * 2 / (eps * eps)));
  std::size_t bad = 0;
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const auto w = gen::random_colored_kernel(rng, 2, 2 + static_cast<std::size_t>(i) % 4, 2);
    const auto res = weak_regularity(w, eps);
    worst = std::max(worst, res.deviation);
    const bool ok = res.certified && res.certificate == "exact-probes" && res.deviation <= eps &&
                    res.within_class_bound && !res.cap_hit && res.iterations <= cap;
    if (!ok) ++bad;
  }
  return {bad == 0, "50 kernels, failures " + std::to_string(bad) + ", worst deviation " + fmt(worst) +
                        ", iteration cap " + std::to_string(cap)};
}

Verdict gse() {
  Rng rng(derive_seed(2024, 6));
  std::size_t bad = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t r = i % 4 == 0 ? 3 : 2;
    const std::size_t s = 1 + static_cast<std::size_t>(i) % 3;
    const std::size_t n = r == 3 ? 3 + static_cast<std::size_t>(i) % 4 : 2 + static_cast<std::size_t>(i) % 9;
    const std::size_t nn = std::min<std::size_t>(n, s == 3 ? 8 : 10);
    const auto g = gen::random_graph(rng, r, nn);
    const auto j = random_array(rng, r, s);
    if (gse_graph(g, j).value != oracle::gse(g, j.values, s)) ++bad;
  }
  const bool k4 = gse_graph(complete(2, 4), cut_array(2)).value == ratio(1L, 2L);
  std::size_t ggse_bad = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i) % 7;
    const std::size_t s = 2 + static_cast<std::size_t>(i) % 2;
    const auto g = gen::random_graph(rng, 2, n);
    const auto j = random_array(rng, 2, s);
    const std::vector<RealArray> js{j, RealArray::constant(2, s, 0)};
    if (ggse(g.colored(), js, s).value != gse_graph(g, j).value) ++ggse_bad;
  }
  return {bad == 0 && k4 && ggse_bad == 0, "gse mismatches " + std::to_string(bad) + "/100, K4 maxcut " +
                                               (k4 ? "1/2" : "wrong") + ", ggse mismatches " +
                                               std::to_string(ggse_bad) + "/20"};
}

Verdict gse_sampling() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(2024, 7));
  const auto u = gen::random_graphon(rng, 2, 3);
  const auto j = random_array(rng, 2, 2);
  const auto rep = gse_sampling_check(u, j, 400, 0.25, 300, derive_seed(2024, 70));
  const double secs = seconds_since(t0);
  return {!rep.violation && secs <= kGseSamplingSeconds,
          "rate " + fmt(rep.rate) + " vs bound " + fmt(rep.bound) + " + 3se " + fmt(3 * rep.std_error) +
              ", Γ certificate " + rep.gamma_certificate + ", " + fmt(secs) + " s"};
}

Verdict nd_end_to_end() {
  Rng rng(derive_seed(2024, 8));
  const NDParameter f{maxcut_witness()};
  std::size_t bad = 0;
  for (int i = 0; i < 45; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i) % 9;
    const auto g = gen::random_graph(rng, 2, n);
    const auto res = nd_eval(f, g);
    if (!res.exact || res.value != ratio(static_cast<long>(2 * oracle::maxcut(g)), static_cast<long>(n * n))) ++bad;
  }
  const auto g = random_bipartite(rng, 60, 0.5);
  const auto rep = tester(f, 0.2, g, 25, 200, derive_seed(2024, 80));
  return {bad == 0 && rep.exact && rep.rate < 0.2,
          "exact mismatches " + std::to_string(bad) + "/45, tester failure rate " + fmt(rep.rate) + " < 0.2"};
}

Verdict transfer() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(2024, 9));
  const auto g = random_bipartite(rng, 200, 0.5);
  const auto smp = random_subset(rng, 200, 50);
  const auto fit = nd_eval(NDParameter{maxcut_witness()}, induced_subgraph(g, smp));
  TransferOptions opt;
  opt.seed = derive_seed(2024, 90);
  const auto rep = coloring_transfer(g, smp, fit.witness.refined, 2, 0.1, opt);
  const double secs = seconds_since(t0);
  const bool ok = fit.exact && rep.certified && rep.discrepancy <= rep.budget && rep.pattern_violations == 0 &&
                  secs <= kTransferSeconds;
  return {ok, std::to_string(rep.stages.size()) + " stages" +
                  (rep.certified ? " certified" : ", failed at " + rep.failed_stage) + ", discrepancy " +
                  fmt(rep.discrepancy) + " vs budget " + fmt(rep.budget) + ", " + fmt(secs) + " s"};
}

Verdict tensor_round_trip() {
  Rng rng(derive_seed(2024, 10));
  std::size_t bad = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t r = 2 + static_cast<std::size_t>(i) % 2;
    const std::size_t n = r + static_cast<std::size_t>(i / 2) % (8 - r);
    const std::size_t k = 1 + static_cast<std::size_t>(i / 4) % 2;
    const auto h = gen::random_graph(rng, r, n);
    PartitionFamily p = PartitionFamily::uniform(r, n, k);
    for (auto& level : p.levels)
      for (auto& c : level) c = uniform_index(rng, k);
    const auto psi = density_tensor_of(h, p);
    const auto found = satisfies_tensor(h, psi, 0);
    if (!found || density_tensor_of(h, *found) != psi) ++bad;
  }
  return {bad == 0, "100 instances, unsatisfied " + std::to_string(bad)};
}

Verdict bounds() {
  bool ok = pi_bound(2, ratio(1L, 10L), 2, 2, 2) == ratio(1L, 81920L);
  for (std::size_t r = 1; r <= 4; ++r) {
    BoundInputs in;
    in.r = r;
    const auto rep = bound_calculator(in);
    ok = ok && rep.qf.height == 4 * (r - 1) + 1 && rep.qtv.height == 4 * (r - 1) && rep.qf_linear.height == 3;
  }
  BoundInputs a, b;
  a.eps = a.delta = ratio(1L, 5L);
  b.eps = b.delta = ratio(1L, 10L);
  for (std::size_t r = 1; r <= 4; ++r) {
    a.r = b.r = r;
    const auto ra = bound_calculator(a), rb = bound_calculator(b);
    ok = ok && ra.treg.value <= rb.treg.value && ra.qcut.value <= rb.qcut.value && ra.qtv.value <= rb.qtv.value &&
         ra.qf.value <= rb.qf.value && ra.pi > rb.pi;
  }
  return {ok, "Π(2,1/10,2,2,2) = " + pi_bound(2, ratio(1L, 10L), 2, 2, 2).get_str() +
                  ", heights 4(r-1)+1 / 4(r-1) / 3, monotone in ε and δ"};
}

Verdict sample_vs_kernel() {
  Rng rng(derive_seed(2024, 12));
  std::size_t checked = 0, eq1_bad = 0, eq2_bad = 0, vacuous = 0;
  for (std::size_t r = 2; r <= 3; ++r)
    for (std::size_t n = r; n <= 8; ++n)
      for (int rep = 0; rep < 3; ++rep) {
        const auto g = gen::random_graph(rng, r, n);
        const auto w = graph_to_kernel(g);
        for (std::size_t q = 1; q <= std::min<std::size_t>(3, n); ++q) {
          const auto mg = sample_distribution(g.colored(), q);
          auto mw = exact_sample_distribution(w, q);
          const std::size_t pairs = q * (q - 1) / 2;
          // every F on q vertices: all 2^{C(q,r)} colourings of the slots
          const std::size_t slots = binomial(q, r);
          for (std::size_t mask = 0; mask < (std::size_t{1} << slots); ++mask) {
            ColoredHypergraph f(r, q, 2, Hypergraph::kNonEdge);
            for (std::size_t s = 0; s < slots; ++s)
              if ((mask >> s) & 1) f.set_color_at(s, Hypergraph::kEdge);
            const Rational gap = abs(mg.mass(f) - mw.mass(f));
            ++checked;
            if (n <= pairs) {
              ++vacuous;
              continue;
            }
            if (gap > ratio(static_cast<long>(pairs), static_cast<long>(n - pairs))) ++eq1_bad;
          }
          mw.k = mg.k;
          const Rational rhs = rational_pow(Rational(2), ipow(q, r)) * ratio(static_cast<long>(q * q), static_cast<long>(n));
          if (tv_distance(mw, mg) > rhs) ++eq2_bad;
        }
      }
  return {eq1_bad == 0 && eq2_bad == 0, std::to_string(checked) + " (F, G) pairs, first inequality violations " +
                                            std::to_string(eq1_bad) + " (" + std::to_string(vacuous) +
                                            " with n ≤ C(q,2) hold vacuously), second inequality violations " +
                                            std::to_string(eq2_bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"sandwich", sandwich},
      {"norm relations", norm_relations},
      {"counting lemma", counting},
      {"concentration", concentration},
      {"weak regularity", regularity},
      {"ground state energy", gse},
      {"GSE sampling", gse_sampling},
      {"ND end-to-end", nd_end_to_end},
      {"coloring transfer", transfer},
      {"tensor round trip", tensor_round_trip},
      {"bound calculator", bounds},
      {"sample vs kernel laws", sample_vs_kernel},
  };
  int failures = 0;
  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::stoul(argv[a]));
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), i + 1) == selected.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
