#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hypertest/common.hpp"
#include "hypertest/hypergraph.hpp"
#include "hypertest/rational.hpp"

namespace hypertest {

/// Witness g of an ND parameter. `eval` reads a refined colouring whose
/// palette is [base colours] x [k] (colour a*k + b). `exact_max`, when set,
/// returns max g over all k-colourings of a base graph together with an
/// attaining refined colouring.
struct WitnessParameter {
  std::string name;
  std::size_t k = 2;
  std::function<Rational(const ColoredHypergraph&)> eval;
  std::function<std::pair<Rational, ColoredHypergraph>(const ColoredHypergraph&)> exact_max;
  /// q_g(ε); empty when unknown
  std::function<std::size_t(double)> sample_complexity;
  /// Base colours whose slots get refined; empty means all.
  std::vector<bool> refined_base_colors;
};

/// f(G) = max over k-colourings of g.
struct NDParameter {
  WitnessParameter witness;
};

enum class NdMode { exact, search };

struct NdOptions {
  NdMode mode = NdMode::exact;
  bool use_reduction = true;
  std::uint64_t guard = default_guards().enumeration;
  std::size_t restarts = 8;
  std::size_t max_sweeps = 50;
  std::uint64_t seed = 1;
};

struct NdResult {
  Rational value = 0;
  Coloring witness;
  bool exact = true;
  std::string certificate;  // "reduction", "enumeration" or "heuristic"
  std::uint64_t evaluations = 0;
};

namespace detail {

inline ColoredHypergraph uniform_refinement(const ColoredHypergraph& base, std::size_t k,
                                            Color sub = 0) {
  ColoredHypergraph out(base.r(), base.n(), base.k() * k);
  for (std::size_t i = 0; i < base.slot_count(); ++i)
    out.set_color_at(i, Coloring::encode(base.color_at(i), sub, k));
  return out;
}

/// Vertex 2-partition (bit v = side of v) maximising the number of edges
/// of colour `edge` across it. Bipartite inputs are settled by a BFS
/// 2-colouring; otherwise all 2^{n-1} partitions are walked in Gray order.
inline std::pair<std::size_t, std::vector<char>> max_cut(const ColoredHypergraph& g, Color edge,
                                                         std::uint64_t guard) {
  const std::size_t n = g.n();
  std::vector<std::vector<std::size_t>> adj(n);
  std::size_t m = 0;
  for_each_subset(n, 2, [&](std::span<const std::size_t> s) {
    if (g.color(s) != edge) return;
    adj[s[0]].push_back(s[1]);
    adj[s[1]].push_back(s[0]);
    ++m;
  });
  std::vector<char> side(n, -1);
  bool bipartite = true;
  for (std::size_t root = 0; root < n && bipartite; ++root) {
    if (side[root] != -1) continue;
    side[root] = 0;
    std::vector<std::size_t> stack{root};
    while (!stack.empty() && bipartite) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto u : adj[v]) {
        if (side[u] == -1) {
          side[u] = static_cast<char>(1 - side[v]);
          stack.push_back(u);
        } else if (side[u] == side[v]) {
          bipartite = false;
          break;
        }
      }
    }
  }
  if (bipartite) return {m, side};

  if (n > 63) throw GuardExceeded("max_cut: graph too large for exhaustive search");
  check_guard(sat_pow(2, n - 1), guard, "max_cut");
  std::vector<char> cur(n, 0);
  std::size_t cut = 0, best = 0;
  std::vector<char> best_side = cur;
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto v = static_cast<std::size_t>(std::countr_zero(i)) + 1;
    for (auto u : adj[v]) {
      if (cur[u] == cur[v]) ++cut;
      else --cut;
    }
    cur[v] = static_cast<char>(1 - cur[v]);
    if (cut > best) {
      best = cut;
      best_side = cur;
    }
  }
  return {best, best_side};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reference witnesses

/// Max-cut as an ND parameter (r = 2, k = 2). Let B be the set of pairs
/// coloured with second coordinate 1 and B* the complete bipartite pair set
/// closest to B. Then g = 2 (|E ∩ B| − |B Δ B*|) / n², and max g over all
/// colourings is the max-cut density 2·maxcut/n².
inline WitnessParameter maxcut_witness(std::uint64_t guard = default_guards().enumeration) {
  WitnessParameter w;
  w.name = "maxcut";
  w.k = 2;
  w.eval = [guard](const ColoredHypergraph& refined) -> Rational {
    if (refined.r() != 2 || refined.k() != 4) throw InvalidArgument("maxcut witness needs a 2-coloured graph with k = 2");
    const std::size_t n = refined.n();
    if (n == 0) return 0;
    // in[u][v]: pair in B
    std::vector<std::vector<char>> in(n, std::vector<char>(n, 0));
    long long hits = 0;
    long long mismatch = 0;  // |B Δ K(P)| for the current partition P
    for_each_subset(n, 2, [&](std::span<const std::size_t> s) {
      const Color c = refined.color(s);
      if (c % 2 != 1) return;
      in[s[0]][s[1]] = in[s[1]][s[0]] = 1;
      ++mismatch;
      if (c / 2 == Hypergraph::kEdge) ++hits;
    });
    long long best = mismatch;
    if (n > 1) {
      if (n > 63) throw GuardExceeded("maxcut witness: graph too large");
      check_guard(sat_pow(2, n - 1), guard, "maxcut witness");
      std::vector<char> side(n, 0);
      const std::uint64_t total = std::uint64_t{1} << (n - 1);
      for (std::uint64_t i = 1; i < total; ++i) {
        const auto v = static_cast<std::size_t>(std::countr_zero(i)) + 1;
        for (std::size_t u = 0; u < n; ++u) {
          if (u == v) continue;
          const bool crossing = side[u] != side[v];
          // after the flip the pair crosses iff it did not before
          mismatch += (crossing == static_cast<bool>(in[u][v])) ? 1 : -1;
        }
        side[v] = static_cast<char>(1 - side[v]);
        best = std::min(best, mismatch);
      }
    }
    return Rational(static_cast<long>(2 * (hits - best))) / Rational(static_cast<long>(n * n));
  };
  w.exact_max = [guard](const ColoredHypergraph& base) {
    if (base.r() != 2 || base.k() != 2) throw InvalidArgument("maxcut witness needs a simple graph");
    const std::size_t n = base.n();
    auto [cut, side] = detail::max_cut(base, Hypergraph::kEdge, guard);
    ColoredHypergraph refined(2, n, 4);
    for_each_subset(n, 2, [&](std::span<const std::size_t> s) {
      const Color b = side[s[0]] != side[s[1]] ? 1 : 0;
      refined.set_color(s, Coloring::encode(base.color(s), b, 2));
    });
    const Rational value = n == 0 ? Rational(0) : Rational(static_cast<long>(2 * cut)) / Rational(static_cast<long>(n * n));
    return std::pair<Rational, ColoredHypergraph>{value, std::move(refined)};
  };
  return w;
}

/// g = t*(edge of colour (E,1)) − t*(two (E,1)-edges sharing one vertex):
/// a linear witness, built from two linear-subgraph densities only.
inline WitnessParameter bichromatic_linear_density_witness() {
  WitnessParameter w;
  w.name = "bichromatic-linear-density";
  w.k = 2;
  w.eval = [](const ColoredHypergraph& refined) -> Rational {
    if (refined.k() != 4) throw InvalidArgument("witness needs a 2-coloured graph with k = 2");
    const std::size_t n = refined.n(), r = refined.r();
    if (n == 0) return 0;
    const Color target = Coloring::encode(Hypergraph::kEdge, 1, 2);
    std::vector<unsigned long> deg(n, 0);
    unsigned long m = 0;
    for_each_subset(n, r, [&](std::span<const std::size_t> s) {
      if (refined.color(s) != target) return;
      ++m;
      for (auto v : s) ++deg[v];
    });
    const unsigned long rf = static_cast<unsigned long>(factorial(r));
    const unsigned long rf1 = static_cast<unsigned long>(factorial(r - 1));
    mpz_class hom_edge = mpz_class(rf) * m, hom_path = 0;
    for (auto d : deg) {
      mpz_class x = mpz_class(rf1) * d;
      hom_path += x * x;
    }
    mpz_class ne, np;
    mpz_ui_pow_ui(ne.get_mpz_t(), n, r);
    mpz_ui_pow_ui(np.get_mpz_t(), n, 2 * r - 1);
    Rational a(hom_edge, ne), b(hom_path, np);
    a.canonicalize();
    b.canonicalize();
    return a - b;
  };
  return w;
}

/// g = −max_β |r!·#(E,β)-edges / n^r − ψ_β|: how closely the edge set can be
/// split into parts with prescribed densities ψ.
inline WitnessParameter tensor_proximity_witness(std::vector<Rational> psi) {
  if (psi.empty()) throw InvalidArgument("tensor proximity needs at least one target density");
  WitnessParameter w;
  w.name = "tensor-proximity";
  w.k = psi.size();
  w.eval = [psi](const ColoredHypergraph& refined) -> Rational {
    const std::size_t k = psi.size();
    if (refined.k() != 2 * k) throw InvalidArgument("palette does not match the target vector");
    const std::size_t n = refined.n(), r = refined.r();
    std::vector<unsigned long> count(k, 0);
    for (std::size_t i = 0; i < refined.slot_count(); ++i) {
      const Color c = refined.color_at(i);
      if (c / k == Hypergraph::kEdge) ++count[c % k];
    }
    mpz_class denom;
    mpz_ui_pow_ui(denom.get_mpz_t(), n, r);
    Rational worst = 0;
    for (std::size_t b = 0; b < k; ++b) {
      Rational d(mpz_class(static_cast<unsigned long>(factorial(r))) * count[b], denom);
      d.canonicalize();
      worst = std::max(worst, Rational(abs(d - psi[b])));
    }
    return -worst;
  };
  w.refined_base_colors = {true, false};
  return w;
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace detail

inline std::vector<std::string> witness_names() {
  return {"maxcut", "bichromatic-linear-density", "tensor-proximity"};
}

/// Registered witnesses by name. `params` is a comma-separated list; only
/// tensor-proximity reads it (the target densities ψ_β).
inline WitnessParameter make_witness(const std::string& name, const std::string& params = "") {
  if (name == "maxcut") return maxcut_witness();
  if (name == "bichromatic-linear-density") return bichromatic_linear_density_witness();
  if (name == "tensor-proximity") {
    std::vector<Rational> psi;
    for (const auto& p : detail::split_list(params, ',')) psi.push_back(parse_rational(p));
    if (psi.empty()) psi = {ratio(1L, 4L), ratio(1L, 4L)};
    return tensor_proximity_witness(std::move(psi));
  }
  throw InvalidArgument("unknown witness '" + name + "'");
}

// ---------------------------------------------------------------------------
// Evaluation

inline NdResult nd_eval(const NDParameter& f, const ColoredHypergraph& g, const NdOptions& opt = {}) {
  const WitnessParameter& w = f.witness;
  if (!w.eval) throw InvalidArgument("witness has no evaluator");
  const std::size_t k = w.k;
  NdResult res;
  if (k == 1) {
    auto refined = detail::uniform_refinement(g, 1);
    res.value = w.eval(refined);
    res.witness = make_coloring(g, refined, 1);
    res.certificate = "enumeration";
    res.evaluations = 1;
    return res;
  }
  if (opt.mode == NdMode::exact) {
    if (opt.use_reduction && w.exact_max) {
      auto [value, refined] = w.exact_max(g);
      res.value = value;
      res.witness = make_coloring(g, refined, k);
      res.certificate = "reduction";
      res.evaluations = 1;
      return res;
    }
    bool first = true;
    res.evaluations = enumerate_colorings(
        g, k,
        [&](const Coloring& c) {
          const Rational v = w.eval(c.refined);
          if (first || v > res.value) {
            res.value = v;
            res.witness = c;
            first = false;
          }
          return true;
        },
        opt.guard, w.refined_base_colors);
    res.certificate = "enumeration";
    return res;
  }

  // local search: single-slot recolouring until no slot improves
  std::vector<std::size_t> free_slots;
  for (std::size_t i = 0; i < g.slot_count(); ++i)
    if (w.refined_base_colors.empty() || w.refined_base_colors.at(g.color_at(i))) free_slots.push_back(i);
  bool first = true;
  for (std::size_t rs = 0; rs < std::max<std::size_t>(opt.restarts, 1); ++rs) {
    Rng rng(derive_seed(opt.seed, rs));
    auto refined = detail::uniform_refinement(g, k);
    for (auto i : free_slots)
      refined.set_color_at(i, Coloring::encode(g.color_at(i), static_cast<Color>(uniform_index(rng, k)), k));
    Rational cur = w.eval(refined);
    ++res.evaluations;
    for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      bool improved = false;
      for (auto i : free_slots) {
        const Color keep = refined.color_at(i);
        Color best_c = keep;
        for (std::size_t b = 0; b < k; ++b) {
          const Color c = Coloring::encode(g.color_at(i), static_cast<Color>(b), k);
          if (c == keep) continue;
          refined.set_color_at(i, c);
          const Rational v = w.eval(refined);
          ++res.evaluations;
          if (v > cur) {
            cur = v;
            best_c = c;
            improved = true;
          }
        }
        refined.set_color_at(i, best_c);
      }
      if (!improved) break;
    }
    if (first || cur > res.value) {
      res.value = cur;
      res.witness = make_coloring(g, refined, k);
      first = false;
    }
  }
  res.exact = false;
  res.certificate = "heuristic";
  return res;
}

inline NdResult nd_eval(const NDParameter& f, const Hypergraph& g, const NdOptions& opt = {}) {
  return nd_eval(f, g.colored(), opt);
}

struct TesterReport {
  Rational f_graph = 0;
  std::vector<Rational> sample_values;
  std::size_t q = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double eps = 0;
  double rate = 0;
  double max_deviation = 0;
  bool exact = true;  // every evaluation was exact
  bool passes = false;  // rate < ε
};

/// Simulates the sampling tester: per trial, f on G(q, G) against f(G).
/// Trials use independent seeds derive_seed(seed, i), so the report does not
/// depend on `jobs`.
inline TesterReport tester(const NDParameter& f, double eps, const ColoredHypergraph& g, std::size_t q,
                           std::size_t trials, std::uint64_t seed, const NdOptions& opt = {},
                           std::size_t jobs = 1) {
  if (q > g.n()) throw InvalidSample("sample size exceeds the vertex count");
  TesterReport rep;
  rep.q = q;
  rep.trials = trials;
  rep.eps = eps;
  const auto full = nd_eval(f, g, opt);
  rep.f_graph = full.value;
  rep.exact = full.exact;
  rep.sample_values.assign(trials, Rational(0));
  std::vector<char> exact(trials, 1);
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng(derive_seed(seed, i));
      const auto s = sample_q(g, q, rng);
      const auto v = nd_eval(f, s, opt);
      rep.sample_values[i] = v.value;
      exact[i] = v.exact;
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, trials));
  if (jobs == 1) {
    run(0, trials);
  } else {
    std::vector<std::future<void>> tasks;
    const std::size_t chunk = (trials + jobs - 1) / jobs;
    for (std::size_t lo = 0; lo < trials; lo += chunk)
      tasks.push_back(std::async(std::launch::async, run, lo, std::min(trials, lo + chunk)));
    for (auto& t : tasks) t.get();
  }
  for (std::size_t i = 0; i < trials; ++i) {
    const double dev = std::fabs(Rational(rep.sample_values[i] - rep.f_graph).get_d());
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > eps) ++rep.failures;
    rep.exact = rep.exact && exact[i];
  }
  rep.rate = trials == 0 ? 0.0 : static_cast<double>(rep.failures) / static_cast<double>(trials);
  rep.passes = rep.rate < eps;
  return rep;
}

inline TesterReport tester(const NDParameter& f, double eps, const Hypergraph& g, std::size_t q,
                           std::size_t trials, std::uint64_t seed, const NdOptions& opt = {},
                           std::size_t jobs = 1) {
  return tester(f, eps, g.colored(), q, trials, seed, opt, jobs);
}

/// Smallest q in the doubling sequence q0, 2q0, … (capped at n) whose tester
/// failure rate on G is below ε: a measured stand-in for q_g.
inline std::size_t measure_sample_complexity(const NDParameter& f, double eps, const ColoredHypergraph& g,
                                             std::size_t trials, std::uint64_t seed, std::size_t q0 = 0,
                                             const NdOptions& opt = {}) {
  std::size_t q = std::max(q0, g.r());
  while (true) {
    if (q >= g.n()) return g.n();
    if (tester(f, eps, g, q, trials, seed, opt).passes) return q;
    q *= 2;
  }
}

}  // namespace hypertest
