#pragma once

#include <hypertest/bounds.hpp>
#include <hypertest/energy.hpp>
#include <hypertest/hypergraph_io.hpp>
#include <hypertest/kernel_io.hpp>
#include <hypertest/kernel_ops.hpp>
#include <hypertest/nd.hpp>
#include <hypertest/norms.hpp>
#include <hypertest/property.hpp>
#include <hypertest/regularity.hpp>
#include <hypertest/sampling.hpp>
#include <hypertest/transfer.hpp>

#include "report.hpp"

namespace hypertest::cli {

// ---------------------------------------------------------------------------
// Input helpers. Parse errors become "path:line: message" usage errors.

template <class Fn>
auto load_input(SuiteRun& run, const std::string& path, Fn&& fn) {
  run.input(path);
  try {
    return fn(path);
  } catch (const ParseError& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw UsageError(path + ":" + std::to_string(e.line) + ": " + msg);
  }
}

inline ColoredHypergraph load_graph_input(SuiteRun& run, const std::string& path) {
  return load_input(run, path, [](const std::string& p) { return load_colored_hypergraph(p); });
}

inline Hypergraph load_plain_graph_input(SuiteRun& run, const std::string& path) {
  return load_input(run, path, [](const std::string& p) { return load_hypergraph(p); });
}

inline KernelFile load_kernel_input(SuiteRun& run, const std::string& path) {
  return load_input(run, path, [](const std::string& p) { return load_kernel(p); });
}

inline RealArray load_array_input(SuiteRun& run, const std::string& path) {
  return load_input(run, path, [](const std::string& p) { return load_array(p); });
}

inline DensityTensor load_tensor_input(SuiteRun& run, const std::string& path) {
  return load_input(run, path, [](const std::string& p) {
    std::ifstream in(p);
    if (!in) throw UsageError("cannot open '" + p + "'");
    return read_tensor(in);
  });
}

/// The real colour components of a kernel file, or the plain kernel itself.
inline std::vector<StepKernel<Rational>> kernel_components(const KernelFile& kf) {
  if (!kf.colored) return {kf.plain};
  std::vector<StepKernel<Rational>> out;
  for (std::size_t c = 0; c < kf.kernel.real_colors(); ++c) out.push_back(kf.kernel.component(c));
  return out;
}

inline StepKernel<Rational> plain_kernel(const KernelFile& kf, const std::string& what) {
  if (kf.colored) throw UsageError(what + ": expected a plain kernel (k = 1)");
  return kf.plain;
}

inline ColoredStepKernel<Rational> colored_kernel(const KernelFile& kf) {
  return kf.colored ? kf.kernel : as_two_colored(kf.plain);
}

inline std::string q_text(const Rational& q) { return q.get_str(); }

inline std::string d_text(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

inline Json labels_json(const std::vector<std::size_t>& v) {
  Json a = Json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

// ---------------------------------------------------------------------------
// Random instances shared by `gen` and the suites' `random` settings.

inline std::vector<Rational> random_class_weights(Rng& rng, std::size_t t) {
  std::vector<long> parts(t);
  long total = 0;
  for (auto& p : parts) total += p = 1 + static_cast<long>(uniform_index(rng, 5));
  std::vector<Rational> w;
  for (auto p : parts) w.push_back(ratio(p, total));
  return w;
}

/// Symmetric cell values, one draw per sorted cell.
template <class Draw>
std::vector<Rational> symmetric_cells(std::size_t t, std::size_t r, Draw&& draw) {
  std::vector<Rational> v(ipow(t, r));
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    auto s = cell_of_index(idx, t, r);
    std::sort(s.begin(), s.end());
    const std::size_t rep = cell_index(s, t);
    v[idx] = rep == idx ? draw() : Rational(v[rep]);
  }
  return v;
}

/// Plain kernel on a grid of step 1/den with values in [lo, 1].
inline StepKernel<Rational> random_plain_kernel(Rng& rng, std::size_t r, std::size_t t, bool signed_values,
                                                long den = 8) {
  const long lo = signed_values ? -den : 0;
  auto v = symmetric_cells(t, r, [&] {
    return ratio(lo + static_cast<long>(uniform_index(rng, static_cast<std::size_t>(den - lo + 1))), den);
  });
  return StepKernel<Rational>(r, random_class_weights(rng, t), std::move(v));
}

/// k-coloured kernel: per sorted cell a random composition of den into k parts.
inline ColoredStepKernel<Rational> random_kernel(Rng& rng, std::size_t r, std::size_t t, std::size_t k,
                                                 long den = 6) {
  const std::size_t cells = ipow(t, r);
  std::vector<std::vector<Rational>> vals(k, std::vector<Rational>(cells));
  for (std::size_t idx = 0; idx < cells; ++idx) {
    auto s = cell_of_index(idx, t, r);
    std::sort(s.begin(), s.end());
    const std::size_t rep = cell_index(s, t);
    if (rep != idx) {
      for (std::size_t a = 0; a < k; ++a) vals[a][idx] = vals[a][rep];
      continue;
    }
    long left = den;
    for (std::size_t a = 0; a + 1 < k; ++a) {
      const long part = static_cast<long>(uniform_index(rng, static_cast<std::size_t>(left + 1)));
      vals[a][idx] = ratio(part, den);
      left -= part;
    }
    vals[k - 1][idx] = ratio(left, den);
  }
  return ColoredStepKernel<Rational>(r, random_class_weights(rng, t), std::move(vals));
}

inline Hypergraph random_hypergraph(Rng& rng, std::size_t r, std::size_t n, double p) {
  Hypergraph h(r, n);
  for (std::size_t i = 0; i < h.colored().slot_count(); ++i)
    if (uniform01(rng) < p) h.toggle_at(i);
  return h;
}

/// Vertex v sits in part ⌊v·parts/n⌋; an edge inside one part appears with
/// probability p, any other edge with probability q.
/// Vertex v sits in part v·parts/n. An edge meeting two or more parts (a
/// planted cut edge) appears with probability p, one inside a part with q.
inline Hypergraph planted_partition(Rng& rng, std::size_t r, std::size_t n, std::size_t parts, double p, double q) {
  Hypergraph h(r, n);
  std::size_t i = 0;
  for_each_subset(n, r, [&](std::span<const std::size_t> e) {
    const std::size_t first = e.front() * parts / n;
    bool same = true;
    for (auto v : e) same = same && v * parts / n == first;
    if (uniform01(rng) < (same ? q : p)) h.toggle_at(i);
    ++i;
  });
  return h;
}

/// Every vertex of g replaced by m copies; copies of one vertex are never
/// joined, copies of distinct vertices are joined as the originals.
inline Hypergraph blowup(const Hypergraph& g, std::size_t m) {
  if (m == 0) throw InvalidArgument("blow-up factor must be positive");
  const std::size_t r = g.r();
  Hypergraph h(r, g.n() * m);
  std::vector<std::size_t> orig(r);
  std::size_t i = 0;
  for_each_subset(g.n() * m, r, [&](std::span<const std::size_t> e) {
    for (std::size_t j = 0; j < r; ++j) orig[j] = e[j] / m;
    if (std::adjacent_find(orig.begin(), orig.end()) == orig.end() && g.has_edge(orig)) h.toggle_at(i);
    ++i;
  });
  return h;
}

/// K_r²: the 2-fold blow-up of a single r-edge.
inline Hypergraph kr2_pattern(std::size_t r) {
  Hypergraph f(r, 2 * r);
  std::vector<std::size_t> e(r);
  for (std::size_t mask = 0; mask < (std::size_t{1} << r); ++mask) {
    for (std::size_t i = 0; i < r; ++i) e[i] = 2 * i + ((mask >> i) & 1);
    f.add_edge(e);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Suites.

inline void suite_sandwich(const Params& p, SuiteRun& run) {
  std::vector<std::pair<std::string, StepKernel<Rational>>> corpus;
  for (const auto& path : p.list("kernels")) {
    const auto comps = kernel_components(load_kernel_input(run, path));
    for (std::size_t c = 0; c < comps.size(); ++c)
      corpus.emplace_back(comps.size() == 1 ? path : path + "#" + std::to_string(c), comps[c]);
  }
  Rng rng(run.seed);
  const std::size_t random = p.size("random");
  const std::size_t max_t = std::max<std::size_t>(p.size("max_t"), 1);
  for (std::size_t i = 0; i < random; ++i) {
    const std::size_t r = 2 + i % 2;
    const std::size_t t = 1 + (i / 2) % max_t;
    corpus.emplace_back("random#" + std::to_string(i), random_plain_kernel(rng, r, t, true));
  }
  run.table.header = {"kernel", "r", "t", "tstar", "lower", "cut_star", "upper", "boxplus", "sandwich", "boxplus_ok"};
  std::size_t bad = 0, box_bad = 0;
  Json rows = Json::array();
  for (const auto& [name, w] : corpus) {
    const auto s = sandwich_bounds(w, run.guards.enumeration);
    const auto box = boxplus_norm(w, NormMode::exact, {}, run.guards.enumeration).value;
    Rational scale = 1;
    for (std::size_t i = 0; i < w.r; ++i) scale /= 2;
    const bool box_ok = box * scale <= s.cut && s.cut <= box;
    bad += !s.holds();
    box_bad += !box_ok;
    rows.push_back({{"kernel", name},
                    {"r", w.r},
                    {"t", w.t},
                    {"tstar", q_text(s.tstar)},
                    {"lower", q_text(s.lower)},
                    {"cut_star", q_text(s.cut)},
                    {"upper", s.upper},
                    {"boxplus", q_text(box)},
                    {"sandwich", s.holds()},
                    {"boxplus_ok", box_ok}});
    run.table.rows.push_back({name, std::to_string(w.r), std::to_string(w.t), q_text(s.tstar), q_text(s.lower),
                              q_text(s.cut), d_text(s.upper), q_text(box), s.holds() ? "true" : "false",
                              box_ok ? "true" : "false"});
  }
  run.results["kernels"] = std::move(rows);
  if (!corpus.empty()) {
    run.check("sandwich", bad == 0, std::to_string(bad) + " of " + std::to_string(corpus.size()) + " violate");
    run.check("boxplus", box_bad == 0, std::to_string(box_bad) + " of " + std::to_string(corpus.size()) + " violate");
  }
}

inline void suite_norm(const Params& p, SuiteRun& run) {
  if (!p.has("kernel")) throw UsageError("norm: kernel is required");
  const auto comps = kernel_components(load_kernel_input(run, p.str("kernel")));
  const auto mode = p.choice("mode", {"exact", "ascent"}) == "exact" ? NormMode::exact : NormMode::ascent;
  AscentOptions asc;
  asc.seed = run.seed;
  std::optional<CellPartition> part;
  if (p.has("partition")) {
    std::vector<std::size_t> labels;
    for (const auto& l : p.list("partition")) labels.push_back(static_cast<std::size_t>(std::stoul(l)));
    part = CellPartition(std::move(labels));
  }
  Json comps_json = Json::array();
  run.table.header = {"component", "cut_star", "boxplus", "l1", "cut_star_P", "spectral_bound", "exact"};
  bool rel_ok = true;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& w = comps[c];
    const auto cut = cut_star_norm(w, mode, asc, run.guards.enumeration);
    const auto box = boxplus_norm(w, mode, asc, run.guards.enumeration);
    Json j{{"component", c},
           {"cut_star", q_text(cut.value)},
           {"boxplus", q_text(box.value)},
           {"l1", q_text(l1_norm(w))},
           {"exact", cut.exact && box.exact}};
    std::string cutp;
    if (part) {
      if (part->size() != w.t) throw UsageError("norm.partition: needs one label per class");
      cutp = q_text(cut_star_P_norm(w, *part, mode, asc, run.guards.enumeration).value);
      j["cut_star_P"] = cutp;
    }
    std::string spec;
    if (w.r == 2) {
      spec = d_text(spectral_bound(w));
      j["spectral_bound"] = spectral_bound(w);
    }
    if (cut.exact && box.exact) {
      Rational scale = 1;
      for (std::size_t i = 0; i < w.r; ++i) scale /= 2;
      rel_ok = rel_ok && box.value * scale <= cut.value && cut.value <= box.value;
    }
    comps_json.push_back(std::move(j));
    run.table.rows.push_back({std::to_string(c), q_text(cut.value), q_text(box.value), q_text(l1_norm(w)), cutp, spec,
                              cut.exact && box.exact ? "true" : "false"});
  }
  run.results["components"] = std::move(comps_json);
  run.check("boxplus", rel_ok, "2^-r boxplus <= cut-* <= boxplus");
}

inline void suite_wreg(const Params& p, SuiteRun& run) {
  if (!p.has("kernel")) throw UsageError("wreg: kernel is required");
  const auto w = colored_kernel(load_kernel_input(run, p.str("kernel")));
  const double eps = p.real("eps");
  RegularityOptions opt;
  opt.t_probe = p.size("t_probe");
  opt.guard = run.guards.enumeration;
  opt.ascent.seed = run.seed;
  const auto res = weak_regularity(w, eps, opt);
  run.results["classes"] = res.q.block_count();
  run.results["partition"] = labels_json(res.q.labels());
  run.results["iterations"] = res.iterations;
  run.results["iteration_cap"] = res.iteration_cap;
  run.results["deviation"] = res.deviation;
  run.results["certificate"] = res.certificate;
  run.results["probes"] = res.probes;
  run.artifacts["wreg_v.txt"] = kernel_text(res.v);
  run.check("certified", res.certified, res.certificate + ", deviation " + d_text(res.deviation));
  run.check("iteration_cap", !res.cap_hit, std::to_string(res.iterations) + " of " + std::to_string(res.iteration_cap));
  run.check("class_bound", res.within_class_bound, std::to_string(res.q.block_count()) + " classes");
}

inline void suite_countlemma(const Params& p, SuiteRun& run) {
  std::vector<std::pair<ColoredStepKernel<Rational>, ColoredStepKernel<Rational>>> pairs;
  if (p.has("u") || p.has("w")) {
    if (!p.has("u") || !p.has("w")) throw UsageError("countlemma: u and w go together");
    pairs.emplace_back(colored_kernel(load_kernel_input(run, p.str("u"))),
                       colored_kernel(load_kernel_input(run, p.str("w"))));
  }
  Rng rng(run.seed);
  for (std::size_t i = 0; i < p.size("random"); ++i) {
    auto u = random_kernel(rng, p.size("r"), p.size("t"), p.size("k"));
    auto w = random_kernel(rng, p.size("r"), p.size("t"), p.size("k"));
    pairs.emplace_back(std::move(u), std::move(w));
  }
  const std::size_t q = p.size("q");
  std::size_t bad = 0, coupling_bad = 0;
  run.table.header = {"pair", "tv", "cut", "coefficient", "rhs", "holds", "vacuous"};
  Json rows = Json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto rep = counting_lemma_check(pairs[i].first, pairs[i].second, q, run.guards.enumeration);
    bad += !rep.holds;
    coupling_bad += !rep.coupling_exact;
    rows.push_back({{"pair", i},
                    {"tv", q_text(rep.tv)},
                    {"cut", q_text(rep.cut)},
                    {"rhs", q_text(rep.rhs)},
                    {"holds", rep.holds},
                    {"vacuous", rep.vacuous},
                    {"coupling_exact", rep.coupling_exact}});
    run.table.rows.push_back({std::to_string(i), q_text(rep.tv), q_text(rep.cut), q_text(rep.coefficient),
                              q_text(rep.rhs), rep.holds ? "true" : "false", rep.vacuous ? "true" : "false"});
  }
  run.results["pairs"] = std::move(rows);
  if (!pairs.empty()) {
    run.check("inequality", bad == 0, std::to_string(bad) + " violations");
    run.check("maximal_coupling", coupling_bad == 0, std::to_string(coupling_bad) + " inexact");
  }
}

inline void suite_concentrate(const Params& p, SuiteRun& run) {
  Rng rng(run.seed);
  const auto u = p.has("kernel") ? plain_kernel(load_kernel_input(run, p.str("kernel")), "concentrate.kernel")
                                 : random_plain_kernel(rng, p.size("r"), p.size("t"), false);
  const auto f = p.has("pattern") ? load_plain_graph_input(run, p.str("pattern")) : kr2_pattern(u.r);
  const auto rep =
      concentration_experiment(u, f, p.size("q"), p.real("delta"), p.size("trials"), derive_seed(run.seed, 1));
  run.results["tstar"] = q_text(rep.exact);
  run.results["q"] = rep.q;
  run.results["trials"] = rep.trials;
  run.results["deviations"] = rep.deviations;
  run.results["rate"] = rep.rate;
  run.results["std_error"] = rep.std_error;
  run.results["bound"] = rep.bound;
  run.results["max_deviation"] = rep.max_deviation;
  run.check("sampling_bound", !rep.violation,
            "rate " + d_text(rep.rate) + " vs " + d_text(rep.bound) + " + 3se");
}

inline GseMode gse_mode(const Params& p) {
  return p.choice("mode", {"exact", "local"}) == "exact" ? GseMode::exact : GseMode::local;
}

inline void suite_gse(const Params& p, SuiteRun& run) {
  if (!p.has("array")) throw UsageError("gse: array is required");
  if (p.has("graph") == p.has("kernel")) throw UsageError("gse: give exactly one of graph and kernel");
  const auto j = load_array_input(run, p.str("array"));
  LocalSearchOptions lo;
  lo.seed = run.seed;
  if (p.has("graph")) {
    const auto g = load_plain_graph_input(run, p.str("graph"));
    const auto res = gse_graph(g, j, gse_mode(p), lo, run.guards.enumeration);
    run.results["value"] = q_text(res.value);
    run.results["value_float"] = res.value.get_d();
    run.results["partition"] = labels_json(res.partition);
    run.results["certificate"] = res.certificate;
    if (p.has("planted_parts")) {
      const auto parts = p.size("planted_parts");
      if (parts == 0 || parts > j.s) throw UsageError("gse.planted_parts must lie in [1, s]");
      std::vector<std::size_t> cls(g.n());
      for (std::size_t v = 0; v < g.n(); ++v) cls[v] = v * parts / g.n();
      const Rational planted = gse_energy(g, j, cls);
      const double gap = std::abs(Rational(res.value - planted).get_d());
      run.results["planted_value"] = q_text(planted);
      run.results["planted_gap"] = gap;
      run.check("planted_gap", gap <= p.real("tol"), d_text(gap) + " vs " + p.str("tol"));
    }
    return;
  }
  const auto u = plain_kernel(load_kernel_input(run, p.str("kernel")), "gse.kernel");
  KernelGseOptions ko;
  ko.seed = run.seed;
  const auto res = gse_kernel(u, j, KernelGseMode::fractional, ko);
  run.results["value"] = q_text(res.value);
  run.results["upper"] = res.upper;
  run.results["certificate"] = res.certificate;
  Json mem = Json::array();
  for (const auto& row : res.memberships) {
    Json r = Json::array();
    for (const auto& x : row) r.push_back(q_text(x));
    mem.push_back(std::move(r));
  }
  run.results["memberships"] = std::move(mem);
  if (p.size("trials") > 0) {
    const auto rep = gse_sampling_check(u, j, p.size("q"), p.real("delta"), p.size("trials"),
                                        derive_seed(run.seed, 1), ko);
    run.results["sampling"] = {{"q", rep.q},
                               {"trials", rep.trials},
                               {"rate", rep.rate},
                               {"bound", rep.bound},
                               {"max_deviation", rep.max_deviation},
                               {"guaranteed_regime", rep.guaranteed_regime}};
    run.check("sampling_bound", !rep.violation, "rate " + d_text(rep.rate) + " vs " + d_text(rep.bound) + " + 3se");
  }
}

inline void suite_ggse(const Params& p, SuiteRun& run) {
  if (!p.has("graph")) throw UsageError("ggse: graph is required");
  const auto h = load_graph_input(run, p.str("graph"));
  std::vector<RealArray> js;
  for (const auto& path : p.list("arrays")) js.push_back(load_array_input(run, path));
  LocalSearchOptions lo;
  lo.seed = run.seed;
  const auto res = ggse(h, js, p.size("t"), gse_mode(p), lo, run.guards.enumeration);
  run.results["value"] = q_text(res.value);
  run.results["value_float"] = res.value.get_d();
  run.results["partition"] = labels_json(res.partition);
  run.results["certificate"] = res.certificate;
}

inline void suite_tensor(const Params& p, SuiteRun& run) {
  if (!p.has("graph") || !p.has("tensor")) throw UsageError("tensor: graph and tensor are required");
  const auto h = load_plain_graph_input(run, p.str("graph"));
  const auto psi = load_tensor_input(run, p.str("tensor"));
  const auto found = satisfies_tensor(h, psi, p.rational("tol"), run.guards.search_nodes);
  run.results["satisfied"] = found.has_value();
  if (found) {
    Json levels = Json::array();
    for (const auto& l : found->levels) levels.push_back(labels_json(l));
    run.results["witness"] = std::move(levels);
  }
  const auto expect = p.choice("expect", {"any", "yes", "no"});
  if (expect != "any") run.check("expectation", found.has_value() == (expect == "yes"));
}

inline void suite_ndtest(const Params& p, SuiteRun& run) {
  if (!p.has("graph")) throw UsageError("ndtest: graph is required");
  const auto g = load_graph_input(run, p.str("graph"));
  const NDParameter f{make_witness(p.str("witness"), p.str("witness_params"))};
  NdOptions opt;
  opt.mode = p.choice("mode", {"exact", "search"}) == "exact" ? NdMode::exact : NdMode::search;
  opt.seed = run.seed;
  opt.guard = run.guards.enumeration;
  const double eps = p.real("eps");
  const auto rep = tester(f, eps, g, p.size("q"), p.size("trials"), derive_seed(run.seed, 1), opt, run.jobs);
  run.results["witness"] = f.witness.name;
  run.results["f_graph"] = q_text(rep.f_graph);
  run.results["exact"] = rep.exact;
  run.results["q"] = rep.q;
  run.results["trials"] = rep.trials;
  run.results["failures"] = rep.failures;
  run.results["rate"] = rep.rate;
  run.results["max_deviation"] = rep.max_deviation;
  if (p.flag("measure")) {
    run.results["measured_q"] =
        measure_sample_complexity(f, eps, g, p.size("trials"), derive_seed(run.seed, 2), 2, opt);
  }
  run.table.header = {"trial", "value"};
  for (std::size_t i = 0; i < rep.sample_values.size(); ++i)
    run.table.rows.push_back({std::to_string(i), q_text(rep.sample_values[i])});
  run.check("failure_rate", rep.passes, "rate " + d_text(rep.rate) + " < " + d_text(eps));
}

inline void suite_transfer(const Params& p, SuiteRun& run) {
  if (!p.has("graph")) throw UsageError("transfer: graph is required");
  const auto g = load_plain_graph_input(run, p.str("graph"));
  const NDParameter f{make_witness(p.str("witness"), p.str("witness_params"))};
  const std::size_t q = p.size("q");
  if (q == 0 || q > g.n()) throw UsageError("transfer.q: must lie in [1, n]");
  Rng rng(run.seed);
  const auto smp = random_subset(rng, g.n(), q);
  NdOptions nopt;
  nopt.guard = run.guards.enumeration;
  const auto fit = nd_eval(f, induced_subgraph(g, smp), nopt);
  TransferOptions opt;
  opt.eps = p.real("eps");
  opt.seed = derive_seed(run.seed, 1);
  opt.size_cap = p.size("size_cap");
  opt.guard = run.guards.enumeration;
  const auto rep = coloring_transfer(g, smp, fit.witness.refined, f.witness.k, p.real("delta"), opt);
  run.results["sample"] = labels_json(smp);
  run.results["witness_value"] = q_text(fit.value);
  run.results["witness_certificate"] = fit.certificate;
  Json stages = Json::array();
  run.table.header = {"stage", "distance", "target", "certificate", "certified", "within_target", "note"};
  for (const auto& s : rep.stages) {
    stages.push_back({{"stage", s.name},
                      {"distance", s.distance},
                      {"target", s.target},
                      {"certificate", s.certificate},
                      {"certified", s.certified},
                      {"within_target", s.within_target},
                      {"note", s.note}});
    run.table.rows.push_back({s.name, d_text(s.distance), d_text(s.target), s.certificate,
                              s.certified ? "true" : "false", s.within_target ? "true" : "false", s.note});
    run.check("stage:" + s.name, s.certified, s.certificate);
  }
  run.results["stages"] = std::move(stages);
  run.results["blocks"] = rep.blocks;
  run.results["total_distance"] = rep.total_distance;
  run.results["patterns"] = rep.patterns;
  run.results["discrepancy"] = rep.discrepancy;
  run.results["budget"] = rep.budget;
  run.results["within_targets"] = rep.within_targets;
  try {
    run.results["ghat_value"] = q_text(f.witness.eval(rep.ghat));
  } catch (const GuardExceeded& e) {
    run.results["ghat_value"] = nullptr;
    run.results["ghat_value_skipped"] = e.what();
  }
  run.artifacts["transfer_ghat.txt"] = to_text(rep.ghat);
  run.check("discrepancy", rep.discrepancy <= rep.budget && rep.pattern_violations == 0,
            d_text(rep.discrepancy) + " vs budget " + d_text(rep.budget));
}

inline void suite_dist(const Params& p, SuiteRun& run) {
  if (!p.has("graph") || !p.has("property")) throw UsageError("dist: graph and property are required");
  const auto g = load_plain_graph_input(run, p.str("graph"));
  const auto prop = property_by_name(p.str("property"));
  const std::size_t radius = p.has("radius") ? p.size("radius") : run.guards.edit_radius;
  const auto res = edit_distance_to_property(g, prop, radius, run.guards.enumeration);
  run.results["lower"] = q_text(res.lower);
  if (res.upper) run.results["upper"] = q_text(*res.upper);
  run.results["exact"] = res.exact;
  run.results["edits"] = res.edits;
  run.results["radius_searched"] = res.radius_searched;
  if (res.nearest) run.artifacts["dist_nearest.txt"] = to_text(res.nearest->colored());
  if (p.has("c")) {
    const auto rep = edit_distance_tester(g, prop, p.rational("c"), p.size("q"), p.size("trials"),
                                          derive_seed(run.seed, 1), radius);
    run.results["tester"] = {{"c", q_text(rep.c)},
                             {"q", rep.q},
                             {"trials", rep.trials},
                             {"accepts", rep.accepts},
                             {"rejects", rep.rejects},
                             {"undetermined", rep.undetermined},
                             {"verdict", rep.verdict}};
  }
}

inline std::vector<PredicateTable> load_relations(SuiteRun& run, const std::vector<std::string>& paths,
                                                  std::size_t n) {
  std::vector<PredicateTable> rel;
  for (const auto& path : paths) {
    const auto h = load_plain_graph_input(run, path);
    if (h.n() != n) throw UsageError(path + ": relation has " + std::to_string(h.n()) + " vertices, graph has " +
                                     std::to_string(n));
    auto t = PredicateTable::empty(h.r(), n);
    for (const auto& e : h.edges()) t.insert(e);
    rel.push_back(std::move(t));
  }
  return rel;
}

inline void suite_fo(const Params& p, SuiteRun& run) {
  if (!p.has("graph")) throw UsageError("fo: graph is required");
  if (p.has("formula") == p.has("formula_file")) throw UsageError("fo: give exactly one of formula and formula_file");
  const auto g = load_plain_graph_input(run, p.str("graph"));
  std::string text = p.str("formula");
  if (p.has("formula_file")) {
    std::ifstream in(run.input(p.str("formula_file")));
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  FOFormula phi;
  try {
    phi = parse_fo(text);
  } catch (const ParseError& e) {
    throw UsageError(std::string("fo.formula: ") + e.what());
  }
  bool value = false;
  if (p.choice("mode", {"check", "nd"}) == "check") {
    value = fo_property_check(g, load_relations(run, p.list("relations"), g.n()), phi, run.guards.enumeration);
  } else {
    const auto res = fo_property_check_nd(g, phi, run.guards.enumeration);
    value = res.value;
    run.results["tables_tried"] = res.tables_tried;
    if (res.value) {
      Json rel = Json::array();
      for (const auto& t : res.relations) {
        Json members = Json::array();
        for (std::size_t i = 0; i < t.members.size(); ++i)
          if (t.members[i]) members.push_back(labels_json(colex_unrank(i, t.arity)));
        rel.push_back({{"arity", t.arity}, {"members", std::move(members)}});
      }
      run.results["relations"] = std::move(rel);
    }
  }
  run.results["value"] = value;
  const auto expect = p.choice("expect", {"any", "true", "false"});
  if (expect != "any") run.check("expectation", value == (expect == "true"));
}

inline Json bound_json(const BoundValue& b) {
  Json j{{"name", b.name}, {"formula", b.formula}, {"height", b.height}, {"value", b.value.str()}};
  if (b.exact_integer) j["exact_integer"] = b.exact_integer->get_str();
  if (b.exact_rational) j["exact_rational"] = q_text(*b.exact_rational);
  return j;
}

inline void suite_bounds(const Params& p, SuiteRun& run) {
  BoundInputs in;
  in.r = p.size("r");
  in.k = p.size("k");
  in.t = p.size("t");
  in.eps = p.rational("eps");
  in.delta = p.rational("delta");
  in.q0 = p.size("q0");
  in.s = p.size("s");
  in.c = p.rational("c");
  in.c_r = p.rational("c_r");
  in.c_rk = p.rational("c_rk");
  in.c_56 = p.rational("c_56");
  const auto rep = bound_calculator(in);
  run.results["pi"] = q_text(rep.pi);
  Json all = Json::array();
  run.table.header = {"name", "formula", "height", "value"};
  for (const auto* b : rep.all()) {
    all.push_back(bound_json(*b));
    run.table.rows.push_back({b->name, b->formula, std::to_string(b->height), b->value.str()});
  }
  run.results["bounds"] = std::move(all);
  if (rep.qtv_base) run.results["qtv_base_case"] = *rep.qtv_base;
  run.results["theta"] = q_text(rep.theta.theta);
  run.results["theta_sample_size"] = rep.theta.q_min;
  run.results["t2"] = rep.induction.t2.str();
  run.results["t1"] = rep.induction.t1.str();
}

inline const std::vector<Suite>& suites() {
  static const std::vector<Suite> all{
      {"sandwich", "cut-* norm sandwiched by t*(K_r^2, W) and the boxplus norm",
       {{"kernels", "", "comma-separated kernel files"},
        {"random", "0", "number of extra random signed kernels"},
        {"max_t", "4", "largest class count of random kernels"}},
       suite_sandwich},
      {"norm", "cut-*, cut-(*,P), boxplus, L1 and spectral values of a kernel",
       {{"kernel", "", "kernel file"},
        {"mode", "exact", "exact|ascent"},
        {"partition", "", "comma-separated class labels for the cut-(*,P) norm"}},
       suite_norm},
      {"wreg", "weak regularity partition with exhaustive probe certificate",
       {{"kernel", "", "kernel file"}, {"eps", "0.3", "target deviation"}, {"t_probe", "4", "probe partition size"}},
       suite_wreg},
      {"countlemma", "exact total variation against the cut distance bound",
       {{"u", "", "first kernel file"},
        {"w", "", "second kernel file"},
        {"random", "0", "number of extra random pairs"},
        {"r", "2", "uniformity of random pairs"},
        {"t", "2", "classes of random pairs"},
        {"k", "2", "colours of random pairs"},
        {"q", "3", "sample size"}},
       suite_countlemma},
      {"concentrate", "deviation frequency of t*(F, H(q,U)) against the sampling bound",
       {{"kernel", "", "plain kernel file (random graphon when empty)"},
        {"pattern", "", "hypergraph F (K_r^2 when empty)"},
        {"r", "2", "uniformity of the random graphon"},
        {"t", "3", "classes of the random graphon"},
        {"q", "500", "sample size"},
        {"delta", "0.1", "deviation threshold"},
        {"trials", "2000", "number of samples"}},
       suite_concentrate},
      {"gse", "ground state energy of a graph or kernel",
       {{"graph", "", "hypergraph file"},
        {"kernel", "", "plain kernel file"},
        {"array", "", "J array file"},
        {"mode", "exact", "exact|local (graphs)"},
        {"q", "100", "sample size of the sampling check (kernels)"},
        {"delta", "0.25", "deviation threshold of the sampling check"},
        {"trials", "0", "samples for the sampling check; 0 skips it"},
        {"planted_parts", "", "compare with the planted layout of this many contiguous parts (graphs)"},
        {"tol", "0.02", "largest gap to the planted value"}},
       suite_gse},
      {"ggse", "generalized ground state energy over (r-1)-set partitions",
       {{"graph", "", "coloured hypergraph file"},
        {"arrays", "", "comma-separated J array files, one per colour"},
        {"t", "2", "number of parts"},
        {"mode", "exact", "exact|local"}},
       suite_ggse},
      {"tensor", "search for a partition family satisfying a density tensor",
       {{"graph", "", "hypergraph file"},
        {"tensor", "", "density tensor file"},
        {"tol", "0", "entrywise tolerance"},
        {"expect", "any", "any|yes|no"}},
       suite_tensor},
      {"ndtest", "non-deterministic parameter tester simulation",
       {{"graph", "", "hypergraph file"},
        {"witness", "maxcut", "witness parameter name"},
        {"witness_params", "", "witness parameters"},
        {"eps", "0.2", "error tolerance"},
        {"q", "25", "sample size"},
        {"trials", "200", "number of samples"},
        {"mode", "exact", "exact|search"},
        {"measure", "false", "also measure the sample complexity"}},
       suite_ndtest},
      {"transfer", "coloring transfer from a sample to the whole graph, with a stage ledger",
       {{"graph", "", "graph file"},
        {"witness", "maxcut", "witness parameter used to colour the sample"},
        {"witness_params", "", "witness parameters"},
        {"q", "50", "sample size"},
        {"delta", "0.1", "accuracy target"},
        {"eps", "0.3", "regularity target"},
        {"size_cap", "3", "largest linear pattern compared"}},
       suite_transfer},
      {"dist", "edit distance to a property, bracketed past the search radius",
       {{"graph", "", "hypergraph file"},
        {"property", "", "edgeless|complete|triangle-free|clique-free|bipartite|two-colorable"},
        {"radius", "", "edit search radius (guards.edit_radius when empty)"},
        {"c", "", "tester threshold; empty skips the tester"},
        {"q", "8", "tester sample size"},
        {"trials", "20", "tester samples"}},
       suite_dist},
      {"fo", "exists-forall first order property check",
       {{"graph", "", "hypergraph file"},
        {"formula", "", "formula text"},
        {"formula_file", "", "file holding the formula"},
        {"relations", "", "comma-separated hypergraph files giving L1, L2, ..."},
        {"mode", "check", "check|nd (nd quantifies the relations existentially)"},
        {"expect", "any", "any|true|false"}},
       suite_fo},
      {"bounds", "explicit sample size and regularity bounds",
       {{"r", "2", ""},
        {"k", "2", ""},
        {"t", "2", ""},
        {"eps", "1/10", ""},
        {"delta", "1/10", ""},
        {"q0", "2", "witness sample complexity"},
        {"s", "2", "GSE array side"},
        {"c", "1", "constant of q_cut"},
        {"c_r", "1", "constant of q_tv"},
        {"c_rk", "1", "constant of q_f"},
        {"c_56", "1", "constant of the linear bound"}},
       suite_bounds},
  };
  return all;
}

inline const Suite& suite_by_name(const std::string& name) {
  for (const auto& s : suites())
    if (s.name == name) return s;
  throw UsageError("unknown suite '" + name + "'");
}

/// Defaults overlaid with the given settings; unknown keys are usage errors.
inline Params resolve(const Suite& s, const std::map<std::string, std::string>& given) {
  std::map<std::string, std::string> v;
  for (const auto& ps : s.params) v[ps.key] = ps.fallback;
  for (const auto& [k, val] : given) {
    if (!v.count(k)) throw UsageError(s.name + "." + k + ": unknown setting");
    v[k] = val;
  }
  return Params(s.name, std::move(v));
}

}  // namespace hypertest::cli
