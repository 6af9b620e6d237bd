#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hypertest/hypergraph.hpp"
#include "hypertest/kernel.hpp"
#include "hypertest/kernel_ops.hpp"
#include "hypertest/linear.hpp"
#include "hypertest/norms.hpp"
#include "hypertest/regularity.hpp"

namespace hypertest {

struct ColoringLemmaResult {
  ColoredStepKernel<Rational> vhat;
  Rational pre_distance = 0;   // d_{□,*,P}(U, V)
  Rational post_distance = 0;  // d_{□,*,P}(Û, V̂)
  Rational bound = 0;          // k·ε
  bool exact = true;           // false: both distances are L¹ upper bounds
  bool hypothesis_met = false;
  bool holds = false;          // post ≤ k·pre, and post ≤ k·ε when the hypothesis holds
};

namespace detail {

/// U^α = Σ_β Û^{(α,β)}.
inline ColoredStepKernel<Rational> discolor_kernel(const ColoredStepKernel<Rational>& uhat, std::size_t k) {
  ColoredStepKernel<Rational> u;
  u.r = uhat.r;
  u.t = uhat.t;
  u.k = uhat.k / k;
  u.weights = uhat.weights;
  u.values.assign(u.k, std::vector<Rational>(uhat.cell_count(), Rational(0)));
  for (std::size_t c = 0; c < uhat.k; ++c)
    for (std::size_t i = 0; i < uhat.cell_count(); ++i) u.values[c / k][i] += uhat.values[c][i];
  return u;
}

inline Rational l1_distance(const ColoredStepKernel<Rational>& a, const ColoredStepKernel<Rational>& b) {
  auto [x, y] = align(a, b);
  Rational total = 0;
  for (std::size_t c = 0; c < a.k; ++c) {
    StepKernel<Rational> d = x.component(c);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= y.values[c][i];
    total += l1_norm(d);
  }
  return total;
}

}  // namespace detail

/// Colours V after Û: on every cell of the common refinement, V's colour-α
/// mass is split over (α,β) in the proportions Û^{(α,β)} / U^α, or evenly
/// when U^α vanishes there. P is the step partition of Û. The distances are
/// evaluated exactly when `exact_check` is set, else bounded by L¹.
inline ColoringLemmaResult coloring_lemma(const ColoredStepKernel<Rational>& uhat, std::size_t k,
                                          const ColoredStepKernel<Rational>& v, const Rational& eps,
                                          bool exact_check = true,
                                          std::uint64_t guard = default_guards().enumeration) {
  if (k == 0 || uhat.k != v.k * k) throw InvalidColor("refined palette must be V's palette times k");
  if (uhat.r != v.r) throw InvalidArgument("kernels differ in r");
  const auto u = detail::discolor_kernel(uhat, k);
  auto [pa, pb] = common_refinement(uhat.weights, v.weights);
  const auto ua = relayout(u, pa);
  const auto uh = relayout(uhat, pa);
  const auto vb = relayout(v, pb);

  ColoringLemmaResult res;
  auto& out = res.vhat;
  out.r = v.r;
  out.t = vb.t;
  out.k = uhat.k;
  out.weights = vb.weights;
  const std::size_t cells = vb.cell_count();
  out.values.assign(out.k, std::vector<Rational>(cells, Rational(0)));
  const Rational share = Rational(1) / Rational(static_cast<long>(k));
  for (std::size_t i = 0; i < cells; ++i)
    for (std::size_t a = 0; a < v.k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        const Rational& s = ua.values[a][i];
        out.values[a * k + b][i] = s == 0 ? Rational(vb.values[a][i] * share)
                                          : Rational(vb.values[a][i] * uh.values[a * k + b][i] / s);
      }
  out.validate();

  res.bound = Rational(static_cast<long>(k)) * eps;
  res.exact = exact_check;
  if (exact_check) {
    const auto p = CellPartition::discrete(u.t);
    res.pre_distance = cut_distance(u, v, p, NormMode::exact, {}, guard).value;
    res.post_distance = cut_distance(uhat, out, p, NormMode::exact, {}, guard).value;
  } else {
    res.pre_distance = detail::l1_distance(u, v);
    res.post_distance = detail::l1_distance(uhat, out);
  }
  res.hypothesis_met = res.pre_distance <= eps;
  res.holds = res.post_distance <= Rational(static_cast<long>(k)) * res.pre_distance &&
              (!res.hypothesis_met || res.post_distance <= res.bound);
  return res;
}

// ---------------------------------------------------------------------------
// Coloring transfer

struct TransferOptions {
  double eps = 0.3;
  std::uint64_t seed = 1;
  std::size_t size_cap = 3;
  RegularityOptions regularity = [] {
    RegularityOptions o;
    o.t_probe = 1;
    return o;
  }();
  /// Exact cut norms on the block scale while 2^{m r} m^{r-1} stays below this.
  std::uint64_t exact_budget = std::uint64_t{1} << 22;
  std::uint64_t guard = default_guards().enumeration;
};

struct TransferStage {
  std::string name;
  double distance = 0;  // this link's share of the chain bound
  double target = 0;    // informational Δ-style target
  std::string certificate;
  bool certified = false;
  bool within_target = false;
  std::string note;
};

struct TransferReport {
  std::vector<TransferStage> stages;
  std::size_t blocks = 0;
  double total_distance = 0;  // Σ over the chain links
  double budget = 0;          // max_F |E(F)| · total_distance
  double discrepancy = 0;     // max_F |t*(F, Ĝ) − t*(F, F̂)|
  std::size_t patterns = 0;
  std::size_t pattern_violations = 0;
  bool certified = false;
  bool within_targets = false;
  std::string failed_stage;
  ColoredHypergraph ghat;  // refined colouring of G, palette [2] x [k]
  LinearDensityVector ghat_vector;
  LinearDensityVector fhat_vector;
};

namespace detail {

/// Dense r-array on t uniform classes; values[c][cell].
struct DenseColoring {
  std::size_t r = 2, t = 0, colors = 0;
  std::vector<std::vector<double>> values;
};

inline double dense_bound(const std::vector<double>& diff, std::size_t t, std::size_t r) {
  StepKernel<double> d;
  d.r = r;
  d.t = t;
  d.weights.assign(t, 1.0 / static_cast<double>(t));
  d.values = diff;
  double best = l1_norm(d) * (1 + 1e-12);
  if (r == 2 && best > 0) best = std::min(best, spectral_bound(d));
  return best;
}

inline std::pair<double, std::string> chain_bound(const DenseColoring& a, const DenseColoring& b,
                                                  std::size_t colors) {
  double total = 0;
  std::vector<double> diff(a.values[0].size());
  for (std::size_t c = 0; c < colors; ++c) {
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.values[c][i] - b.values[c][i];
    total += dense_bound(diff, a.t, a.r);
  }
  return {total, a.r == 2 ? "spectral/l1" : "l1"};
}

}  // namespace detail

/// Transfers a k-colouring F̂ of the sample F = G[S] to a k-colouring Ĝ of G.
/// Stages:
///   regularity         Q = weak-regularity partition of W_G (certified ≤ ε)
///   alignment          sample blocks Q∩S matched to Q by label; the class
///                      coupling costs r·Σ|λ(Q_i) − λ(Q_i∩S)|
///   sample-regularity  Z = average of W_F̂ on the blocks Q∩S
///   coloring-lemma     V̂ = colouring of V = W_G averaged on Q, after Z
///   rounding           slots inside S copy F̂, the rest draw β from V̂'s
///                      proportions on their block cell
/// Each link carries a certified bound on its cut-* distance, summed over the
/// refined real colours; the linear counting lemma then bounds every linear
/// density gap by |E(F)| times the sum.
inline TransferReport coloring_transfer(const Hypergraph& g, std::vector<std::size_t> sample,
                                        const ColoredHypergraph& fhat, std::size_t k, double delta,
                                        const TransferOptions& opt = {}) {
  const std::size_t n = g.n(), r = g.r(), q = sample.size();
  std::sort(sample.begin(), sample.end());
  const auto base_f = induced_subgraph(g.colored(), sample);
  if (fhat.n() != q || fhat.k() != 2 * k || discolor(fhat, k) != base_f)
    throw InvalidColor("F̂ is not a k-colouring of the sampled graph");
  check_guard(sat_mul(ipow(n, r), 2 * k + 1), opt.guard, "coloring_transfer");
  const std::size_t real = 2 * k;        // refined real colours
  const std::size_t base_colors = 3;     // edge, non-edge, loop
  const std::size_t loop = 2;
  TransferReport rep;
  auto stage = [&](std::string name, double distance, double target, std::string cert, bool ok,
                   std::string note = {}) {
    TransferStage s{std::move(name), distance, target, std::move(cert), ok, distance <= target, std::move(note)};
    rep.stages.push_back(std::move(s));
  };

  // base colour of a tuple of G (or F) vertices
  std::vector<std::size_t> sorted(r);
  auto base_color = [&](const ColoredHypergraph& h, std::span<const std::size_t> cell) -> std::size_t {
    std::copy(cell.begin(), cell.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return loop;
    return h.color(sorted);
  };

  // --- regularity
  CellPartition blocks;
  if (q == n) {
    blocks = CellPartition::discrete(n);
    stage("regularity", 0, opt.eps, "identity (sample is the whole graph)", true);
  } else {
    auto w = convert<double>(graph_to_kernel(g));
    RegularityOptions ro = opt.regularity;
    ro.active_colors = {true, true, false};
    const auto reg = weak_regularity(w, opt.eps, ro);
    blocks = reg.q;
    stage("regularity", 0, opt.eps, reg.certificate, reg.certified,
          "deviation " + scalar_text(reg.deviation) + ", " + std::to_string(reg.q.block_count()) + " blocks");
  }
  const std::size_t m = blocks.block_count();
  rep.blocks = m;

  // --- alignment
  std::vector<std::size_t> count_g(m, 0), count_s(m, 0), block_of_sample(q);
  for (std::size_t v = 0; v < n; ++v) ++count_g[blocks[v]];
  for (std::size_t j = 0; j < q; ++j) {
    block_of_sample[j] = blocks[sample[j]];
    ++count_s[block_of_sample[j]];
  }
  std::vector<Rational> a(m), b(m);
  Rational tv = 0;
  for (std::size_t i = 0; i < m; ++i) {
    a[i] = Rational(static_cast<long>(count_g[i])) / Rational(static_cast<long>(n));
    b[i] = Rational(static_cast<long>(count_s[i])) / Rational(static_cast<long>(q));
    tv += abs(a[i] - b[i]);
  }
  const double d_align = static_cast<double>(r) * tv.get_d();
  stage("alignment", d_align, delta / (8.0 * static_cast<double>(k)), "l1-coupling", true);

  // --- block averages: V (G side, weights a) and Z (sample side, weights b)
  const std::size_t bcells = ipow(m, r);
  std::vector<std::vector<Rational>> vsum(base_colors, std::vector<Rational>(bcells, Rational(0)));
  std::vector<std::vector<Rational>> zsum(base_colors * k, std::vector<Rational>(bcells, Rational(0)));
  std::vector<long> vcnt(bcells, 0), zcnt(bcells, 0);
  std::vector<std::size_t> bc(r);
  {
    std::vector<std::vector<long>> tally(base_colors, std::vector<long>(bcells, 0));
    for (std::size_t idx = 0; idx < ipow(n, r); ++idx) {
      const auto cell = cell_of_index(idx, n, r);
      for (std::size_t j = 0; j < r; ++j) bc[j] = blocks[cell[j]];
      const std::size_t bi = cell_index(bc, m);
      ++tally[base_color(g.colored(), cell)][bi];
      ++vcnt[bi];
    }
    for (std::size_t c = 0; c < base_colors; ++c)
      for (std::size_t i = 0; i < bcells; ++i)
        if (vcnt[i]) vsum[c][i] = Rational(tally[c][i]) / Rational(vcnt[i]);
  }
  std::vector<std::size_t> fimage(r);
  auto refined_color = [&](std::span<const std::size_t> cell) -> std::size_t {
    const std::size_t bcol = base_color(base_f, cell);
    if (bcol == loop) return loop * k;
    return fhat.color(sorted);
  };
  {
    std::vector<std::vector<long>> tally(base_colors * k, std::vector<long>(bcells, 0));
    for (std::size_t idx = 0; idx < ipow(q, r); ++idx) {
      const auto cell = cell_of_index(idx, q, r);
      for (std::size_t j = 0; j < r; ++j) bc[j] = block_of_sample[cell[j]];
      const std::size_t bi = cell_index(bc, m);
      ++tally[refined_color(cell)][bi];
      ++zcnt[bi];
    }
    for (std::size_t c = 0; c < base_colors * k; ++c)
      for (std::size_t i = 0; i < bcells; ++i)
        if (zcnt[i]) zsum[c][i] = Rational(tally[c][i]) / Rational(zcnt[i]);
  }
  // cells the sample misses carry no sample mass; they take V's colours split evenly
  const Rational share = Rational(1) / Rational(static_cast<long>(k));
  for (std::size_t i = 0; i < bcells; ++i)
    if (!zcnt[i])
      for (std::size_t c = 0; c < base_colors * k; ++c) zsum[c][i] = vsum[c / k][i] * share;

  ColoredStepKernel<Rational> vk(r, a, vsum);
  ColoredStepKernel<Rational> za(r, a, zsum);

  // --- sample-regularity: W_F̂ against Z lifted to the q sample classes
  detail::DenseColoring wf{r, q, real, std::vector<std::vector<double>>(real, std::vector<double>(ipow(q, r), 0.0))};
  detail::DenseColoring zl = wf;
  for (std::size_t idx = 0; idx < ipow(q, r); ++idx) {
    const auto cell = cell_of_index(idx, q, r);
    for (std::size_t j = 0; j < r; ++j) bc[j] = block_of_sample[cell[j]];
    const std::size_t bi = cell_index(bc, m);
    const std::size_t c = refined_color(cell);
    if (c < real) wf.values[c][idx] = 1;
    for (std::size_t cc = 0; cc < real; ++cc) zl.values[cc][idx] = zsum[cc][bi].get_d();
  }
  const auto [d_sample, cert_sample] = detail::chain_bound(wf, zl, real);
  stage("sample-regularity", d_sample, delta, cert_sample, true);

  // --- coloring lemma on the block scale
  const bool exact_blocks =
      sat_mul(sat_pow(2, m * r), ipow(std::max<std::size_t>(m, 1), r - 1)) <= opt.exact_budget;
  const auto lemma = coloring_lemma(za, k, vk, parse_rational(scalar_text(opt.eps)), exact_blocks, opt.guard);
  const auto& vhat = lemma.vhat;  // common refinement of equal layouts: the m blocks
  double d_lemma = 0;
  for (std::size_t c = 0; c < real; ++c) {
    StepKernel<Rational> d = vhat.component(c);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= za.values[c][i];
    d_lemma += exact_blocks ? cut_star_norm(d, NormMode::exact, {}, opt.guard).value.get_d()
                            : l1_norm(d).get_d() * (1 + 1e-12);
  }
  stage("coloring-lemma", d_lemma, delta, exact_blocks ? "exact" : "l1",
        lemma.hypothesis_met && lemma.holds,
        "pre " + scalar_text(lemma.pre_distance.get_d()) + ", post " + scalar_text(lemma.post_distance.get_d()));

  // --- lift: K1 = W_G coloured in V̂'s proportions; against V̂ lifted to n classes
  std::vector<std::vector<double>> ratio_b(real, std::vector<double>(bcells, 0.0));
  for (std::size_t i = 0; i < bcells; ++i)
    for (std::size_t al = 0; al < 2; ++al) {
      Rational s = 0;
      for (std::size_t be = 0; be < k; ++be) s += zsum[al * k + be][i];
      for (std::size_t be = 0; be < k; ++be)
        ratio_b[al * k + be][i] = s == 0 ? share.get_d() : Rational(zsum[al * k + be][i] / s).get_d();
    }
  const std::size_t gcells = ipow(n, r);
  detail::DenseColoring k1{r, n, real, std::vector<std::vector<double>>(real, std::vector<double>(gcells, 0.0))};
  detail::DenseColoring vl = k1, wg = k1;
  std::vector<std::size_t> pos(n, SIZE_MAX);
  for (std::size_t j = 0; j < q; ++j) pos[sample[j]] = j;

  // rounding to Ĝ
  Rng rng(opt.seed);
  ColoredHypergraph ghat(r, n, real);
  std::vector<double> probs(k);
  for_each_subset(n, r, [&](std::span<const std::size_t> s) {
    const Color al = g.colored().color(s);
    bool inside = true;
    for (std::size_t j = 0; j < r; ++j) {
      inside = inside && pos[s[j]] != SIZE_MAX;
      bc[j] = blocks[s[j]];
    }
    if (inside) {
      for (std::size_t j = 0; j < r; ++j) fimage[j] = pos[s[j]];
      ghat.set_color(s, fhat.color(fimage));
      return;
    }
    const std::size_t bi = cell_index(bc, m);
    for (std::size_t be = 0; be < k; ++be) probs[be] = ratio_b[al * k + be][bi];
    ghat.set_color(s, Coloring::encode(al, static_cast<Color>(draw_categorical(rng, probs)), k));
  });

  for (std::size_t idx = 0; idx < gcells; ++idx) {
    const auto cell = cell_of_index(idx, n, r);
    for (std::size_t j = 0; j < r; ++j) bc[j] = blocks[cell[j]];
    const std::size_t bi = cell_index(bc, m);
    const std::size_t al = base_color(g.colored(), cell);
    for (std::size_t c = 0; c < real; ++c) vl.values[c][idx] = vhat.values[c][bi].get_d();
    if (al == loop) continue;
    for (std::size_t be = 0; be < k; ++be) k1.values[al * k + be][idx] = ratio_b[al * k + be][bi];
    wg.values[ghat.color(sorted)][idx] = 1;
  }
  const auto [d_lift, cert_lift] = detail::chain_bound(k1, vl, real);
  // the regularity link: colouring W_G instead of its block average
  rep.stages[0].distance = d_lift;
  rep.stages[0].certificate += " + " + cert_lift;
  rep.stages[0].within_target = d_lift <= rep.stages[0].target;
  const auto [d_round, cert_round] = detail::chain_bound(wg, k1, real);
  stage("rounding", d_round, delta, cert_round, true);

  // --- composition
  rep.ghat = ghat;
  for (const auto& s : rep.stages) rep.total_distance += s.distance;
  rep.ghat_vector = linear_density_vector(ghat, opt.size_cap, opt.guard);
  rep.fhat_vector = linear_density_vector(fhat, opt.size_cap, opt.guard);
  rep.patterns = rep.ghat_vector.patterns.size();
  for (std::size_t i = 0; i < rep.patterns; ++i) {
    const double e = static_cast<double>(rep.ghat_vector.patterns[i].edges.size());
    const double gap = std::fabs(Rational(rep.ghat_vector.densities[i] - rep.fhat_vector.densities[i]).get_d());
    rep.discrepancy = std::max(rep.discrepancy, gap);
    rep.budget = std::max(rep.budget, e * rep.total_distance);
    if (gap > e * rep.total_distance + 1e-12) ++rep.pattern_violations;
  }
  stage("composition", 0, 5 * delta, "linear-counting", rep.pattern_violations == 0,
        "discrepancy " + scalar_text(rep.discrepancy) + " vs budget " + scalar_text(rep.budget));
  rep.stages.back().within_target = rep.total_distance <= 5 * delta;

  rep.certified = true;
  rep.within_targets = true;
  for (const auto& s : rep.stages) {
    if (!s.certified && rep.certified) {
      rep.certified = false;
      rep.failed_stage = s.name;
    }
    rep.within_targets = rep.within_targets && s.within_target;
  }
  return rep;
}

}  // namespace hypertest
