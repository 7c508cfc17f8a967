#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "confdim/gauge.hpp"
#include "confdim/metric.hpp"
#include "confdim/modulus.hpp"
#include "confdim/weights.hpp"
#include "json.hpp"

namespace confdim {

struct CertificateSection {
  std::string name;
  bool asserted = true;  // false: informational/reported only
  long long checked = 0;
  long long violations = 0;
  std::string witness;
  nlohmann::json measured;
  nlohmann::json bound;

  std::string status() const {
    if (!asserted) return "reported";
    return violations == 0 ? "pass" : "fail";
  }

  nlohmann::json to_json() const {
    return {{"name", name},         {"status", status()},   {"checked", checked},
            {"violations", violations}, {"witness", witness}, {"measured", measured},
            {"bound", bound}};
  }
};

struct CertificateReport {
  std::vector<CertificateSection> sections;
  uint64_t seed = 0;

  bool all_pass() const {
    for (const auto& s : sections)
      if (s.asserted && s.violations > 0) return false;
    return true;
  }

  const CertificateSection* find(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }

  nlohmann::json to_json(const nlohmann::json& config = {}) const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : sections) arr.push_back(s.to_json());
    nlohmann::json j{{"schema", "confdim.certificates.v1"}, {"seed", seed}, {"certificates", arr}};
    if (!config.is_null() && !config.empty()) j["config"] = config;
    return j;
  }
};

/// Tree shape: every nonroot vertex has a parent that is a vertical graph
/// neighbor, persisting points keep themselves, and parent edges connect.
inline CertificateSection certify_tree(const FillingGraph& g) {
  CertificateSection s;
  s.name = "tree";
  std::vector<int> comp(static_cast<size_t>(g.vertex_count()));
  for (int v = 0; v < g.vertex_count(); ++v) comp[static_cast<size_t>(v)] = v;
  std::function<int(int)> find = [&](int x) {
    while (comp[static_cast<size_t>(x)] != x) x = comp[static_cast<size_t>(x)] = comp[static_cast<size_t>(comp[static_cast<size_t>(x)])];
    return x;
  };
  for (int v = 1; v < g.vertex_count(); ++v) {
    ++s.checked;
    const int par = g.tree_parent[static_cast<size_t>(v)];
    bool ok = par >= 0;
    if (ok) {
      const auto& ups = g.parents[static_cast<size_t>(v)];
      ok = std::find(ups.begin(), ups.end(), par) != ups.end();
    }
    if (ok) {
      const int k = g.level_of(v);
      const int same = g.vertex(g.point_of(v), k - 1);
      if (same >= 0 && par != same) ok = false;  // persisting point must keep itself
    }
    if (!ok) {
      ++s.violations;
      if (s.witness.empty()) s.witness = "vertex " + std::to_string(v);
      continue;
    }
    comp[static_cast<size_t>(find(v))] = find(par);
  }
  int stray = 0;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (find(v) != find(0)) {
      ++stray;
      if (s.witness.empty()) s.witness = "vertex " + std::to_string(v) + " disconnected";
    }
  s.violations += stray;
  s.measured = {{"vertices", g.vertex_count()}, {"disconnected", stray}};
  return s;
}

/// (H1): eta_minus <= rho <= max(eta_plus, (1-eta_minus^p)^(1/p)) < 1.
inline CertificateSection certify_h1(const WeightSystem& ws) {
  CertificateSection s;
  s.name = "H1";
  const double lo = ws.constants.eta_minus;
  const double hi = ws.constants.rho_upper();
  double rmin = 1.0, rmax = 0.0;
  for (int v = 1; v < ws.graph->vertex_count(); ++v) {
    ++s.checked;
    const double r = ws.rho[static_cast<size_t>(v)];
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    if (lt(r, lo) || lt(hi, r)) {
      ++s.violations;
      if (s.witness.empty())
        s.witness = "vertex " + std::to_string(v) + " rho=" + std::to_string(r);
    }
  }
  if (!(hi < 1.0)) {
    ++s.violations;
    if (s.witness.empty()) s.witness = "upper bound itself >= 1";
  }
  s.measured = {{"rho_min", rmin}, {"rho_max", rmax}};
  s.bound = {{"eta_minus", lo}, {"upper", hi}};
  return s;
}

/// Children normalization sum rho^p = 1 per internal vertex.
inline CertificateSection certify_normalization(const WeightSystem& ws, double tol = 1e-9) {
  CertificateSection s;
  s.name = "normalization";
  const FillingGraph& g = *ws.graph;
  double worst = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.level_of(v) >= g.depth) continue;
    ++s.checked;
    double sum = 0.0;
    for (int w : tree_children(g, v)) sum += std::pow(ws.rho[static_cast<size_t>(w)], ws.constants.p);
    const double err = std::abs(sum - 1.0);
    worst = std::max(worst, err);
    if (err > tol) {
      ++s.violations;
      if (s.witness.empty()) s.witness = "vertex " + std::to_string(v);
    }
  }
  s.measured = {{"worst_residual", worst}};
  s.bound = {{"tol", tol}};
  return s;
}

/// Exact tree (H4): sum over D_j(v) of pi^p equals pi(v)^p at every depth.
inline CertificateSection certify_tree_h4(const WeightSystem& ws, double tol = 1e-9) {
  CertificateSection s;
  s.name = "tree_H4";
  const FillingGraph& g = *ws.graph;
  double worst = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const int kv = g.level_of(v);
    for (int j = 1; kv + j <= g.depth; ++j) {
      ++s.checked;
      double sum = 0.0;
      for (int w : descendants_tree(g, v, j)) sum += std::pow(ws.pi[static_cast<size_t>(w)], ws.constants.p);
      const double ref = std::pow(ws.pi[static_cast<size_t>(v)], ws.constants.p);
      const double err = std::abs(sum - ref) / std::max(ref, 1e-300);
      worst = std::max(worst, err);
      if (err > tol) {
        ++s.violations;
        if (s.witness.empty())
          s.witness = "vertex " + std::to_string(v) + " depth " + std::to_string(j);
      }
    }
  }
  s.measured = {{"worst_relative_residual", worst}};
  s.bound = {{"tol", tol}};
  return s;
}

/// Graph (H4): K2^-1 pi(v)^p <= sum over DG_k(v) pi^p <= K2 pi(v)^p.
inline CertificateSection certify_graph_h4(const WeightSystem& ws) {
  CertificateSection s;
  s.name = "graph_H4";
  const FillingGraph& g = *ws.graph;
  const double K2 = ws.constants.K2;
  double worst = 0.0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const int kv = g.level_of(v);
    for (int j = 1; kv + j <= g.depth; ++j) {
      ++s.checked;
      double sum = 0.0;
      for (int w : descendants_graph(g, v, j)) sum += std::pow(ws.pi[static_cast<size_t>(w)], ws.constants.p);
      const double ref = std::pow(ws.pi[static_cast<size_t>(v)], ws.constants.p);
      const double ratio = sum / std::max(ref, 1e-300);
      worst = std::max(worst, std::max(ratio / K2, 1.0 / (K2 * ratio)));
      if (lt(K2, ratio) || lt(ratio, 1.0 / K2)) {
        ++s.violations;
        if (s.witness.empty())
          s.witness = "vertex " + std::to_string(v) + " offset " + std::to_string(j);
      }
    }
  }
  s.measured = {{"worst_ratio_vs_K2", worst}};
  s.bound = {{"K2", K2}};
  return s;
}

/// (H2): pi-ratio within K0 across tree edges and horizontal edges; the
/// horizontal case also satisfies the stronger sqrt(K0) bound.
inline CertificateSection certify_h2(const WeightSystem& ws) {
  CertificateSection s;
  s.name = "H2";
  const FillingGraph& g = *ws.graph;
  const double K0 = ws.constants.K0;
  const double K0h = std::sqrt(K0);
  double worst = 1.0;
  auto check = [&](int a, int b, double cap) {
    ++s.checked;
    const double r = ws.pi[static_cast<size_t>(a)] / ws.pi[static_cast<size_t>(b)];
    worst = std::max(worst, std::max(r, 1.0 / r));
    if (lt(cap, r) || lt(r, 1.0 / cap)) {
      ++s.violations;
      if (s.witness.empty())
        s.witness = "edge (" + std::to_string(a) + "," + std::to_string(b) + ") ratio " +
                    std::to_string(r);
    }
  };
  for (int v = 1; v < g.vertex_count(); ++v)
    check(v, g.tree_parent[static_cast<size_t>(v)], K0);
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int u : g.horiz[static_cast<size_t>(v)])
      if (v < u) {
        check(v, u, K0);
        check(v, u, K0h);
      }
  s.measured = {{"worst_ratio", worst}};
  s.bound = {{"K0", K0}, {"sqrt_K0", K0h}};
  return s;
}

/// (H3): d_rho(u,v) >= pi(z_{u,v}) / (K0^6 (K0+1)) over sampled pairs, plus
/// the tree-view companion ell-distance >= K0^-6 pi(z) and the explicit
/// upper companion d_rho <= 2 (K0+1) (1-rho_max)^-1 pi(z).
inline CertificateSection certify_h3(const WeightSystem& ws, long long samples = 1000,
                                     uint64_t seed = 42) {
  CertificateSection s;
  s.name = "H3";
  const FillingGraph& g = *ws.graph;
  const int nv = g.vertex_count();
  const double K0 = ws.constants.K0;
  const double K1 = std::pow(K0, 6.0) * (K0 + 1.0);
  double rho_max = 0.0;
  for (int v = 1; v < nv; ++v) rho_max = std::max(rho_max, ws.rho[static_cast<size_t>(v)]);
  const double upper_c = 2.0 * (K0 + 1.0) / (1.0 - rho_max);
  auto sw = star_weights(ws);

  std::vector<std::pair<int, int>> pairs;
  const long long all = static_cast<long long>(nv) * (nv - 1) / 2;
  if (all <= 10000) {
    for (int u = 0; u < nv; ++u)
      for (int v = u + 1; v < nv; ++v) pairs.push_back({u, v});
  } else {
    Rng rng(seed);
    while (static_cast<long long>(pairs.size()) < samples) {
      int u = static_cast<int>(rng.below(static_cast<uint64_t>(nv)));
      int v = static_cast<int>(rng.below(static_cast<uint64_t>(nv)));
      if (u != v) pairs.push_back({std::min(u, v), std::max(u, v)});
    }
  }
  std::sort(pairs.begin(), pairs.end());
  double best_k1 = 0.0;  // tightest empirical constant pi(z)/d
  auto cost = [&](int a, int b) { return edge_integral(ws, a, b); };
  auto lcost = [&](int a, int b) { return ell_edge(ws, sw, a, b); };
  size_t i = 0;
  while (i < pairs.size()) {
    const int src = pairs[i].first;
    auto dist = detail::dijkstra_all(g, src, false, cost);
    auto ldist = detail::dijkstra_all(g, src, true, lcost);
    for (; i < pairs.size() && pairs[i].first == src; ++i) {
      const int v = pairs[i].second;
      ++s.checked;
      const int z = compute_z(g, src, v);
      const double piz = ws.pi[static_cast<size_t>(z)];
      const double d = dist[static_cast<size_t>(v)];
      const double ld = ldist[static_cast<size_t>(v)];
      bool ok = !lt(d, piz / K1);
      ok = ok && !lt(ld, piz / std::pow(K0, 6.0));
      ok = ok && !lt(upper_c * piz, d);
      if (d > 0.0) best_k1 = std::max(best_k1, piz / d);
      if (!ok) {
        ++s.violations;
        if (s.witness.empty())
          s.witness = "pair (" + std::to_string(src) + "," + std::to_string(v) + ")";
      }
    }
  }
  s.measured = {{"pairs", static_cast<long long>(pairs.size())}, {"empirical_K1", best_k1}};
  s.bound = {{"K1", K1}, {"upper_companion", upper_c}};
  return s;
}

/// (H3') for rho: along family paths, sum of min(rho*(v_i), rho*(v_{i+1}))
/// is at least 1. Checked on the solver's active paths and random paths of
/// every nonempty family.
inline CertificateSection certify_h3prime(const WeightSystem& ws, int random_paths = 1000,
                                          uint64_t seed = 42, SolverOptions opt = {}) {
  CertificateSection s;
  s.name = "H3prime";
  const FillingGraph& g = *ws.graph;
  auto sw = star_weights(ws);
  Rng rng(seed);
  int nonempty = 0;
  double worst = std::numeric_limits<double>::infinity();
  auto check_path = [&](const PathFamily& fam, const std::vector<int>& path) {
    if (path.size() < 2) return;  // the sum below needs at least one edge
    ++s.checked;
    double sum = 0.0;
    for (size_t t = 0; t + 1 < path.size(); ++t) {
      const int a = fam.vertices[static_cast<size_t>(path[t])];
      const int b = fam.vertices[static_cast<size_t>(path[t + 1])];
      sum += std::min(sw.rho_star[static_cast<size_t>(a)], sw.rho_star[static_cast<size_t>(b)]);
    }
    worst = std::min(worst, sum);
    if (lt(sum, 1.0)) {
      ++s.violations;
      if (s.witness.empty())
        s.witness = "family " + std::to_string(fam.base_vertex);
    }
  };
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.level_of(v) + 1 > g.depth) continue;
    auto fam = build_family(g, v, 1, true);
    if (!detail::family_has_route(fam)) continue;
    ++nonempty;
    auto res = solve_modulus(fam, ws.constants.p, opt);
    for (const auto& P : res.active_paths) check_path(fam, P);
    const int per_family = std::max(1, random_paths / std::max(1, nonempty));
    for (int t = 0; t < per_family; ++t) {
      auto P = sample_path(fam, rng);
      if (!P.empty()) check_path(fam, P);
    }
  }
  s.measured = {{"nonempty_families", nonempty},
                {"worst_sum", nonempty && s.checked ? worst : 1.0}};
  s.bound = {{"min_sum", 1.0}};
  return s;
}

/// Ball-counting regularity audit of the boundary metric with counting
/// measure: N(y,r) / (N_total (r/diam)^p) across a scale grid. Reported,
/// not asserted, except on synthetic homogeneous instances.
inline CertificateSection regularity_profile(const BoundaryMetric& bm, double p,
                                             int scale_steps = 8, bool asserted = false,
                                             double assert_C = 0.0) {
  CertificateSection s;
  s.name = "regularity";
  s.asserted = asserted;
  const int n = static_cast<int>(bm.ids.size());
  double diam = 0.0, min_pos = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      diam = std::max(diam, bm.matrix[static_cast<size_t>(i)][static_cast<size_t>(j)]);
      if (bm.matrix[static_cast<size_t>(i)][static_cast<size_t>(j)] > 0.0)
        min_pos = std::min(min_pos, bm.matrix[static_cast<size_t>(i)][static_cast<size_t>(j)]);
    }
  if (!(diam > 0.0)) {
    s.measured = {{"note", "degenerate metric"}};
    return s;
  }
  double ratio_min = std::numeric_limits<double>::infinity(), ratio_max = 0.0;
  for (int step = 0; step <= scale_steps; ++step) {
    const double r =
        diam * std::pow(std::max(min_pos, 1e-300) / diam, static_cast<double>(step) / scale_steps);
    for (int y = 0; y < n; ++y) {
      ++s.checked;
      int count = 0;
      for (int z = 0; z < n; ++z)
        if (leq(bm.matrix[static_cast<size_t>(y)][static_cast<size_t>(z)], r)) ++count;
      const double expect = n * std::pow(r / diam, p);
      const double ratio = count / expect;
      ratio_min = std::min(ratio_min, ratio);
      ratio_max = std::max(ratio_max, ratio);
    }
  }
  s.measured = {{"ratio_min", ratio_min}, {"ratio_max", ratio_max}, {"diam", diam}};
  if (asserted && assert_C > 0.0) {
    if (ratio_max > assert_C || ratio_min < 1.0 / assert_C) ++s.violations;
    s.bound = {{"C", assert_C}};
  }
  return s;
}

/// Empirical distortion between the base metric and the boundary metric on
/// sampled triples of deepest-net points; reports the monotone envelope
/// range (finite on a finite sample, the interesting part is its size).
inline CertificateSection distortion_profile(const PointCloudSpace& base,
                                             const FillingGraph& g,
                                             const BoundaryMetric& bm, long long triples = 50000,
                                             uint64_t seed = 9) {
  CertificateSection s;
  s.name = "distortion";
  s.asserted = false;
  const int n = static_cast<int>(bm.ids.size());
  const auto& pts = g.level_points[static_cast<size_t>(bm.depth)];
  Rng rng(seed);
  double env_max = 0.0, t_lo = std::numeric_limits<double>::infinity(), t_hi = 0.0;
  for (long long t = 0; t < triples; ++t) {
    const int a = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    const int b = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    const int c = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    if (a == c || a == b) continue;
    const double d13 = base.dist(pts[static_cast<size_t>(a)], pts[static_cast<size_t>(c)]);
    const double r13 = bm.matrix[static_cast<size_t>(a)][static_cast<size_t>(c)];
    if (!(d13 > 0.0) || !(r13 > 0.0)) continue;
    const double tt = base.dist(pts[static_cast<size_t>(a)], pts[static_cast<size_t>(b)]) / d13;
    const double ratio = bm.matrix[static_cast<size_t>(a)][static_cast<size_t>(b)] / r13;
    ++s.checked;
    t_lo = std::min(t_lo, tt);
    t_hi = std::max(t_hi, tt);
    env_max = std::max(env_max, ratio);
  }
  s.measured = {{"t_min", t_lo}, {"t_max", t_hi}, {"eta_hat_max", env_max}};
  return s;
}

/// The aggregate suite used by `certify --all`.
inline CertificateReport certify_all(const WeightSystem& ws, long long h3_samples = 1000,
                                     uint64_t seed = 42) {
  CertificateReport rep;
  rep.seed = seed;
  rep.sections.push_back(certify_tree(*ws.graph));
  rep.sections.push_back(certify_h1(ws));
  rep.sections.push_back(certify_normalization(ws));
  rep.sections.push_back(certify_tree_h4(ws));
  rep.sections.push_back(certify_graph_h4(ws));
  rep.sections.push_back(certify_h2(ws));
  rep.sections.push_back(certify_h3(ws, h3_samples, seed));
  rep.sections.push_back(certify_h3prime(ws, 1000, seed));
  return rep;
}

}  // namespace confdim
