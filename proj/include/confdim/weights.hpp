#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "confdim/common.hpp"
#include "confdim/filling_graph.hpp"
#include "confdim/modulus.hpp"
#include "json.hpp"

namespace confdim {

/// All constants the weight construction runs on. Theory mode derives and
/// enforces every inequality; practical mode lets eps/eps0/n0 be set
/// directly and records the same inequalities as diagnostics.
struct ConstantsRecord {
  double p = 2.0;
  double alpha = 0.0;
  double tau = 0.0;
  double K_d = 0.0;
  long long N1 = 0;
  int N2 = 0;
  int M = 0;  // max |T(v)|, measured on the built graph
  double epsilon = 0.0;
  double epsilon0 = 0.0;
  int n0 = 1;
  double eta_minus = 0.0;
  double eta_plus = 0.0;
  double K = 0.0;   // 1/eta_minus
  double K0 = 0.0;  // eq. ratio-bound constant, squared form
  double K2 = 0.0;  // (N2+1) * K0^p
  Mode mode = Mode::practical;

  double rho_upper() const {
    return std::max(eta_plus, std::pow(1.0 - std::pow(eta_minus, p), 1.0 / p));
  }

  nlohmann::json to_json() const {
    return {{"p", p},           {"alpha", alpha},     {"tau", tau},
            {"K_d", K_d},       {"N1", N1},           {"N2", N2},
            {"M", M},           {"epsilon", epsilon}, {"epsilon0", epsilon0},
            {"n0", n0},         {"eta_minus", eta_minus}, {"eta_plus", eta_plus},
            {"K", K},           {"K0", K0},           {"K2", K2},
            {"mode", to_string(mode)}};
  }

  static ConstantsRecord from_json(const nlohmann::json& j) {
    ConstantsRecord c;
    c.p = j.at("p");
    c.alpha = j.at("alpha");
    c.tau = j.at("tau");
    c.K_d = j.at("K_d");
    c.N1 = j.at("N1");
    c.N2 = j.at("N2");
    c.M = j.at("M");
    c.epsilon = j.at("epsilon");
    c.epsilon0 = j.at("epsilon0");
    c.n0 = j.at("n0");
    c.eta_minus = j.at("eta_minus");
    c.eta_plus = j.at("eta_plus");
    c.K = j.at("K");
    c.K0 = j.at("K0");
    c.K2 = j.at("K2");
    c.mode = mode_from_string(j.at("mode"));
    return c;
  }
};

inline ConstantsRecord derive_constants(double p, double epsilon, double epsilon0,
                                        const FillingGraph& g, const StructureConstants& sc,
                                        Mode mode, Diagnostics& diag) {
  ConstantsRecord c;
  c.p = p;
  c.alpha = g.alpha;
  c.tau = g.tau;
  c.K_d = sc.K_d;
  c.N1 = sc.N1;
  c.N2 = g.n2;
  c.M = max_extended_children(g);
  c.epsilon = epsilon;
  c.epsilon0 = epsilon0;
  c.n0 = g.step;
  c.mode = mode;
  c.eta_minus = std::pow(epsilon / c.M, 1.0 / p);
  c.eta_plus = std::pow(2.0, 1.0 + 1.0 / p) * std::pow(c.N2 + 1.0, 1.0 / p) * std::pow(epsilon, 1.0 / p);
  c.K = 1.0 / c.eta_minus;
  const double em = c.eta_minus;
  const double base = std::max({1.0 / em, (1.0 / em) * std::pow(std::pow(em, -p) - 1.0, 1.0 / p),
                                c.eta_plus / (em * em)});
  c.K0 = base * base;
  c.K2 = (c.N2 + 1.0) * std::pow(c.K0, p);
  {
    const double lhs = std::pow(2.0, p + 2.0) * std::pow(c.N2 + c.N1 + 1.0, 2.0) * epsilon;
    std::ostringstream os;
    os << "2^(p+2) (N2+N1+1)^2 eps = " << lhs;
    diag.require(lhs < 1.0, "epsilon_bound", os.str());
  }
  {
    std::ostringstream os;
    os << "N2^2 eps0 = " << static_cast<double>(c.N2) * c.N2 * epsilon0 << " vs eps = " << epsilon;
    diag.require(static_cast<double>(c.N2) * c.N2 * epsilon0 < epsilon, "epsilon0_bound", os.str());
  }
  {
    std::ostringstream os;
    os << "eta_plus = " << c.eta_plus;
    diag.require(c.eta_plus < 1.0, "eta_plus_below_one", os.str());
  }
  return c;
}

/// Cap on epsilon that keeps eta_plus <= margin (< 1).
inline double epsilon_cap(double p, int N2, double margin = 0.9) {
  return std::pow(margin, p) / (std::pow(2.0, p + 1.0) * (N2 + 1.0));
}

/// Full pipeline output: every intermediate density plus the final weight.
struct WeightSystem {
  const FillingGraph* graph = nullptr;
  ConstantsRecord constants;
  std::vector<double> sigma, mu1, mu2, pi0, pi1, phi, rho, pi;
  std::vector<double> omega;  // per vertex with a level below it, else 0
  double max_family_modulus = 0.0;
  int nonempty_families = 0;
  std::vector<Diagnostic> diagnostics;
};

/// sigma_v from each family's optimal density, pointwise max over base
/// vertices; admissibility of the max is re-verified by the separation
/// oracle on every family.
inline std::vector<double> build_sigma(const FillingGraph& g, double p, double eps0, Mode mode,
                                       Diagnostics& diag, const SolverOptions& opt,
                                       double* max_mod_out = nullptr, int* nonempty_out = nullptr,
                                       std::vector<PathFamily>* families_out = nullptr) {
  std::vector<double> sigma(static_cast<size_t>(g.vertex_count()), 0.0);
  double max_mod = 0.0;
  int nonempty = 0;
  std::vector<PathFamily> fams;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.level_of(v) + 1 > g.depth) continue;
    auto fam = build_family(g, v, 1, true);
    auto res = solve_modulus(fam, p, opt);
    if (res.status != ModulusStatus::empty_family) {
      ++nonempty;
      max_mod = std::max(max_mod, res.value);
      for (int li = 0; li < fam.size(); ++li) {
        const size_t gv = static_cast<size_t>(fam.vertices[static_cast<size_t>(li)]);
        sigma[gv] = std::max(sigma[gv], res.sigma[static_cast<size_t>(li)]);
      }
    }
    fams.push_back(std::move(fam));
  }
  if (eps0 > 0.0) {
    std::ostringstream os;
    os << "max family modulus " << max_mod << " vs eps0 " << eps0;
    if (mode == Mode::theory && !(max_mod < eps0))
      throw construction_error("modulus_below_eps0: " + os.str() +
                               "; increase n0 (finer level jump) or eps0");
    diag.require(max_mod < eps0, "modulus_below_eps0", os.str());
  }
  // re-verify admissibility of the pointwise max on every family
  for (const auto& fam : fams) {
    if (!detail::family_has_route(fam)) continue;
    std::vector<double> local(static_cast<size_t>(fam.size()));
    for (int li = 0; li < fam.size(); ++li)
      local[static_cast<size_t>(li)] = sigma[static_cast<size_t>(fam.vertices[static_cast<size_t>(li)])];
    double s = 0.0;
    detail::min_weight_path(fam, local, &s);
    std::ostringstream os;
    os << "family of vertex " << fam.base_vertex << ": min path sum " << s;
    diag.require(s >= 1.0 - opt.feas_tol, "sigma_admissible", os.str());
  }
  if (max_mod_out) *max_mod_out = max_mod;
  if (nonempty_out) *nonempty_out = nonempty;
  if (families_out) *families_out = std::move(fams);
  return sigma;
}

/// mu1 = (sigma^p + eta_minus^p)^(1/p), pointwise.
inline std::vector<double> lift_mu1(const std::vector<double>& sigma, double eta_minus, double p) {
  std::vector<double> mu1(sigma.size());
  const double floor_p = std::pow(eta_minus, p);
  for (size_t i = 0; i < sigma.size(); ++i)
    mu1[i] = std::pow(std::pow(sigma[i], p) + floor_p, 1.0 / p);
  return mu1;
}

/// mu2(v) = 2 max{mu1(v') : v' in S(v)}.
inline std::vector<double> lift_mu2(const FillingGraph& g, const std::vector<double>& mu1) {
  std::vector<double> mu2(mu1.size());
  for (int v = 0; v < g.vertex_count(); ++v) {
    double m = 0.0;
    for (int u : sibling_set(g, v)) m = std::max(m, mu1[static_cast<size_t>(u)]);
    mu2[static_cast<size_t>(v)] = 2.0 * m;
  }
  return mu2;
}

/// One level of the ratio-damping rule: orient each horizontal edge whose
/// candidate ratio leaves [1/K, K]; a vertex with an inbound oriented edge
/// takes (1/K) * max over its neighbors' candidates, everything else keeps
/// its candidate. Exposed separately so the rule is unit-testable.
struct LevelFixResult {
  std::vector<double> pi0;
  int oriented_edges = 0;
  bool both_directions = false;  // some vertex with inbound and outbound edges
  int both_witness = -1;
};

inline LevelFixResult level_ratio_fix(const std::vector<double>& pi1,
                                      const std::vector<std::vector<int>>& adj, double K) {
  const int n = static_cast<int>(pi1.size());
  std::vector<char> in(static_cast<size_t>(n), 0), out(static_cast<size_t>(n), 0);
  LevelFixResult res;
  for (int v = 0; v < n; ++v)
    for (int u : adj[static_cast<size_t>(v)]) {
      if (u <= v) continue;
      if (lt(K * pi1[static_cast<size_t>(u)], pi1[static_cast<size_t>(v)])) {
        out[static_cast<size_t>(v)] = 1;
        in[static_cast<size_t>(u)] = 1;
        ++res.oriented_edges;
      } else if (lt(K * pi1[static_cast<size_t>(v)], pi1[static_cast<size_t>(u)])) {
        out[static_cast<size_t>(u)] = 1;
        in[static_cast<size_t>(v)] = 1;
        ++res.oriented_edges;
      }
    }
  for (int v = 0; v < n; ++v)
    if (in[static_cast<size_t>(v)] && out[static_cast<size_t>(v)]) {
      res.both_directions = true;
      res.both_witness = v;
      break;
    }
  res.pi0.resize(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) {
    if (in[static_cast<size_t>(v)]) {
      double m = 0.0;
      for (int u : adj[static_cast<size_t>(v)]) m = std::max(m, pi1[static_cast<size_t>(u)]);
      res.pi0[static_cast<size_t>(v)] = m / K;
    } else {
      res.pi0[static_cast<size_t>(v)] = pi1[static_cast<size_t>(v)];
    }
  }
  return res;
}

/// Level-by-level construction of pi0 (and the intermediate pi1, kept for
/// debugging): root 1, level 1 takes mu2, deeper levels damp the candidate
/// pi1(w) = mu2(w) * pi0(parent) through level_ratio_fix. Ratio and parent
/// bounds are asserted after each level.
inline void inductive_pi0(const FillingGraph& g, const std::vector<double>& mu2, double K,
                          Diagnostics& diag, std::vector<double>& pi0, std::vector<double>& pi1) {
  if (!g.has_tree) throw construction_error("tree view required: call attach_tree first");
  const int nv = g.vertex_count();
  pi0.assign(static_cast<size_t>(nv), 0.0);
  pi1.assign(static_cast<size_t>(nv), 0.0);
  pi0[0] = pi1[0] = 1.0;
  for (int k = 1; k <= g.depth; ++k) {
    const int off = g.level_offset[static_cast<size_t>(k)];
    const int sz = g.level_size(k);
    std::vector<double> cand(static_cast<size_t>(sz));
    std::vector<std::vector<int>> adj(static_cast<size_t>(sz));
    for (int i = 0; i < sz; ++i) {
      const int w = off + i;
      cand[static_cast<size_t>(i)] =
          k == 1 ? mu2[static_cast<size_t>(w)]
                 : mu2[static_cast<size_t>(w)] * pi0[static_cast<size_t>(g.tree_parent[static_cast<size_t>(w)])];
      for (int u : g.horiz[static_cast<size_t>(w)]) adj[static_cast<size_t>(i)].push_back(u - off);
      pi1[static_cast<size_t>(w)] = cand[static_cast<size_t>(i)];
    }
    LevelFixResult fix;
    if (k == 1) {
      fix.pi0 = cand;  // level 1 takes mu2 directly
    } else {
      fix = level_ratio_fix(cand, adj, K);
    }
    for (int i = 0; i < sz; ++i) pi0[static_cast<size_t>(off + i)] = fix.pi0[static_cast<size_t>(i)];
    if (k > 1 && fix.both_directions)
      diag.require(false, "pi0_orientation",
                   "vertex " + std::to_string(off + fix.both_witness) +
                       " has inbound and outbound oriented edges at level " + std::to_string(k));
    // horizontal ratio bound at this level
    for (int i = 0; i < sz; ++i)
      for (int lu : adj[static_cast<size_t>(i)]) {
        if (lu <= i) continue;
        const double r = pi0[static_cast<size_t>(off + i)] / pi0[static_cast<size_t>(off + lu)];
        if (lt(K, r) || lt(r, 1.0 / K)) {
          std::ostringstream os;
          os << "level " << k << " edge (" << off + i << "," << off + lu << ") ratio " << r
             << " outside [1/K,K], K=" << K;
          diag.require(false, "pi0_horizontal_ratio", os.str());
        }
      }
    // parent bound 1 <= pi0(parent)/pi0(v) <= K
    for (int i = 0; i < sz; ++i) {
      const int w = off + i;
      const double r =
          pi0[static_cast<size_t>(g.tree_parent[static_cast<size_t>(w)])] / pi0[static_cast<size_t>(w)];
      if (lt(r, 1.0) || lt(K, r)) {
        std::ostringstream os;
        os << "vertex " << w << " parent ratio " << r << " outside [1,K]";
        diag.require(false, "pi0_parent_ratio", os.str());
      }
    }
  }
}

/// phi(w) = pi0(w)/pi0(parent); asserts the band eta_minus <= phi <= eta_plus,
/// phi >= mu2, and the telescoping product identity.
inline std::vector<double> derive_phi(const FillingGraph& g, const std::vector<double>& pi0,
                                      const std::vector<double>& mu2, const ConstantsRecord& c,
                                      Diagnostics& diag) {
  const int nv = g.vertex_count();
  std::vector<double> phi(static_cast<size_t>(nv), 1.0);
  for (int w = 1; w < nv; ++w) {
    const int par = g.tree_parent[static_cast<size_t>(w)];
    phi[static_cast<size_t>(w)] = pi0[static_cast<size_t>(w)] / pi0[static_cast<size_t>(par)];
    if (lt(phi[static_cast<size_t>(w)], c.eta_minus) || lt(c.eta_plus, phi[static_cast<size_t>(w)])) {
      std::ostringstream os;
      os << "phi(" << w << ") = " << phi[static_cast<size_t>(w)] << " outside [" << c.eta_minus
         << ", " << c.eta_plus << "]";
      diag.require(false, "phi_band", os.str());
    }
    if (lt(phi[static_cast<size_t>(w)], mu2[static_cast<size_t>(w)])) {
      std::ostringstream os;
      os << "phi(" << w << ") = " << phi[static_cast<size_t>(w)] << " below mu2 "
         << mu2[static_cast<size_t>(w)];
      diag.require(false, "phi_dominates_mu2", os.str());
    }
  }
  // product identity: pi0(w) = prod phi over the ancestry
  for (int w = 0; w < nv; ++w) {
    double prod = 1.0;
    for (int u : ancestry(g, w)) prod *= phi[static_cast<size_t>(u)];
    const double ref = pi0[static_cast<size_t>(w)];
    if (std::abs(prod - ref) > 1e-12 * std::max(std::abs(prod), std::abs(ref))) {
      std::ostringstream os;
      os << "pi0(" << w << ") = " << ref << " vs phi product " << prod;
      diag.require(false, "phi_product_identity", os.str());
    }
  }
  return phi;
}

/// omega(v) solves omega^p phi(w_v)^p + sum_{D1(v) minus w_v} phi^p = 1;
/// rho equals phi except rho(w_v) = omega(v) phi(w_v).
inline void compute_omega_rho(const FillingGraph& g, const std::vector<double>& phi,
                              const ConstantsRecord& c, Diagnostics& diag,
                              std::vector<double>& omega, std::vector<double>& rho) {
  const int nv = g.vertex_count();
  const double p = c.p;
  omega.assign(static_cast<size_t>(nv), 0.0);
  rho = phi;
  rho[0] = 1.0;
  for (int v = 0; v < nv; ++v) {
    if (g.level_of(v) >= g.depth) continue;
    const int wv = direct_descendant(g, v);
    if (wv < 0) throw construction_error("direct descendant missing (nets not nested)");
    auto d1 = tree_children(g, v);
    double sum_other = 0.0, sum_all = 0.0;
    for (int w : d1) {
      const double t = std::pow(phi[static_cast<size_t>(w)], p);
      sum_all += t;
      if (w != wv) sum_other += t;
    }
    if (!(sum_all < 1.0)) {
      std::ostringstream os;
      os << "sum of phi^p over children of " << v << " is " << sum_all
         << " >= 1; constants too large for this instance (raise n0 or lower eps)";
      throw construction_error("omega_normalization: " + os.str());
    }
    if (d1.size() == 1) {
      std::ostringstream os;
      os << "vertex " << v << " has a single tree child; rho(w_v)=1, upper (H1) bound degenerates";
      diag.require(false, "uniform_perfectness_children", os.str());
    }
    omega[static_cast<size_t>(v)] =
        std::pow(1.0 - sum_other, 1.0 / p) / phi[static_cast<size_t>(wv)];
    rho[static_cast<size_t>(wv)] = omega[static_cast<size_t>(v)] * phi[static_cast<size_t>(wv)];
    // normalization holds by construction; record the residual
    double check = 0.0;
    for (int w : d1) check += std::pow(rho[static_cast<size_t>(w)], p);
    if (std::abs(check - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "children of " << v << ": sum rho^p = " << check;
      diag.require(false, "rho_normalization", os.str());
    }
    if (d1.size() > 1) {
      const double up = std::pow(1.0 - std::pow(c.eta_minus, p), 1.0 / p);
      const double rv = rho[static_cast<size_t>(wv)];
      if (lt(rv, c.eta_minus) || lt(up, rv)) {
        std::ostringstream os;
        os << "rho(w_" << v << ") = " << rv << " outside [" << c.eta_minus << ", " << up << "]";
        diag.require(false, "rho_direct_descendant_band", os.str());
      }
    }
  }
}

/// pi(w) = product of rho along the tree ancestry (pi(root) = 1).
inline std::vector<double> accumulate_pi(const FillingGraph& g, const std::vector<double>& rho) {
  std::vector<double> pi(rho.size(), 1.0);
  for (int k = 1; k <= g.depth; ++k) {
    const int off = g.level_offset[static_cast<size_t>(k)];
    for (int i = 0; i < g.level_size(k); ++i) {
      const int w = off + i;
      pi[static_cast<size_t>(w)] =
          pi[static_cast<size_t>(g.tree_parent[static_cast<size_t>(w)])] * rho[static_cast<size_t>(w)];
    }
  }
  return pi;
}

struct PipelineOptions {
  double p = 2.0;
  Mode mode = Mode::practical;
  std::optional<double> epsilon;   // auto when unset
  std::optional<double> epsilon0;  // auto when unset
  double epsilon0_floor = 1e-3;
  SolverOptions solver;
};

/// sigma -> mu1 -> mu2 -> pi0 -> phi -> omega/rho -> pi on an n0-resampled
/// graph with an attached tree.
inline WeightSystem run_weight_pipeline(const FillingGraph& g, const StructureConstants& sc,
                                        const PipelineOptions& opt, Diagnostics& diag) {
  if (!g.has_tree) throw construction_error("tree view required: call attach_tree first");
  WeightSystem ws;
  ws.graph = &g;
  const double p = opt.p;
  if (p < 1.0) throw config_error("pipeline requires p >= 1");

  double eps = 0.0, eps0 = 0.0;
  if (opt.mode == Mode::theory) {
    const double n21 = static_cast<double>(g.n2) + static_cast<double>(sc.N1) + 1.0;
    const double cap41 = 1.0 / (std::pow(2.0, p + 2.0) * n21 * n21);
    eps = opt.epsilon.value_or(0.5 * std::min(cap41, epsilon_cap(p, g.n2)));
    eps0 = opt.epsilon0.value_or(eps / (2.0 * g.n2 * g.n2));
    ws.sigma = build_sigma(g, p, eps0, opt.mode, diag, opt.solver, &ws.max_family_modulus,
                           &ws.nonempty_families);
  } else {
    ws.sigma = build_sigma(g, p, 0.0, opt.mode, diag, opt.solver, &ws.max_family_modulus,
                           &ws.nonempty_families);
    eps0 = opt.epsilon0.value_or(
        std::max(ws.max_family_modulus * (1.0 + 1e-3), opt.epsilon0_floor));
    eps = opt.epsilon.value_or(
        std::min(static_cast<double>(g.n2) * g.n2 * eps0, epsilon_cap(p, g.n2)));
    std::ostringstream os;
    os << "max family modulus " << ws.max_family_modulus << " vs eps0 " << eps0;
    diag.require(ws.max_family_modulus < eps0, "modulus_below_eps0", os.str());
  }
  ws.constants = derive_constants(p, eps, eps0, g, sc, opt.mode, diag);

  ws.mu1 = lift_mu1(ws.sigma, ws.constants.eta_minus, p);
  ws.mu2 = lift_mu2(g, ws.mu1);
  // displayed sum bounds over T(v); guarantees in theory, diagnostics otherwise
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.level_of(v) >= g.depth) continue;
    double s1 = 0.0, s2 = 0.0;
    for (int w : extended_children(g, v)) {
      s1 += std::pow(ws.mu1[static_cast<size_t>(w)], p);
      s2 += std::pow(ws.mu2[static_cast<size_t>(w)], p);
    }
    if (!(s1 < 2.0 * eps)) {
      std::ostringstream os;
      os << "sum mu1^p over T(" << v << ") = " << s1 << " vs 2 eps = " << 2.0 * eps;
      diag.require(false, "mu1_sum_bound", os.str());
    }
    const double cap2 = std::pow(2.0, p + 1.0) * eps * (g.n2 + 1.0);
    if (!leq(s2, cap2)) {
      std::ostringstream os;
      os << "sum mu2^p over T(" << v << ") = " << s2 << " vs " << cap2;
      diag.require(false, "mu2_sum_bound", os.str());
    }
  }

  inductive_pi0(g, ws.mu2, ws.constants.K, diag, ws.pi0, ws.pi1);
  ws.phi = derive_phi(g, ws.pi0, ws.mu2, ws.constants, diag);
  compute_omega_rho(g, ws.phi, ws.constants, diag, ws.omega, ws.rho);
  ws.pi = accumulate_pi(g, ws.rho);

  // monotone chain mu1 <= mu2/2, mu2 <= phi, phi <= rho, pointwise
  for (int w = 1; w < g.vertex_count(); ++w) {
    const size_t i = static_cast<size_t>(w);
    const bool ok = leq(ws.mu1[i], ws.mu2[i] / 2.0) && leq(ws.mu2[i], ws.phi[i]) &&
                    leq(ws.phi[i], ws.rho[i]);
    if (!ok) {
      std::ostringstream os;
      os << "vertex " << w << ": mu1=" << ws.mu1[i] << " mu2=" << ws.mu2[i]
         << " phi=" << ws.phi[i] << " rho=" << ws.rho[i];
      diag.require(false, "density_chain", os.str());
    }
  }
  ws.diagnostics = diag.entries();
  return ws;
}

inline nlohmann::json weights_to_json(const WeightSystem& ws, const PointCloudSpace& space,
                                      const nlohmann::json& config) {
  const FillingGraph& g = *ws.graph;
  nlohmann::json vertices = nlohmann::json::array();
  for (int v = 0; v < g.vertex_count(); ++v)
    vertices.push_back({g.point_of(v), g.level_of(v)});
  nlohmann::json diags = nlohmann::json::array();
  for (const auto& d : ws.diagnostics)
    diags.push_back({{"check", d.check}, {"ok", d.ok}, {"detail", d.detail}});
  std::vector<int> tree = ws.graph->tree_parent;
  return {{"schema", "confdim.weights.v1"},
          {"config", config},
          {"space", space.to_json()},
          {"graph",
           {{"step", g.step},
            {"alpha", g.alpha},
            {"tau", g.tau},
            {"depth", g.depth},
            {"levels", g.level_points},
            {"tree_parent", tree}}},
          {"constants", ws.constants.to_json()},
          {"vertices", vertices},
          {"weights",
           {{"sigma", ws.sigma},
            {"mu1", ws.mu1},
            {"mu2", ws.mu2},
            {"pi0", ws.pi0},
            {"pi1", ws.pi1},
            {"phi", ws.phi},
            {"rho", ws.rho},
            {"pi", ws.pi},
            {"omega", ws.omega}}},
          {"stats",
           {{"max_family_modulus", ws.max_family_modulus},
            {"nonempty_families", ws.nonempty_families}}},
          {"diagnostics", diags}};
}

/// Rebuilds the graph from the embedded space and parameters, restores the
/// stored tree, and loads the stored weights verbatim. Heap-allocated so the
/// internal space/graph pointers stay put.
struct LoadedWeights {
  PointCloudSpace space;
  FillingGraph graph;
  WeightSystem ws;
  nlohmann::json config;

  LoadedWeights() = default;
  LoadedWeights(const LoadedWeights&) = delete;
  LoadedWeights& operator=(const LoadedWeights&) = delete;
};

inline std::unique_ptr<LoadedWeights> load_weights(const nlohmann::json& j) {
  if (j.value("schema", std::string()) != "confdim.weights.v1")
    throw io_error("not a confdim.weights.v1 document");
  auto out = std::make_unique<LoadedWeights>();
  out->space = PointCloudSpace::from_json(j.at("space"), /*normalize=*/false);
  out->config = j.value("config", nlohmann::json::object());
  const auto& gj = j.at("graph");
  FillingGraph& g = out->graph;
  g.space = &out->space;
  g.step = gj.at("step").get<int>();
  g.alpha = gj.at("alpha").get<double>();
  g.alpha_eff = std::pow(g.alpha, g.step);
  g.tau = gj.at("tau").get<double>();
  g.depth = gj.at("depth").get<int>();
  g.level_points = gj.at("levels").get<std::vector<std::vector<int>>>();
  g.level_offset.assign(static_cast<size_t>(g.depth) + 2, 0);
  for (int k = 0; k <= g.depth; ++k)
    g.level_offset[static_cast<size_t>(k) + 1] =
        g.level_offset[static_cast<size_t>(k)] +
        static_cast<int>(g.level_points[static_cast<size_t>(k)].size());
  detail::finish_adjacency(g, nullptr);
  g.tree_parent = gj.at("tree_parent").get<std::vector<int>>();
  if (static_cast<int>(g.tree_parent.size()) != g.vertex_count())
    throw io_error("stored tree does not match the rebuilt graph");
  g.has_tree = true;
  WeightSystem& ws = out->ws;
  ws.graph = &g;
  ws.constants = ConstantsRecord::from_json(j.at("constants"));
  const auto& w = j.at("weights");
  ws.sigma = w.at("sigma").get<std::vector<double>>();
  ws.mu1 = w.at("mu1").get<std::vector<double>>();
  ws.mu2 = w.at("mu2").get<std::vector<double>>();
  ws.pi0 = w.at("pi0").get<std::vector<double>>();
  ws.pi1 = w.at("pi1").get<std::vector<double>>();
  ws.phi = w.at("phi").get<std::vector<double>>();
  ws.rho = w.at("rho").get<std::vector<double>>();
  ws.pi = w.at("pi").get<std::vector<double>>();
  ws.omega = w.at("omega").get<std::vector<double>>();
  ws.max_family_modulus = j.at("stats").at("max_family_modulus").get<double>();
  ws.nonempty_families = j.at("stats").at("nonempty_families").get<int>();
  return out;
}

}  // namespace confdim
