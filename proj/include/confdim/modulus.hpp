#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "confdim/common.hpp"
#include "confdim/filling_graph.hpp"

namespace confdim {

/// Connecting path family at one level: horizontal paths through `vertices`
/// that start in the source set and stop at their first sink vertex.
struct PathFamily {
  int base_vertex = -1;
  int k = 0;
  bool restricted = true;
  std::vector<int> vertices;           // global vertex ids of the universe
  std::vector<std::vector<int>> adj;   // local indices, sorted
  std::vector<char> is_source;
  std::vector<char> is_sink;

  int size() const { return static_cast<int>(vertices.size()); }
};

/// Universe/source/sink rules for Gamma_k(B_v):
///   universe: B_w meets 3B_v (center rule), or the whole level if
///             restrict_support is off
///   source:   B_w meets B_v (center rule)
///   sink:     B_w \ 2B_v nonempty, evaluated exactly on the point cloud
inline PathFamily build_family(const FillingGraph& g, int v, int k, bool restrict_support = true) {
  const int n = g.level_of(v);
  if (n + k > g.depth) throw config_error("family level exceeds graph depth");
  PathFamily fam;
  fam.base_vertex = v;
  fam.k = k;
  fam.restricted = restrict_support;
  const int x = g.point_of(v);
  const double rv = g.radius(n), rw = g.radius(n + k);
  const int off = g.level_offset[static_cast<size_t>(n) + k];
  const auto& pts = g.level_points[static_cast<size_t>(n) + k];
  const PointCloudSpace& space = *g.space;
  std::vector<int> local_of(pts.size(), -1);
  for (size_t i = 0; i < pts.size(); ++i) {
    const double d = pts[i] == x ? 0.0 : space.dist(x, pts[i]);
    if (restrict_support && !lt(d, rw + 3.0 * rv)) continue;
    local_of[i] = fam.size();
    fam.vertices.push_back(off + static_cast<int>(i));
    fam.is_source.push_back(lt(d, rw + rv) ? 1 : 0);
    char sink = 0;
    for (int z = 0; z < space.size(); ++z) {
      const double dz = pts[i] == z ? 0.0 : space.dist(pts[i], z);
      if (!lt(dz, rw)) continue;
      const double dv = x == z ? 0.0 : space.dist(x, z);
      if (!lt(dv, 2.0 * rv)) {
        sink = 1;
        break;
      }
    }
    fam.is_sink.push_back(sink);
  }
  fam.adj.assign(static_cast<size_t>(fam.size()), {});
  for (int li = 0; li < fam.size(); ++li) {
    const int gv = fam.vertices[static_cast<size_t>(li)];
    for (int gu : g.horiz[static_cast<size_t>(gv)]) {
      if (gu < off || gu >= off + static_cast<int>(pts.size())) continue;
      const int lj = local_of[static_cast<size_t>(gu - off)];
      if (lj >= 0) fam.adj[static_cast<size_t>(li)].push_back(lj);
    }
    std::sort(fam.adj[static_cast<size_t>(li)].begin(), fam.adj[static_cast<size_t>(li)].end());
  }
  return fam;
}

enum class ModulusStatus { optimal, iteration_cap, empty_family };

inline std::string to_string(ModulusStatus s) {
  switch (s) {
    case ModulusStatus::optimal: return "optimal";
    case ModulusStatus::iteration_cap: return "iteration_cap";
    default: return "empty_family";
  }
}

struct ModulusResult {
  double value = 0.0;
  std::vector<double> sigma;                    // per universe vertex (local order)
  std::vector<std::vector<int>> active_paths;   // local indices, sigma-sum <= 1+tol
  int iterations = 0;
  ModulusStatus status = ModulusStatus::optimal;
  double last_gap = 1.0;  // smallest path sum seen at termination
};

struct SolverOptions {
  double feas_tol = 1e-6;  // admissibility audits
  double sep_tol = 1e-9;   // separation stopping: min path sum >= 1 - sep_tol
  double kkt_tol = 1e-10;  // inner dual residual; keep below sep_tol
  int outer_cap = 10000;
  long long inner_cap = 100000;  // total 1-D dual updates / simplex pivots
  int path_cap = 200;            // brute-force enumeration cap
};

namespace detail {

/// Min sigma-sum canonical path (vertex weights, paths stop at sinks).
/// Returns local indices, or empty when no source reaches a sink.
inline std::vector<int> min_weight_path(const PathFamily& f, const std::vector<double>& sigma,
                                        double* sum_out) {
  const int n = f.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(n), inf);
  std::vector<int> parent(static_cast<size_t>(n), -1);
  std::vector<char> done(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    if (f.is_source[static_cast<size_t>(i)]) dist[static_cast<size_t>(i)] = sigma[static_cast<size_t>(i)];
  for (;;) {
    int u = -1;
    for (int i = 0; i < n; ++i)
      if (!done[static_cast<size_t>(i)] && dist[static_cast<size_t>(i)] < inf &&
          (u < 0 || dist[static_cast<size_t>(i)] < dist[static_cast<size_t>(u)]))
        u = i;
    if (u < 0) break;
    done[static_cast<size_t>(u)] = 1;
    if (f.is_sink[static_cast<size_t>(u)]) continue;  // paths stop at their first sink
    for (int w : f.adj[static_cast<size_t>(u)]) {
      const double cand = dist[static_cast<size_t>(u)] + sigma[static_cast<size_t>(w)];
      if (cand < dist[static_cast<size_t>(w)]) {
        dist[static_cast<size_t>(w)] = cand;
        parent[static_cast<size_t>(w)] = u;
      }
    }
  }
  int best = -1;
  for (int i = 0; i < n; ++i)
    if (f.is_sink[static_cast<size_t>(i)] && dist[static_cast<size_t>(i)] < inf &&
        (best < 0 || dist[static_cast<size_t>(i)] < dist[static_cast<size_t>(best)]))
      best = i;
  if (best < 0) {
    if (sum_out) *sum_out = inf;
    return {};
  }
  std::vector<int> path;
  for (int u = best; u >= 0; u = parent[static_cast<size_t>(u)]) path.push_back(u);
  std::reverse(path.begin(), path.end());
  if (sum_out) *sum_out = dist[static_cast<size_t>(best)];
  return path;
}

/// Dual coordinate ascent for min sum sigma^p s.t. path sums >= 1, sigma >= 0,
/// p > 1. sigma_w = (c_w/p)^{1/(p-1)} with c_w the sum of multipliers of the
/// paths through w; each 1-D dual solve matches one constraint exactly.
class SmoothInner {
 public:
  SmoothInner(int n, double p) : n_(n), p_(p), q_(1.0 / (p - 1.0)), c_(static_cast<size_t>(n), 0.0) {}

  void add_path(const std::vector<int>& path) { paths_.push_back(path); lambda_.push_back(0.0); }

  double sigma(int w) const { return c_[static_cast<size_t>(w)] <= 0.0 ? 0.0 : std::pow(c_[static_cast<size_t>(w)] / p_, q_); }

  double path_sum(const std::vector<int>& path) const {
    double s = 0.0;
    for (int w : path) s += sigma(w);
    return s;
  }

  /// Sweeps until the KKT residual (worst primal violation or complementary
  /// slackness defect over the collected paths) drops below tol.
  bool run(double tol, long long update_cap, double* residual_out) {
    long long updates = 0;
    double res = std::numeric_limits<double>::infinity();
    while (updates < update_cap) {
      for (size_t i = 0; i < paths_.size(); ++i, ++updates) update_one(i);
      res = residual();
      if (res <= tol) break;
    }
    if (residual_out) *residual_out = res;
    return res <= tol;
  }

  double residual() const {
    double r = 0.0;
    for (size_t i = 0; i < paths_.size(); ++i) {
      const double s = path_sum(paths_[i]);
      r = std::max(r, 1.0 - s);
      r = std::max(r, lambda_[i] * (s - 1.0));
    }
    return r;
  }

  std::vector<double> sigmas() const {
    std::vector<double> out(static_cast<size_t>(n_));
    for (int w = 0; w < n_; ++w) out[static_cast<size_t>(w)] = sigma(w);
    return out;
  }

 private:
  void update_one(size_t i) {
    const auto& P = paths_[i];
    const double old = lambda_[i];
    // residual multiplier mass a_w = c_w - old on the path's vertices
    auto g = [&](double x) {
      double s = 0.0;
      for (int w : P) {
        const double a = c_[static_cast<size_t>(w)] - old + x;
        if (a > 0.0) s += std::pow(a / p_, q_);
      }
      return s - 1.0;
    };
    double next;
    if (g(0.0) >= 0.0) {
      next = 0.0;
    } else {
      double lo = 0.0, hi = std::max(p_, 1.0);
      for (int it = 0; it < 200 && g(hi) < 0.0; ++it) hi *= 2.0;
      // safeguarded Newton inside [lo, hi]
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 100; ++it) {
        double gv = 0.0, gd = 0.0;
        for (int w : P) {
          const double a = c_[static_cast<size_t>(w)] - old + x;
          if (a > 0.0) {
            const double t = std::pow(a / p_, q_);
            gv += t;
            gd += q_ * t / a;
          }
        }
        gv -= 1.0;
        if (std::abs(gv) <= 1e-15) break;
        if (gv > 0.0) hi = x; else lo = x;
        double step = gd > 0.0 ? x - gv / gd : lo - 1.0;
        x = (step > lo && step < hi) ? step : 0.5 * (lo + hi);
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
      }
      next = x;
    }
    if (next != old) {
      for (int w : P) c_[static_cast<size_t>(w)] += next - old;
      lambda_[i] = next;
    }
  }

  int n_;
  double p_, q_;
  std::vector<double> c_;
  std::vector<std::vector<int>> paths_;
  std::vector<double> lambda_;
};

/// Exact p=1 inner solve: the dual packing LP (max total path mass subject
/// to unit vertex capacities) by dense simplex with Bland's rule. The
/// optimal covering density sigma is read off the slack reduced costs.
struct LpResult {
  double value = 0.0;
  std::vector<double> sigma;
  bool converged = true;
};

inline LpResult solve_inner_lp(const std::vector<std::vector<int>>& paths, int n,
                               long long pivot_cap) {
  const int m = n;                                  // rows: vertex capacities
  const int k = static_cast<int>(paths.size());     // packing variables
  const int cols = k + m;
  const double eps = 1e-9;
  std::vector<std::vector<double>> T(static_cast<size_t>(m),
                                     std::vector<double>(static_cast<size_t>(cols), 0.0));
  std::vector<double> b(static_cast<size_t>(m), 1.0);
  std::vector<double> zrow(static_cast<size_t>(cols), 0.0);
  std::vector<int> basis(static_cast<size_t>(m));
  for (int j = 0; j < k; ++j) {
    for (int w : paths[static_cast<size_t>(j)]) T[static_cast<size_t>(w)][static_cast<size_t>(j)] += 1.0;
    zrow[static_cast<size_t>(j)] = 1.0;
  }
  for (int i = 0; i < m; ++i) {
    T[static_cast<size_t>(i)][static_cast<size_t>(k + i)] = 1.0;
    basis[static_cast<size_t>(i)] = k + i;
  }
  double z = 0.0;
  LpResult res;
  for (long long pivots = 0;; ++pivots) {
    if (pivots >= pivot_cap) {
      res.converged = false;
      break;
    }
    int enter = -1;
    for (int j = 0; j < cols; ++j)
      if (zrow[static_cast<size_t>(j)] > eps) {
        enter = j;
        break;  // Bland: smallest index
      }
    if (enter < 0) break;
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = T[static_cast<size_t>(i)][static_cast<size_t>(enter)];
      if (a > eps) {
        const double ratio = b[static_cast<size_t>(i)] / a;
        const bool better = ratio < best_ratio - 1e-15;
        const bool tie = std::abs(ratio - best_ratio) <= 1e-15;
        if (leave < 0 || better ||
            (tie && basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    if (leave < 0) break;  // unbounded: cannot happen, capacities bound everything
    const double piv = T[static_cast<size_t>(leave)][static_cast<size_t>(enter)];
    for (int j = 0; j < cols; ++j) T[static_cast<size_t>(leave)][static_cast<size_t>(j)] /= piv;
    b[static_cast<size_t>(leave)] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = T[static_cast<size_t>(i)][static_cast<size_t>(enter)];
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j)
        T[static_cast<size_t>(i)][static_cast<size_t>(j)] -= f * T[static_cast<size_t>(leave)][static_cast<size_t>(j)];
      b[static_cast<size_t>(i)] -= f * b[static_cast<size_t>(leave)];
    }
    const double fz = zrow[static_cast<size_t>(enter)];
    for (int j = 0; j < cols; ++j)
      zrow[static_cast<size_t>(j)] -= fz * T[static_cast<size_t>(leave)][static_cast<size_t>(j)];
    z += fz * b[static_cast<size_t>(leave)];
    basis[static_cast<size_t>(leave)] = enter;
  }
  res.value = z;
  res.sigma.assign(static_cast<size_t>(n), 0.0);
  for (int w = 0; w < n; ++w) res.sigma[static_cast<size_t>(w)] = std::max(0.0, -zrow[static_cast<size_t>(k + w)]);
  return res;
}

inline bool family_has_route(const PathFamily& f) {
  const int n = f.size();
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::vector<int> stack;
  for (int i = 0; i < n; ++i)
    if (f.is_source[static_cast<size_t>(i)]) {
      if (f.is_sink[static_cast<size_t>(i)]) return true;
      seen[static_cast<size_t>(i)] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int w : f.adj[static_cast<size_t>(u)]) {
      if (f.is_sink[static_cast<size_t>(w)]) return true;
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

inline ModulusResult solve_on_paths(const PathFamily& f, double p,
                                    const std::vector<std::vector<int>>& paths,
                                    const SolverOptions& opt) {
  ModulusResult r;
  r.iterations = static_cast<int>(paths.size());
  if (p == 1.0) {
    auto lp = solve_inner_lp(paths, f.size(), opt.inner_cap);
    r.sigma = lp.sigma;
    r.value = lp.value;
    r.status = lp.converged ? ModulusStatus::optimal : ModulusStatus::iteration_cap;
  } else {
    SmoothInner inner(f.size(), p);
    for (const auto& P : paths) inner.add_path(P);
    double res = 0.0;
    const bool ok = inner.run(opt.kkt_tol, opt.inner_cap, &res);
    r.sigma = inner.sigmas();
    r.value = 0.0;
    for (double s : r.sigma) r.value += std::pow(s, p);
    r.status = ok ? ModulusStatus::optimal : ModulusStatus::iteration_cap;
  }
  for (const auto& P : paths) {
    double s = 0.0;
    for (int w : P) s += r.sigma[static_cast<size_t>(w)];
    if (s <= 1.0 + opt.feas_tol) r.active_paths.push_back(P);
  }
  return r;
}

}  // namespace detail

/// Combinatorial p-modulus by constraint generation: repeatedly find the
/// minimum-sigma-sum canonical path; when none is shorter than 1 the
/// collected constraints witness optimality.
inline ModulusResult solve_modulus(const PathFamily& f, double p, SolverOptions opt = {}) {
  if (p < 1.0) throw config_error("solver supports p >= 1 only");
  ModulusResult r;
  r.sigma.assign(static_cast<size_t>(f.size()), 0.0);
  if (!detail::family_has_route(f)) {
    r.status = ModulusStatus::empty_family;
    r.value = 0.0;
    return r;
  }
  std::vector<std::vector<int>> paths;
  detail::SmoothInner inner(f.size(), p > 1.0 ? p : 2.0);
  for (int outer = 0; outer < opt.outer_cap; ++outer) {
    double s = 0.0;
    auto path = detail::min_weight_path(f, r.sigma, &s);
    r.last_gap = s;
    const bool repeat = !path.empty() && std::find(paths.begin(), paths.end(), path) != paths.end();
    if (path.empty() || s >= 1.0 - opt.sep_tol || repeat) {
      r.iterations = outer;
      r.status = repeat ? ModulusStatus::iteration_cap : ModulusStatus::optimal;
      r.value = 0.0;
      for (double sv : r.sigma) r.value += std::pow(sv, p);
      for (const auto& P : paths) {
        double ps = 0.0;
        for (int w : P) ps += r.sigma[static_cast<size_t>(w)];
        if (ps <= 1.0 + opt.feas_tol) r.active_paths.push_back(P);
      }
      return r;
    }
    paths.push_back(path);
    if (p == 1.0) {
      auto lp = detail::solve_inner_lp(paths, f.size(), opt.inner_cap);
      r.sigma = lp.sigma;
    } else {
      inner.add_path(path);
      inner.run(opt.kkt_tol, opt.inner_cap, nullptr);
      r.sigma = inner.sigmas();
    }
  }
  r.iterations = opt.outer_cap;
  r.status = ModulusStatus::iteration_cap;
  r.value = 0.0;
  for (double sv : r.sigma) r.value += std::pow(sv, p);
  return r;
}

/// All canonical simple paths (DFS, sorted order); throws past the cap.
inline std::vector<std::vector<int>> enumerate_paths(const PathFamily& f, int path_cap) {
  std::vector<std::vector<int>> out;
  const int n = f.size();
  std::vector<char> used(static_cast<size_t>(n), 0);
  std::vector<int> cur;
  std::function<void(int)> dfs = [&](int u) {
    used[static_cast<size_t>(u)] = 1;
    cur.push_back(u);
    if (f.is_sink[static_cast<size_t>(u)]) {
      if (static_cast<int>(out.size()) >= path_cap)
        throw size_error("path enumeration exceeds cap " + std::to_string(path_cap));
      out.push_back(cur);
    } else {
      for (int w : f.adj[static_cast<size_t>(u)])
        if (!used[static_cast<size_t>(w)]) dfs(w);
    }
    cur.pop_back();
    used[static_cast<size_t>(u)] = 0;
  };
  for (int s = 0; s < n; ++s)
    if (f.is_source[static_cast<size_t>(s)]) dfs(s);
  return out;
}

/// Number of canonical simple paths, or nullopt once `cap` is exceeded.
inline std::optional<int> count_paths(const PathFamily& f, int cap) {
  try {
    return static_cast<int>(enumerate_paths(f, cap).size());
  } catch (const size_error&) {
    return std::nullopt;
  }
}

/// Ground-truth oracle: the full convex program over every simple canonical
/// path, solved by the same inner machinery.
inline ModulusResult brute_force_modulus(const PathFamily& f, double p, SolverOptions opt = {}) {
  if (p < 1.0) throw config_error("solver supports p >= 1 only");
  auto paths = enumerate_paths(f, opt.path_cap);
  if (paths.empty()) {
    ModulusResult r;
    r.sigma.assign(static_cast<size_t>(f.size()), 0.0);
    r.status = ModulusStatus::empty_family;
    return r;
  }
  return detail::solve_on_paths(f, p, paths, opt);
}

/// Seeded random canonical path, or empty when the walk dead-ends too often.
inline std::vector<int> sample_path(const PathFamily& f, Rng& rng, int attempts = 64) {
  std::vector<int> sources;
  for (int i = 0; i < f.size(); ++i)
    if (f.is_source[static_cast<size_t>(i)]) sources.push_back(i);
  if (sources.empty()) return {};
  std::vector<char> used(static_cast<size_t>(f.size()), 0);
  for (int a = 0; a < attempts; ++a) {
    std::fill(used.begin(), used.end(), 0);
    std::vector<int> path{sources[static_cast<size_t>(rng.below(sources.size()))]};
    used[static_cast<size_t>(path[0])] = 1;
    for (int steps = 0; steps < f.size(); ++steps) {
      const int u = path.back();
      if (f.is_sink[static_cast<size_t>(u)]) return path;
      std::vector<int> open;
      for (int w : f.adj[static_cast<size_t>(u)])
        if (!used[static_cast<size_t>(w)]) open.push_back(w);
      if (open.empty()) break;
      const int w = open[static_cast<size_t>(rng.below(open.size()))];
      used[static_cast<size_t>(w)] = 1;
      path.push_back(w);
    }
  }
  return {};
}

struct ScaleModulusRow {
  int vertex = -1;
  int level = 0;
  double value = 0.0;
  int iterations = 0;
  ModulusStatus status = ModulusStatus::optimal;
};

struct ScaleModulus {
  double value = 0.0;  // sup over base vertices
  std::vector<ScaleModulusRow> rows;
};

/// Mod_p(k): sup over base vertices v (with n_v + k <= depth) of the family
/// modulus. Per-vertex solves are independent; `threads` splits them.
inline ScaleModulus mod_p_at_scale(const FillingGraph& g, double p, int k, SolverOptions opt = {},
                                   bool restrict_support = true, int threads = 1) {
  ScaleModulus out;
  std::vector<int> bases;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.level_of(v) + k <= g.depth) bases.push_back(v);
  out.rows.resize(bases.size());
  auto work = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      const int v = bases[i];
      auto fam = build_family(g, v, k, restrict_support);
      auto res = solve_modulus(fam, p, opt);
      out.rows[i] = {v, g.level_of(v), res.value, res.iterations, res.status};
    }
  };
  if (threads <= 1 || bases.size() < 2) {
    work(0, bases.size());
  } else {
    const size_t tcount = std::min<size_t>(static_cast<size_t>(threads), bases.size());
    std::vector<std::thread> pool;
    const size_t chunk = (bases.size() + tcount - 1) / tcount;
    for (size_t t = 0; t < tcount; ++t)
      pool.emplace_back(work, t * chunk, std::min(bases.size(), (t + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  for (const auto& row : out.rows) out.value = std::max(out.value, row.value);
  return out;
}

/// Smallest k in [k_lo, k_hi] with Mod_p(k) < eps0.
inline std::optional<int> find_n0(const FillingGraph& g, double p, double eps0, int k_lo, int k_hi,
                                  SolverOptions opt = {}) {
  if (!(eps0 > 0.0)) throw config_error("eps0 must be positive");
  for (int k = k_lo; k <= k_hi && k <= g.depth; ++k)
    if (mod_p_at_scale(g, p, k, opt).value < eps0) return k;
  return std::nullopt;
}

}  // namespace confdim
