#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "confdim/common.hpp"
#include "confdim/nets.hpp"
#include "confdim/point_cloud.hpp"
#include "json.hpp"

namespace confdim {

/// Hyperbolic filling graph over a net hierarchy. step=1 is the plain
/// filling G; step=n0 keeps levels 0, n0, 2*n0, ... and replaces alpha by
/// alpha^n0 in every adjacency rule (same tau).
///
/// Adjacency is the explicit center-distance form of open-ball
/// intersection:
///   horizontal (x,k)~(y,k):   d(x,y) < 2*tau*alpha_eff^-k
///   vertical   (x,k)~(y,k+1): d(x,y) < alpha_eff^-k + alpha_eff^-(k+1)
struct FillingGraph {
  const PointCloudSpace* space = nullptr;
  int step = 1;
  double alpha = 0.0;      // original net ratio
  double alpha_eff = 0.0;  // alpha^step
  double tau = 0.0;
  int depth = 0;  // levels 0..depth

  std::vector<std::vector<int>> level_points;  // level k -> sorted point indices
  std::vector<int> level_offset;               // level k -> first global vertex id
  std::vector<std::vector<int>> horiz;         // global id -> sorted horizontal neighbors
  std::vector<std::vector<int>> children;      // global id -> vertical neighbors one level down
  std::vector<std::vector<int>> parents;       // global id -> vertical neighbors one level up
  std::vector<int> tree_parent;                // global id -> parent vertex, -1 if root/unset
  bool has_tree = false;
  int n2 = 0;  // max horizontal degree + 1

  int vertex_count() const { return level_offset.empty() ? 0 : level_offset.back(); }
  int level_of(int v) const {
    int k = static_cast<int>(std::upper_bound(level_offset.begin(), level_offset.end(), v) -
                             level_offset.begin()) -
            1;
    return k;
  }
  int point_of(int v) const {
    const int k = level_of(v);
    return level_points[static_cast<size_t>(k)][static_cast<size_t>(v - level_offset[static_cast<size_t>(k)])];
  }
  int level_size(int k) const { return static_cast<int>(level_points[static_cast<size_t>(k)].size()); }

  /// Global vertex id for (point,level); -1 when the point is not in A_{step*level}.
  int vertex(int point, int level) const {
    const auto& pts = level_points[static_cast<size_t>(level)];
    auto it = std::lower_bound(pts.begin(), pts.end(), point);
    if (it == pts.end() || *it != point) return -1;
    return level_offset[static_cast<size_t>(level)] + static_cast<int>(it - pts.begin());
  }

  double radius(int level) const { return std::pow(alpha_eff, -level); }
  int root() const { return 0; }
};

namespace detail {
inline void finish_adjacency(FillingGraph& g, Diagnostics* diag) {
  const PointCloudSpace& space = *g.space;
  const int nv = g.vertex_count();
  g.horiz.assign(static_cast<size_t>(nv), {});
  g.children.assign(static_cast<size_t>(nv), {});
  g.parents.assign(static_cast<size_t>(nv), {});
  g.tree_parent.assign(static_cast<size_t>(nv), -1);
  int max_hdeg = 0;
  for (int k = 0; k <= g.depth; ++k) {
    const auto& pts = g.level_points[static_cast<size_t>(k)];
    const int off = g.level_offset[static_cast<size_t>(k)];
    const double h_thr = 2.0 * g.tau * g.radius(k);
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j)
        if (lt(space.dist(pts[i], pts[j]), h_thr)) {
          g.horiz[static_cast<size_t>(off) + i].push_back(off + static_cast<int>(j));
          g.horiz[static_cast<size_t>(off) + j].push_back(off + static_cast<int>(i));
        }
    if (k < g.depth) {
      const auto& nxt = g.level_points[static_cast<size_t>(k) + 1];
      const int noff = g.level_offset[static_cast<size_t>(k) + 1];
      const double v_thr = g.radius(k) + g.radius(k + 1);
      for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = 0; j < nxt.size(); ++j)
          if (pts[i] == nxt[j] || lt(space.dist(pts[i], nxt[j]), v_thr)) {
            g.children[static_cast<size_t>(off) + i].push_back(noff + static_cast<int>(j));
            g.parents[static_cast<size_t>(noff) + j].push_back(off + static_cast<int>(i));
          }
    }
  }
  for (int v = 0; v < nv; ++v) {
    std::sort(g.horiz[static_cast<size_t>(v)].begin(), g.horiz[static_cast<size_t>(v)].end());
    max_hdeg = std::max(max_hdeg, static_cast<int>(g.horiz[static_cast<size_t>(v)].size()));
  }
  g.n2 = max_hdeg + 1;
  if (diag) {
    std::ostringstream os;
    os << "max horizontal degree " << max_hdeg << ", N2=" << g.n2;
    diag->note("graph_n2", os.str());
  }
}

inline void check_tau(double tau, double alpha, double K_d, Diagnostics* diag) {
  if (!(tau > 6.0)) {
    std::ostringstream os;
    os << "tau=" << tau << " violates tau > 6";
    throw config_error(os.str());
  }
  if (diag && K_d > 0.0) {
    const double bound =
        std::max({6.0, 2.0 * (1.0 + 1.0 / alpha),
                  2.0 * K_d * K_d * K_d / (K_d * K_d - 4.0)});
    std::ostringstream os;
    os << "tau=" << tau << " vs max{6, 2(1+1/alpha), 2K_d^3/(K_d^2-4)}=" << bound;
    diag->require(tau > bound, "tau_bound", os.str());
  }
}
}  // namespace detail

/// step=1 filling over all net levels.
inline FillingGraph build_graph(const PointCloudSpace& space, const NetHierarchy& nets, double tau,
                                Diagnostics* diag = nullptr, double K_d = 0.0) {
  detail::check_tau(tau, nets.alpha, K_d, diag);
  FillingGraph g;
  g.space = &space;
  g.step = 1;
  g.alpha = nets.alpha;
  g.alpha_eff = nets.alpha;
  g.tau = tau;
  g.depth = nets.L;
  g.level_points = nets.levels;
  g.level_offset.assign(static_cast<size_t>(g.depth) + 2, 0);
  for (int k = 0; k <= g.depth; ++k)
    g.level_offset[static_cast<size_t>(k) + 1] =
        g.level_offset[static_cast<size_t>(k)] + static_cast<int>(g.level_points[static_cast<size_t>(k)].size());
  detail::finish_adjacency(g, diag);
  return g;
}

/// step=n0 filling over levels {0, n0, 2*n0, ...}; alpha^n0 replaces alpha.
inline FillingGraph resample_graph(const PointCloudSpace& space, const NetHierarchy& nets, int n0,
                                   double tau, Diagnostics* diag = nullptr, double K_d = 0.0) {
  if (n0 < 1) throw config_error("n0 must be >= 1");
  if (n0 > nets.L) throw config_error("n0 exceeds available net depth");
  detail::check_tau(tau, nets.alpha, K_d, diag);
  FillingGraph g;
  g.space = &space;
  g.step = n0;
  g.alpha = nets.alpha;
  g.alpha_eff = std::pow(nets.alpha, n0);
  g.tau = tau;
  g.depth = nets.L / n0;
  g.level_points.clear();
  for (int k = 0; k <= g.depth; ++k)
    g.level_points.push_back(nets.levels[static_cast<size_t>(k) * n0]);
  g.level_offset.assign(static_cast<size_t>(g.depth) + 2, 0);
  for (int k = 0; k <= g.depth; ++k)
    g.level_offset[static_cast<size_t>(k) + 1] =
        g.level_offset[static_cast<size_t>(k)] + static_cast<int>(g.level_points[static_cast<size_t>(k)].size());
  detail::finish_adjacency(g, diag);
  if (diag) {
    // n0-condition: 6 + 4a^-n0 + 8 tau a^-n0 < tau < a^n0 / 4
    const double an0 = std::pow(nets.alpha, -n0);
    const double lhs = 6.0 + 4.0 * an0 + 8.0 * tau * an0;
    std::ostringstream os;
    os << lhs << " < tau=" << tau << " < " << 0.25 / an0;
    diag->require(lhs < tau && tau < 0.25 / an0, "n0_condition", os.str());
  }
  return g;
}

/// Z[n0] view: each nonroot vertex gets exactly one parent, the nearest
/// level-(k-1) net point, ties broken by smallest point id. A point that
/// persists across levels keeps itself as parent (distance zero).
inline void attach_tree(FillingGraph& g) {
  const PointCloudSpace& space = *g.space;
  for (int k = 1; k <= g.depth; ++k) {
    const auto& pts = g.level_points[static_cast<size_t>(k)];
    const auto& par = g.level_points[static_cast<size_t>(k) - 1];
    const int off = g.level_offset[static_cast<size_t>(k)];
    const int poff = g.level_offset[static_cast<size_t>(k) - 1];
    for (size_t i = 0; i < pts.size(); ++i) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < par.size(); ++j) {
        const double d = pts[i] == par[j] ? 0.0 : space.dist(pts[i], par[j]);
        if (d < best_d) {  // ties keep the earlier (smaller id) candidate
          best_d = d;
          best = static_cast<int>(j);
        }
      }
      g.tree_parent[static_cast<size_t>(off) + i] = poff + best;
    }
  }
  g.tree_parent[0] = -1;
  g.has_tree = true;
}

/// Root-to-v chain g(v)_0 .. g(v)_{n_v} following tree parents.
inline std::vector<int> ancestry(const FillingGraph& g, int v) {
  std::vector<int> chain;
  for (int u = v; u >= 0; u = g.tree_parent[static_cast<size_t>(u)]) chain.push_back(u);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

/// Tree children of v (vertices one level down whose tree parent is v).
inline std::vector<int> tree_children(const FillingGraph& g, int v) {
  std::vector<int> out;
  const int k = g.level_of(v);
  if (k >= g.depth) return out;
  const int off = g.level_offset[static_cast<size_t>(k) + 1];
  const int sz = g.level_size(k + 1);
  for (int i = 0; i < sz; ++i)
    if (g.tree_parent[static_cast<size_t>(off) + i] == v) out.push_back(off + i);
  return out;
}

/// Tree descendants exactly j levels below v.
inline std::vector<int> descendants_tree(const FillingGraph& g, int v, int j) {
  std::vector<int> cur{v};
  for (int step = 0; step < j; ++step) {
    std::vector<int> next;
    for (int u : cur) {
      auto ch = tree_children(g, u);
      next.insert(next.end(), ch.begin(), ch.end());
    }
    cur = std::move(next);
  }
  std::sort(cur.begin(), cur.end());
  return cur;
}

/// Graph descendants k levels below v (vertically descending graph paths).
inline std::vector<int> descendants_graph(const FillingGraph& g, int v, int k) {
  std::vector<int> cur{v};
  for (int step = 0; step < k; ++step) {
    std::vector<int> next;
    for (int u : cur)
      next.insert(next.end(), g.children[static_cast<size_t>(u)].begin(),
                  g.children[static_cast<size_t>(u)].end());
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    cur = std::move(next);
  }
  return cur;
}

/// SI(v): v together with its horizontal neighbors.
inline std::vector<int> immediate_siblings(const FillingGraph& g, int v) {
  std::vector<int> out{v};
  out.insert(out.end(), g.horiz[static_cast<size_t>(v)].begin(), g.horiz[static_cast<size_t>(v)].end());
  std::sort(out.begin(), out.end());
  return out;
}

/// S(v): v plus everything within horizontal graph distance two.
inline std::vector<int> sibling_set(const FillingGraph& g, int v) {
  std::vector<int> out{v};
  for (int u : g.horiz[static_cast<size_t>(v)]) {
    out.push_back(u);
    out.insert(out.end(), g.horiz[static_cast<size_t>(u)].begin(), g.horiz[static_cast<size_t>(u)].end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// T(v): level n_v+1 vertices w with B_w inside 6B_v (center form
/// d + r_{k+1} <= 6 r_k). Contains every graph child of v.
inline std::vector<int> extended_children(const FillingGraph& g, int v) {
  std::vector<int> out;
  const int k = g.level_of(v);
  if (k >= g.depth) return out;
  const int x = g.point_of(v);
  const auto& nxt = g.level_points[static_cast<size_t>(k) + 1];
  const int noff = g.level_offset[static_cast<size_t>(k) + 1];
  const double rk = g.radius(k), rk1 = g.radius(k + 1);
  for (size_t j = 0; j < nxt.size(); ++j) {
    const double d = x == nxt[j] ? 0.0 : g.space->dist(x, nxt[j]);
    if (leq(d + rk1, 6.0 * rk)) out.push_back(noff + static_cast<int>(j));
  }
  return out;
}

/// Largest |T(v)| over vertices above the deepest level.
inline int max_extended_children(const FillingGraph& g) {
  int m = 0;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.level_of(v) < g.depth)
      m = std::max(m, static_cast<int>(extended_children(g, v).size()));
  return m;
}

/// Direct descendant w_v = (x_v, n_v+1); -1 when the point drops out of the
/// next net level (cannot happen for nested nets) or v is at the bottom.
inline int direct_descendant(const FillingGraph& g, int v) {
  const int k = g.level_of(v);
  if (k >= g.depth) return -1;
  return g.vertex(g.point_of(v), k + 1);
}

/// Per-vertex combinatorics bundle.
struct VertexCombinatorics {
  std::vector<int> ancestry;                  // g(v)_0 .. g(v)_{n_v}
  std::vector<std::vector<int>> tree_desc;    // j -> D_j(v), j = 1..
  std::vector<std::vector<int>> graph_desc;   // k -> DG_k(v)
  std::vector<int> siblings;                  // S(v)
  std::vector<int> immediate;                 // SI(v)
  std::vector<int> extended;                  // T(v)
};

inline VertexCombinatorics combinatorics(const FillingGraph& g, int v) {
  VertexCombinatorics c;
  c.ancestry = ancestry(g, v);
  const int k = g.level_of(v);
  for (int j = 1; k + j <= g.depth; ++j) {
    c.tree_desc.push_back(descendants_tree(g, v, j));
    c.graph_desc.push_back(descendants_graph(g, v, j));
  }
  c.siblings = sibling_set(g, v);
  c.immediate = immediate_siblings(g, v);
  c.extended = extended_children(g, v);
  return c;
}

/// Scan of the non-tree vertical edges: each should satisfy
/// "parent of the child is a horizontal neighbor of the upper endpoint".
/// Holds when the resampling condition is met; reported otherwise.
inline void check_vertical_parent_neighbors(const FillingGraph& g, Diagnostics& diag) {
  int violations = 0;
  std::string witness;
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int w : g.children[static_cast<size_t>(v)]) {
      if (g.tree_parent[static_cast<size_t>(w)] == v) continue;
      const int gw = g.tree_parent[static_cast<size_t>(w)];
      const auto& h = g.horiz[static_cast<size_t>(v)];
      if (!std::binary_search(h.begin(), h.end(), gw)) {
        ++violations;
        if (witness.empty())
          witness = "edge (" + std::to_string(v) + "," + std::to_string(w) + ")";
      }
    }
  diag.require(violations == 0, "vertical_parent_neighbor",
               violations == 0 ? "all non-tree vertical edges have adjacent parents"
                               : std::to_string(violations) + " violations, first " + witness);
}

/// Edge-list text export: one line `(point_id level) (point_id level) H|V|T`.
inline void export_edge_list(const FillingGraph& g, std::ostream& out) {
  auto name = [&](int v) {
    return "(" + g.space->ids()[static_cast<size_t>(g.point_of(v))] + " " +
           std::to_string(g.level_of(v)) + ")";
  };
  for (int v = 0; v < g.vertex_count(); ++v) {
    for (int u : g.horiz[static_cast<size_t>(v)])
      if (v < u) out << name(v) << " " << name(u) << " H\n";
    for (int w : g.children[static_cast<size_t>(v)]) {
      const bool tree = g.has_tree && g.tree_parent[static_cast<size_t>(w)] == v;
      out << name(v) << " " << name(w) << " " << (tree ? 'T' : 'V') << "\n";
    }
  }
}

/// Per-level counts and degree statistics.
inline nlohmann::json graph_summary_json(const FillingGraph& g) {
  nlohmann::json levels = nlohmann::json::array();
  for (int k = 0; k <= g.depth; ++k) {
    int hmin = std::numeric_limits<int>::max(), hmax = 0;
    long long htot = 0;
    const int off = g.level_offset[static_cast<size_t>(k)];
    const int sz = g.level_size(k);
    for (int i = 0; i < sz; ++i) {
      const int d = static_cast<int>(g.horiz[static_cast<size_t>(off) + i].size());
      hmin = std::min(hmin, d);
      hmax = std::max(hmax, d);
      htot += d;
    }
    levels.push_back({{"level", k},
                      {"vertices", sz},
                      {"h_deg_min", sz ? hmin : 0},
                      {"h_deg_max", hmax},
                      {"h_deg_mean", sz ? static_cast<double>(htot) / sz : 0.0}});
  }
  return {{"step", g.step},
          {"alpha", g.alpha},
          {"alpha_eff", g.alpha_eff},
          {"tau", g.tau},
          {"depth", g.depth},
          {"n2", g.n2},
          {"vertices", g.vertex_count()},
          {"levels", levels}};
}

}  // namespace confdim
