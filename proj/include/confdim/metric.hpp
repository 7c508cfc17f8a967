#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "confdim/common.hpp"
#include "confdim/weights.hpp"
#include "json.hpp"

namespace confdim {

/// SI-minima of pi and rho, used by the auxiliary edge length.
struct StarWeights {
  std::vector<double> pi_star;
  std::vector<double> rho_star;
};

inline StarWeights star_weights(const WeightSystem& ws) {
  const FillingGraph& g = *ws.graph;
  StarWeights sw;
  sw.pi_star.resize(ws.pi.size());
  sw.rho_star.resize(ws.rho.size());
  for (int v = 0; v < g.vertex_count(); ++v) {
    double mp = ws.pi[static_cast<size_t>(v)], mr = ws.rho[static_cast<size_t>(v)];
    for (int u : g.horiz[static_cast<size_t>(v)]) {
      mp = std::min(mp, ws.pi[static_cast<size_t>(u)]);
      mr = std::min(mr, ws.rho[static_cast<size_t>(u)]);
    }
    sw.pi_star[static_cast<size_t>(v)] = mp;
    sw.rho_star[static_cast<size_t>(v)] = mr;
  }
  return sw;
}

/// Trapezoid integral of the linear interpolation of pi over one unit edge.
inline double edge_integral(const WeightSystem& ws, int u, int v) {
  return 0.5 * (ws.pi[static_cast<size_t>(u)] + ws.pi[static_cast<size_t>(v)]);
}

enum class EdgeKind { horizontal, tree_vertical, graph_vertical, none };

inline EdgeKind classify_edge(const FillingGraph& g, int u, int v) {
  const int ku = g.level_of(u), kv = g.level_of(v);
  if (ku == kv) {
    const auto& h = g.horiz[static_cast<size_t>(u)];
    return std::binary_search(h.begin(), h.end(), v) ? EdgeKind::horizontal : EdgeKind::none;
  }
  if (std::abs(ku - kv) != 1) return EdgeKind::none;
  const int top = ku < kv ? u : v, bot = ku < kv ? v : u;
  const auto& ch = g.children[static_cast<size_t>(top)];
  if (std::find(ch.begin(), ch.end(), bot) == ch.end()) return EdgeKind::none;
  return g.tree_parent[static_cast<size_t>(bot)] == top ? EdgeKind::tree_vertical
                                                        : EdgeKind::graph_vertical;
}

/// Auxiliary edge length on the tree+horizontal subgraph:
///   horizontal e = (u,v):        min(pi*(u), pi*(v))
///   tree edge into child v':     K0^2 * pi*(v')
inline double ell_edge(const WeightSystem& ws, const StarWeights& sw, int u, int v) {
  const FillingGraph& g = *ws.graph;
  const EdgeKind kind = classify_edge(g, u, v);
  if (kind == EdgeKind::horizontal)
    return std::min(sw.pi_star[static_cast<size_t>(u)], sw.pi_star[static_cast<size_t>(v)]);
  if (kind == EdgeKind::tree_vertical) {
    const int child = g.level_of(u) > g.level_of(v) ? u : v;
    return ws.constants.K0 * ws.constants.K0 * sw.pi_star[static_cast<size_t>(child)];
  }
  throw config_error("ell length is defined on tree and horizontal edges only");
}

/// Sum of per-edge lengths along a vertex path in the tree+horizontal view.
inline double ell_length(const WeightSystem& ws, const StarWeights& sw,
                         const std::vector<int>& path) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < path.size(); ++i) s += ell_edge(ws, sw, path[i], path[i + 1]);
  return s;
}

/// Deepest vertex common to both ancestry chains or lying on one chain while
/// neighboring a vertex of the other. Ties prefer the u-chain, then the
/// smaller point id. The root always qualifies.
inline int compute_z(const FillingGraph& g, int u, int v) {
  auto cu = ancestry(g, u);
  auto cv = ancestry(g, v);
  auto neighbors = [&](int a, int b) {
    if (a == b) return true;
    const int ka = g.level_of(a), kb = g.level_of(b);
    if (ka == kb) {
      const auto& h = g.horiz[static_cast<size_t>(a)];
      return std::binary_search(h.begin(), h.end(), b);
    }
    if (std::abs(ka - kb) != 1) return false;
    const int top = ka < kb ? a : b, bot = ka < kb ? b : a;
    const auto& ch = g.children[static_cast<size_t>(top)];
    return std::find(ch.begin(), ch.end(), bot) != ch.end();
  };
  auto qualifies = [&](const std::vector<int>& mine, const std::vector<int>& other, int i) {
    const int a = mine[static_cast<size_t>(i)];
    for (int dj = -1; dj <= 1; ++dj) {
      const int j = i + dj;
      if (j < 0 || j >= static_cast<int>(other.size())) continue;
      if (neighbors(a, other[static_cast<size_t>(j)])) return true;
    }
    return false;
  };
  int best = cu[0];  // the shared root
  int best_gen = 0;
  for (int i = static_cast<int>(cu.size()) - 1; i > best_gen; --i)
    if (qualifies(cu, cv, i)) {
      best = cu[static_cast<size_t>(i)];
      best_gen = i;
      break;
    }
  for (int i = static_cast<int>(cv.size()) - 1; i > best_gen; --i)
    if (qualifies(cv, cu, i)) {
      best = cv[static_cast<size_t>(i)];
      best_gen = i;
      break;
    }
  return best;
}

struct DistanceResult {
  double distance = 0.0;
  std::vector<int> path;
};

namespace detail {
template <typename EdgeCost>
DistanceResult dijkstra(const FillingGraph& g, int src, int dst, bool tree_edges_only,
                        EdgeCost cost) {
  const int n = g.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(n), inf);
  std::vector<int> parent(static_cast<size_t>(n), -1);
  std::vector<char> done(static_cast<size_t>(n), 0);
  dist[static_cast<size_t>(src)] = 0.0;
  auto relax = [&](int a, int b) {
    const double cand = dist[static_cast<size_t>(a)] + cost(a, b);
    if (cand < dist[static_cast<size_t>(b)]) {
      dist[static_cast<size_t>(b)] = cand;
      parent[static_cast<size_t>(b)] = a;
    }
  };
  for (;;) {
    int u = -1;
    for (int i = 0; i < n; ++i)
      if (!done[static_cast<size_t>(i)] && dist[static_cast<size_t>(i)] < inf &&
          (u < 0 || dist[static_cast<size_t>(i)] < dist[static_cast<size_t>(u)]))
        u = i;
    if (u < 0 || (dst >= 0 && u == dst)) break;
    done[static_cast<size_t>(u)] = 1;
    for (int w : g.horiz[static_cast<size_t>(u)]) relax(u, w);
    for (int w : g.children[static_cast<size_t>(u)])
      if (!tree_edges_only || g.tree_parent[static_cast<size_t>(w)] == u) relax(u, w);
    for (int w : g.parents[static_cast<size_t>(u)])
      if (!tree_edges_only || g.tree_parent[static_cast<size_t>(u)] == w) relax(u, w);
  }
  DistanceResult out;
  if (dst >= 0) {
    out.distance = dist[static_cast<size_t>(dst)];
    for (int x = dst; x >= 0; x = parent[static_cast<size_t>(x)]) out.path.push_back(x);
    std::reverse(out.path.begin(), out.path.end());
  } else {
    out.path.clear();
    out.distance = 0.0;
  }
  return out;
}

template <typename EdgeCost>
std::vector<double> dijkstra_all(const FillingGraph& g, int src, bool tree_edges_only,
                                 EdgeCost cost) {
  const int n = g.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(n), inf);
  std::vector<char> done(static_cast<size_t>(n), 0);
  dist[static_cast<size_t>(src)] = 0.0;
  for (;;) {
    int u = -1;
    for (int i = 0; i < n; ++i)
      if (!done[static_cast<size_t>(i)] && dist[static_cast<size_t>(i)] < inf &&
          (u < 0 || dist[static_cast<size_t>(i)] < dist[static_cast<size_t>(u)]))
        u = i;
    if (u < 0) break;
    done[static_cast<size_t>(u)] = 1;
    auto relax = [&](int a, int b) {
      const double cand = dist[static_cast<size_t>(a)] + cost(a, b);
      if (cand < dist[static_cast<size_t>(b)]) dist[static_cast<size_t>(b)] = cand;
    };
    for (int w : g.horiz[static_cast<size_t>(u)]) relax(u, w);
    for (int w : g.children[static_cast<size_t>(u)])
      if (!tree_edges_only || g.tree_parent[static_cast<size_t>(w)] == u) relax(u, w);
    for (int w : g.parents[static_cast<size_t>(u)])
      if (!tree_edges_only || g.tree_parent[static_cast<size_t>(u)] == w) relax(u, w);
  }
  return dist;
}
}  // namespace detail

/// d_rho between two vertices: shortest path over all graph edges with the
/// trapezoid pi-integral as edge cost.
inline DistanceResult graph_distance(const WeightSystem& ws, int u, int v) {
  if (u == v) return {0.0, {u}};
  return detail::dijkstra(*ws.graph, u, v, false,
                          [&](int a, int b) { return edge_integral(ws, a, b); });
}

/// Shortest ell-length between two vertices over the tree+horizontal view.
inline double ell_distance(const WeightSystem& ws, const StarWeights& sw, int u, int v) {
  if (u == v) return 0.0;
  return detail::dijkstra(*ws.graph, u, v, true,
                          [&](int a, int b) { return ell_edge(ws, sw, a, b); })
      .distance;
}

/// Finite-depth restriction of d_rho to the deepest-level net points, with a
/// geometric tail bound for the truncation.
struct BoundaryMetric {
  int depth = 0;
  double tail_bound = 0.0;
  std::vector<std::string> ids;           // point ids of the deepest net
  std::vector<std::vector<double>> matrix;

  nlohmann::json to_json(const nlohmann::json& config = {}) const {
    nlohmann::json j{{"schema", "confdim.metric.v1"},
                     {"depth", depth},
                     {"tail_bound", tail_bound},
                     {"points", ids},
                     {"matrix", matrix}};
    if (!config.is_null() && !config.empty()) j["config"] = config;
    return j;
  }
};

inline BoundaryMetric boundary_metric(const WeightSystem& ws, int depth) {
  const FillingGraph& g = *ws.graph;
  if (depth < 0 || depth > g.depth) throw config_error("depth exceeds available levels");
  BoundaryMetric bm;
  bm.depth = depth;
  double rho_max = 0.0;
  for (int v = 1; v < g.vertex_count(); ++v) rho_max = std::max(rho_max, ws.rho[static_cast<size_t>(v)]);
  // geometric tail sum_{j>depth} rho_max^j
  bm.tail_bound = rho_max < 1.0
                      ? std::pow(rho_max, depth + 1) / (1.0 - rho_max)
                      : std::numeric_limits<double>::infinity();
  const int off = g.level_offset[static_cast<size_t>(depth)];
  const int sz = g.level_size(depth);
  bm.ids.reserve(static_cast<size_t>(sz));
  for (int i = 0; i < sz; ++i)
    bm.ids.push_back(g.space->ids()[static_cast<size_t>(g.level_points[static_cast<size_t>(depth)][static_cast<size_t>(i)])]);
  bm.matrix.assign(static_cast<size_t>(sz), std::vector<double>(static_cast<size_t>(sz), 0.0));
  for (int i = 0; i < sz; ++i) {
    auto dist = detail::dijkstra_all(g, off + i, false,
                                     [&](int a, int b) { return edge_integral(ws, a, b); });
    for (int j = 0; j < sz; ++j)
      bm.matrix[static_cast<size_t>(i)][static_cast<size_t>(j)] = dist[static_cast<size_t>(off + j)];
  }
  // exact symmetry: fold the two Dijkstra passes together
  for (int i = 0; i < sz; ++i)
    for (int j = i + 1; j < sz; ++j) {
      const double m = std::min(bm.matrix[static_cast<size_t>(i)][static_cast<size_t>(j)],
                                bm.matrix[static_cast<size_t>(j)][static_cast<size_t>(i)]);
      bm.matrix[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          bm.matrix[static_cast<size_t>(j)][static_cast<size_t>(i)] = m;
    }
  for (int i = 0; i < sz; ++i) bm.matrix[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0.0;
  return bm;
}

/// Deepest vertex whose ball contains the space point (nearest net point at
/// the boundary depth, ties by smaller id).
inline int containing_vertex(const FillingGraph& g, int point, int depth) {
  const auto& pts = g.level_points[static_cast<size_t>(depth)];
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pts.size(); ++i) {
    const double d = pts[i] == point ? 0.0 : g.space->dist(pts[i], point);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return g.level_offset[static_cast<size_t>(depth)] + best;
}

inline void export_metric_json(const BoundaryMetric& bm, const std::string& path,
                               const nlohmann::json& config = {}) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << bm.to_json(config).dump(2) << "\n";
}

inline void export_metric_csv(const BoundaryMetric& bm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "id";
  for (const auto& id : bm.ids) out << "," << id;
  out << "\n";
  char buf[32];
  for (size_t i = 0; i < bm.ids.size(); ++i) {
    out << bm.ids[i];
    for (size_t j = 0; j < bm.ids.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", bm.matrix[i][j]);
      out << "," << buf;
    }
    out << "\n";
  }
}

/// Loads an exported JSON metric back as an (un-normalized) point cloud, so
/// it can feed the gauge-side checks or round-trip through export again.
inline PointCloudSpace import_metric_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("schema", std::string()) != "confdim.metric.v1")
    throw io_error("not a confdim.metric.v1 document");
  std::vector<std::string> ids;
  for (const auto& v : j.at("points")) ids.push_back(v.get<std::string>());
  return PointCloudSpace::from_matrix(std::move(ids),
                                      j.at("matrix").get<std::vector<std::vector<double>>>(),
                                      "imported d_rho", /*normalize=*/false);
}

}  // namespace confdim
