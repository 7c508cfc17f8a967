#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "confdim/common.hpp"
#include "json.hpp"

namespace confdim {

/// Default cap on point counts; a dense n x n distance matrix is kept.
inline constexpr int kDefaultPointCap = 4096;

struct MetricCheckReport {
  bool symmetric = true;
  bool zero_diagonal = true;
  bool positive_off_diagonal = true;
  bool triangle_ok = true;
  long long triples_checked = 0;
  int witness[3] = {-1, -1, -1};

  bool ok() const { return symmetric && zero_diagonal && positive_off_diagonal && triangle_ok; }
};

/// A finite metric space with exact pairwise distances. After normalization
/// the maximum pairwise distance is exactly 1/2 (bit-exact idempotent: the
/// scale factor is applied as (d * 0.5) / diam, so a second pass divides by
/// 0.5 and reproduces every entry).
class PointCloudSpace {
 public:
  PointCloudSpace() = default;

  static PointCloudSpace from_matrix(std::vector<std::string> ids,
                                     const std::vector<std::vector<double>>& matrix,
                                     std::string label = "",
                                     bool normalize = true,
                                     int point_cap = kDefaultPointCap) {
    const int n = static_cast<int>(ids.size());
    if (n < 1) throw config_error("space needs at least one point");
    if (n > point_cap)
      throw size_error("point count " + std::to_string(n) + " exceeds cap " +
                       std::to_string(point_cap));
    if (static_cast<int>(matrix.size()) != n) throw config_error("matrix size != id count");
    PointCloudSpace s;
    s.ids_ = std::move(ids);
    s.label_ = std::move(label);
    s.n_ = n;
    s.dist_.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(matrix[i].size()) != n) throw config_error("matrix is not square");
      for (int j = 0; j < n; ++j) s.dist_[s.idx(i, j)] = matrix[i][j];
    }
    if (normalize) s.normalize();
    return s;
  }

  static PointCloudSpace from_coords(const std::vector<std::vector<double>>& coords,
                                     const std::string& metric, std::string label = "",
                                     bool normalize = true, int point_cap = kDefaultPointCap) {
    const int n = static_cast<int>(coords.size());
    if (n < 1) throw config_error("space needs at least one point");
    if (n > point_cap)
      throw size_error("point count " + std::to_string(n) + " exceeds cap " +
                       std::to_string(point_cap));
    const bool sup = metric == "sup";
    if (!sup && metric != "euclidean")
      throw config_error("unknown metric '" + metric + "' (expected euclidean|sup)");
    PointCloudSpace s;
    s.n_ = n;
    s.label_ = std::move(label);
    s.ids_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) s.ids_[static_cast<size_t>(i)] = std::to_string(i);
    s.dist_.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double d = 0.0;
        if (sup) {
          for (size_t c = 0; c < coords[i].size(); ++c)
            d = std::max(d, std::abs(coords[i][c] - coords[j][c]));
        } else {
          for (size_t c = 0; c < coords[i].size(); ++c) {
            const double t = coords[i][c] - coords[j][c];
            d += t * t;
          }
          d = std::sqrt(d);
        }
        s.dist_[s.idx(i, j)] = s.dist_[s.idx(j, i)] = d;
      }
    if (normalize) s.normalize();
    return s;
  }

  int size() const { return n_; }
  const std::string& label() const { return label_; }
  const std::vector<std::string>& ids() const { return ids_; }
  double dist(int i, int j) const { return dist_[idx(i, j)]; }

  double diameter() const {
    double d = 0.0;
    for (double v : dist_) d = std::max(d, v);
    return d;
  }

  /// Smallest positive pairwise distance.
  double min_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) g = std::min(g, dist(i, j));
    return g;
  }

  /// Rescale so the diameter is exactly 1/2.
  void normalize() {
    const double d = diameter();
    if (d <= 0.0) return;  // single point
    for (double& v : dist_) v = (v * 0.5) / d;
  }

  /// Metric axioms. Triangle inequality is exhaustive up to max_exhaustive
  /// points and sampled (seeded) beyond; comparisons allow kRelTol slack for
  /// floating-point sums.
  MetricCheckReport validate(int max_exhaustive = 2000, uint64_t seed = 1,
                             long long samples = 2000000) const {
    MetricCheckReport r;
    for (int i = 0; i < n_ && r.zero_diagonal; ++i)
      if (dist(i, i) != 0.0) {
        r.zero_diagonal = false;
        r.witness[0] = i;
      }
    for (int i = 0; i < n_ && r.symmetric && r.positive_off_diagonal; ++i)
      for (int j = i + 1; j < n_; ++j) {
        if (dist(i, j) != dist(j, i)) {
          r.symmetric = false;
          r.witness[0] = i;
          r.witness[1] = j;
          break;
        }
        if (!(dist(i, j) > 0.0)) {
          r.positive_off_diagonal = false;
          r.witness[0] = i;
          r.witness[1] = j;
          break;
        }
      }
    auto check_triple = [&](int i, int j, int k) {
      ++r.triples_checked;
      if (lt(dist(i, j) + dist(j, k), dist(i, k))) {
        r.triangle_ok = false;
        r.witness[0] = i;
        r.witness[1] = j;
        r.witness[2] = k;
        return false;
      }
      return true;
    };
    if (n_ <= max_exhaustive) {
      for (int i = 0; i < n_ && r.triangle_ok; ++i)
        for (int j = 0; j < n_ && r.triangle_ok; ++j) {
          if (j == i) continue;
          const double dij = dist(i, j);
          for (int k = 0; k < n_; ++k) {
            ++r.triples_checked;
            if (lt(dij + dist(j, k), dist(i, k))) {
              r.triangle_ok = false;
              r.witness[0] = i;
              r.witness[1] = j;
              r.witness[2] = k;
              break;
            }
          }
        }
    } else {
      Rng rng(seed);
      for (long long s = 0; s < samples && r.triangle_ok; ++s)
        check_triple(static_cast<int>(rng.below(static_cast<uint64_t>(n_))),
                     static_cast<int>(rng.below(static_cast<uint64_t>(n_))),
                     static_cast<int>(rng.below(static_cast<uint64_t>(n_))));
    }
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["points"] = ids_;
    std::vector<std::vector<double>> m(static_cast<size_t>(n_),
                                       std::vector<double>(static_cast<size_t>(n_)));
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) m[static_cast<size_t>(i)][static_cast<size_t>(k)] = dist(i, k);
    j["matrix"] = m;
    if (!label_.empty()) j["label"] = label_;
    return j;
  }

  static PointCloudSpace from_json(const nlohmann::json& j, bool normalize = true,
                                   int point_cap = kDefaultPointCap) {
    std::string label = j.value("label", std::string());
    if (j.contains("coords")) {
      return from_coords(j.at("coords").get<std::vector<std::vector<double>>>(),
                         j.value("metric", std::string("euclidean")), label, normalize, point_cap);
    }
    if (!j.contains("points") || !j.contains("matrix"))
      throw io_error("space json needs either {points,matrix} or {coords,metric}");
    std::vector<std::string> ids;
    for (const auto& v : j.at("points"))
      ids.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    return from_matrix(std::move(ids), j.at("matrix").get<std::vector<std::vector<double>>>(),
                       label, normalize, point_cap);
  }

  static PointCloudSpace load(const std::string& path, bool normalize = true,
                              int point_cap = kDefaultPointCap) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j, normalize, point_cap);
  }

 private:
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> dist_;
  std::string label_;
};

namespace detail {
inline PointCloudSpace space_from_line(const std::vector<double>& xs, const std::string& label,
                                       int point_cap) {
  std::vector<std::vector<double>> coords;
  coords.reserve(xs.size());
  for (double x : xs) coords.push_back({x});
  auto s = PointCloudSpace::from_coords(coords, "euclidean", label, true, point_cap);
  return s;
}
}  // namespace detail

/// 2^depth left endpoints of the depth-level middle-(1-2*ratio) Cantor
/// construction on [0,1], then diameter-normalized.
inline PointCloudSpace generate_cantor(int depth, double ratio,
                                       int point_cap = kDefaultPointCap) {
  if (depth < 1) throw config_error("cantor depth must be >= 1");
  if (!(ratio > 0.0 && ratio < 0.5)) throw config_error("cantor ratio must lie in (0,1/2)");
  if (depth > 30 || (1LL << depth) > point_cap)
    throw size_error("cantor depth " + std::to_string(depth) + " exceeds point cap");
  std::vector<double> xs{0.0};
  for (int d = 0; d < depth; ++d) {
    std::vector<double> next;
    next.reserve(xs.size() * 2);
    for (double x : xs) next.push_back(ratio * x);
    for (double x : xs) next.push_back(1.0 - ratio + ratio * x);
    xs = std::move(next);
  }
  std::sort(xs.begin(), xs.end());
  std::ostringstream label;
  label << "cantor(depth=" << depth << ",ratio=" << ratio << ")";
  return detail::space_from_line(xs, label.str(), point_cap);
}

/// Centers of the 8^depth retained cells of the level-depth Sierpinski
/// carpet, sup metric, normalized.
inline PointCloudSpace generate_carpet(int depth, int point_cap = kDefaultPointCap) {
  if (depth < 1 || depth > 5) throw config_error("carpet depth must lie in 1..5");
  double count = std::pow(8.0, depth);
  if (count > point_cap)
    throw size_error("carpet depth " + std::to_string(depth) + " exceeds point cap " +
                     std::to_string(point_cap));
  std::vector<std::pair<double, double>> cells{{0.0, 0.0}};
  double size = 1.0;
  for (int d = 0; d < depth; ++d) {
    size /= 3.0;
    std::vector<std::pair<double, double>> next;
    next.reserve(cells.size() * 8);
    for (const auto& [cx, cy] : cells)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          if (i == 1 && j == 1) continue;
          next.push_back({cx + i * size, cy + j * size});
        }
    cells = std::move(next);
  }
  std::sort(cells.begin(), cells.end());
  std::vector<std::vector<double>> coords;
  coords.reserve(cells.size());
  for (const auto& [x, y] : cells) coords.push_back({x + size / 2.0, y + size / 2.0});
  return PointCloudSpace::from_coords(coords, "sup", "carpet(depth=" + std::to_string(depth) + ")",
                                      true, point_cap);
}

/// n equally spaced points on [0,1], normalized; models the interval.
inline PointCloudSpace generate_grid(int n, int point_cap = kDefaultPointCap) {
  if (n < 2) throw config_error("grid needs n >= 2");
  if (n > point_cap) throw size_error("grid n exceeds point cap");
  std::vector<double> xs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<size_t>(i)] = static_cast<double>(i) / (n - 1);
  return detail::space_from_line(xs, "grid(n=" + std::to_string(n) + ")", point_cap);
}

/// All distances raised to `exponent`, then re-normalized. Concavity of
/// t -> t^e on e in (0,1] preserves the triangle inequality.
inline PointCloudSpace snowflake(const PointCloudSpace& space, double exponent) {
  if (!(exponent > 0.0 && exponent <= 1.0))
    throw config_error("snowflake exponent must lie in (0,1]");
  const int n = space.size();
  std::vector<std::vector<double>> m(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        m[static_cast<size_t>(i)][static_cast<size_t>(j)] = std::pow(space.dist(i, j), exponent);
  std::ostringstream label;
  label << "snowflake(" << space.label() << "," << exponent << ")";
  return PointCloudSpace::from_matrix(space.ids(), m, label.str(), true,
                                      std::max(n, kDefaultPointCap));
}

struct StructureConstants {
  int doubling_N = 1;
  long long N1 = 1;  // = doubling_N^6
  int N2 = 0;        // horizontal-neighbor bound; written back after a graph build
  double K_d = 2.0 + 1e-9;
};

/// Empirical doubling constant and uniform-perfectness constant over a
/// geometric grid of radii. doubling_N is the size of a greedy r/2-separated
/// subset of B(x,r); K_d is the smallest constant making every sampled
/// annulus nonempty, clamped below at 2+1e-9.
inline StructureConstants estimate_constants(const PointCloudSpace& space,
                                             int max_centers = 2048) {
  const int n = space.size();
  if (n < 2) throw config_error("constant estimation needs >= 2 points");
  StructureConstants sc;
  const double diam = space.diameter();
  const double gap = space.min_gap();
  std::vector<double> radii;
  for (double r = diam * 1.000000001; !lt(r, gap); r /= std::sqrt(2.0)) radii.push_back(r);
  radii.push_back(gap);

  const int stride = std::max(1, (n + max_centers - 1) / max_centers);
  int bestN = 1;
  double kd = 2.0 + 1e-9;
  std::vector<int> ball;
  std::vector<int> accepted;
  for (int x = 0; x < n; x += stride) {
    for (double r : radii) {
      ball.clear();
      double inner_max = 0.0;  // largest distance from x strictly below r
      double point_max = 0.0;
      for (int y = 0; y < n; ++y) {
        const double d = space.dist(x, y);
        point_max = std::max(point_max, d);
        if (lt(d, r)) {
          ball.push_back(y);
          if (y != x) inner_max = std::max(inner_max, d);
        }
      }
      // greedy r/2-separated subset, sorted id order
      accepted.clear();
      for (int y : ball) {
        bool ok = true;
        for (int a : accepted)
          if (lt(space.dist(y, a), r / 2.0)) {
            ok = false;
            break;
          }
        if (ok) accepted.push_back(y);
      }
      bestN = std::max(bestN, static_cast<int>(accepted.size()));
      // annulus constraint active only if something lies outside B(x,r)
      // and the ball sees a point besides x (above sample resolution)
      const bool outside_exists = !lt(point_max, r);
      if (outside_exists && inner_max > 0.0) kd = std::max(kd, r / inner_max);
    }
  }
  sc.doubling_N = bestN;
  sc.N1 = 1;
  for (int i = 0; i < 6; ++i) sc.N1 *= bestN;
  sc.K_d = std::max(kd, 2.0 + 1e-9);
  return sc;
}

}  // namespace confdim
