#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "confdim/common.hpp"
#include "confdim/point_cloud.hpp"

namespace confdim {

/// Nested maximal alpha^-n-separated subsets A_0 .. A_L. A_0 is the
/// singleton {point 0}; each level extends the previous one greedily in
/// sorted id order, so the hierarchy is deterministic.
struct NetHierarchy {
  double alpha = 0.0;
  int L = 0;
  std::vector<std::vector<int>> levels;  // level n -> sorted point indices
  int saturated_from = -1;               // first level with A_n = all points, -1 if none

  int level_size(int n) const { return static_cast<int>(levels[static_cast<size_t>(n)].size()); }
};

inline NetHierarchy build_nets(const PointCloudSpace& space, double alpha, int L,
                               Diagnostics* diag = nullptr, double K_d = 0.0) {
  if (L < 1) throw config_error("net depth L must be >= 1");
  if (alpha < 2.0) throw config_error("alpha must be >= 2");
  if (diag && K_d > 0.0) {
    const double bound = std::max(2.0, K_d * K_d * K_d);
    std::ostringstream os;
    os << "alpha=" << alpha << " vs max{2,K_d^3}=" << bound;
    diag->require(alpha > bound, "alpha_bound", os.str());
  }
  const int n = space.size();
  NetHierarchy nets;
  nets.alpha = alpha;
  nets.L = L;
  nets.levels.assign(static_cast<size_t>(L) + 1, {});
  nets.levels[0] = {0};
  const double gap = n > 1 ? space.min_gap() : 0.0;
  for (int lev = 1; lev <= L; ++lev) {
    const double sep = std::pow(alpha, -lev);
    auto& cur = nets.levels[static_cast<size_t>(lev)];
    cur = nets.levels[static_cast<size_t>(lev) - 1];
    for (int p = 0; p < n; ++p) {
      bool ok = true;
      for (int a : cur)
        if (a != p && lt(space.dist(p, a), sep)) {
          ok = false;
          break;
        }
      if (ok && std::find(cur.begin(), cur.end(), p) == cur.end()) cur.push_back(p);
    }
    std::sort(cur.begin(), cur.end());
    if (nets.saturated_from < 0 && static_cast<int>(cur.size()) == n) nets.saturated_from = lev;
    if (diag && nets.saturated_from == lev && n > 1 && lt(sep, gap)) {
      std::ostringstream os;
      os << "alpha^-" << lev << " below min gap " << gap << "; A_" << lev << " = all points";
      diag->note("net_saturation", os.str());
    }
  }
  return nets;
}

struct NetCheckReport {
  bool nested = true;
  bool separated = true;
  bool maximal = true;
  int witness_level = -1;
  int witness_point = -1;

  bool ok() const { return nested && separated && maximal; }
};

/// Exhaustive verification of nesting, separation and maximality.
inline NetCheckReport check_nets(const PointCloudSpace& space, const NetHierarchy& nets) {
  NetCheckReport r;
  const int n = space.size();
  for (int lev = 0; lev <= nets.L; ++lev) {
    const auto& cur = nets.levels[static_cast<size_t>(lev)];
    const double sep = std::pow(nets.alpha, -lev);
    if (lev > 0) {
      for (int a : nets.levels[static_cast<size_t>(lev) - 1])
        if (!std::binary_search(cur.begin(), cur.end(), a)) {
          r.nested = false;
          r.witness_level = lev;
          r.witness_point = a;
        }
    }
    for (size_t i = 0; i < cur.size() && r.separated; ++i)
      for (size_t j = i + 1; j < cur.size(); ++j)
        if (lt(space.dist(cur[i], cur[j]), sep)) {
          r.separated = false;
          r.witness_level = lev;
          r.witness_point = cur[i];
          break;
        }
    for (int p = 0; p < n && r.maximal; ++p) {
      bool covered = false;
      for (int a : cur)
        if (lt(space.dist(p, a), sep) || p == a) {
          covered = true;
          break;
        }
      if (!covered) {
        r.maximal = false;
        r.witness_level = lev;
        r.witness_point = p;
      }
    }
  }
  return r;
}

}  // namespace confdim
