#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "confdim/modulus.hpp"
#include "confdim/nets.hpp"
#include "confdim/point_cloud.hpp"

namespace confdim {

struct DecayProfile {
  double p = 0.0;
  std::vector<int> ks;
  std::vector<double> mods;
  double slope = 0.0;   // least-squares slope of log mod vs k
  bool hit_zero = false;
  bool decays = false;
  int window = 0;  // number of usable (positive) samples
};

struct DimensionParams {
  int k_lo = 1;
  int k_hi = 4;
  double p_min = 1.0;
  double p_max = 4.0;
  double decay_tol = 0.1;   // decay iff slope <= -decay_tol
  double width_tol = 0.25;  // bisection stops at this bracket width
  SolverOptions solver;
  int threads = 1;
};

/// Does Mod_p(k) decrease geometrically over the available k-window?
/// An exact zero anywhere in the window counts as decay outright.
inline DecayProfile decay_profile(const FillingGraph& g, double p, const DimensionParams& prm) {
  DecayProfile d;
  d.p = p;
  for (int k = prm.k_lo; k <= prm.k_hi && k <= g.depth; ++k) {
    d.ks.push_back(k);
    d.mods.push_back(mod_p_at_scale(g, p, k, prm.solver, true, prm.threads).value);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < d.mods.size(); ++i) {
    if (d.mods[i] <= 0.0) {
      d.hit_zero = true;
      continue;
    }
    const double x = d.ks[i], y = std::log(d.mods[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  d.window = m;
  if (m >= 2) {
    const double den = m * sxx - sx * sx;
    d.slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  }
  d.decays = d.hit_zero || (m >= 2 && d.slope <= -prm.decay_tol);
  return d;
}

enum class DimensionStatus { bracket, less_than_one, inconclusive };

struct DimensionEstimate {
  DimensionStatus status = DimensionStatus::inconclusive;
  double p_lo = 0.0;
  double p_hi = 0.0;
  std::vector<DecayProfile> probes;
  std::string detail;
};

/// Bisection on p over the decay decision. Decay already at p=1 reports the
/// "< 1" classification (the sub-1 regime collapses to 0); when even p_max
/// shows no decay the result is inconclusive with diagnostics.
inline DimensionEstimate estimate_dimension(const PointCloudSpace& space, double alpha, double tau,
                                            int L, DimensionParams prm = {},
                                            Diagnostics* diag = nullptr) {
  auto nets = build_nets(space, alpha, L, diag);
  auto g = build_graph(space, nets, tau, diag);
  DimensionEstimate est;
  if (g.depth < prm.k_lo + 1) {
    est.detail = "net depth too small for the requested k window";
    return est;
  }
  auto at_pmin = decay_profile(g, prm.p_min, prm);
  est.probes.push_back(at_pmin);
  if (at_pmin.decays) {
    est.status = DimensionStatus::less_than_one;
    est.p_lo = 0.0;
    est.p_hi = prm.p_min;
    est.detail = "decay already at p=" + std::to_string(prm.p_min) +
                 "; critical exponent below 1 collapses to 0";
    return est;
  }
  auto at_pmax = decay_profile(g, prm.p_max, prm);
  est.probes.push_back(at_pmax);
  if (!at_pmax.decays) {
    est.status = DimensionStatus::inconclusive;
    est.p_lo = prm.p_max;
    est.p_hi = std::numeric_limits<double>::infinity();
    std::ostringstream os;
    os << "no decay detected up to p=" << prm.p_max << " over k window " << prm.k_lo << ".."
       << prm.k_hi << " (slope " << at_pmax.slope << "); deepen L or widen the window";
    est.detail = os.str();
    return est;
  }
  double lo = prm.p_min, hi = prm.p_max;
  while (hi - lo > prm.width_tol) {
    const double mid = 0.5 * (lo + hi);
    auto probe = decay_profile(g, mid, prm);
    est.probes.push_back(probe);
    (probe.decays ? hi : lo) = mid;
  }
  est.status = DimensionStatus::bracket;
  est.p_lo = lo;
  est.p_hi = hi;
  return est;
}

}  // namespace confdim
