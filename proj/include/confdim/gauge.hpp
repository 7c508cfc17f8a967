#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "confdim/filling_graph.hpp"
#include "confdim/modulus.hpp"
#include "confdim/point_cloud.hpp"

namespace confdim {

/// Distortion function model. Analytic gauges (identity, snowflake) use the
/// closed form t^exponent; imported metrics get an empirical monotone
/// envelope of ratio samples over log-spaced buckets.
class EtaModel {
 public:
  static EtaModel analytic(double exponent) {
    EtaModel m;
    m.analytic_ = true;
    m.exponent_ = exponent;
    return m;
  }

  static EtaModel empirical(std::vector<double> bucket_t, std::vector<double> envelope) {
    EtaModel m;
    m.analytic_ = false;
    m.t_ = std::move(bucket_t);
    m.env_ = std::move(envelope);
    return m;
  }

  bool is_analytic() const { return analytic_; }
  double exponent() const { return exponent_; }
  const std::vector<double>& bucket_t() const { return t_; }
  const std::vector<double>& envelope() const { return env_; }

  bool defined_at(double t) const {
    if (analytic_) return true;
    return !t_.empty() && t <= t_.back() * (1.0 + kRelTol);
  }

  /// Conservative evaluation: the envelope value of the first bucket
  /// covering t (the envelope is nondecreasing, so this dominates every
  /// observed ratio at arguments <= t).
  double eval(double t) const {
    if (analytic_) return std::pow(t, exponent_);
    if (!defined_at(t))
      throw construction_error("eta undefined at t=" + std::to_string(t) +
                               " (insufficient triple samples)");
    auto it = std::lower_bound(t_.begin(), t_.end(), t);
    if (it == t_.end()) --it;
    return env_[static_cast<size_t>(it - t_.begin())];
  }

 private:
  bool analytic_ = true;
  double exponent_ = 1.0;
  std::vector<double> t_;
  std::vector<double> env_;
};

/// A candidate gauge metric theta on the same point set, with its
/// distortion model relative to the base metric d.
struct GaugeMetric {
  const PointCloudSpace* base = nullptr;
  PointCloudSpace theta;  // loaded un-normalized or normalized; only ratios matter
  EtaModel eta;
};

/// Empirical eta-hat from sampled triples (x1,x2,x3):
///   t = d(x1,x2)/d(x1,x3), ratio = theta(x1,x2)/theta(x1,x3).
/// Bucketed maxima over log-spaced t, then a running maximum makes the
/// envelope monotone (a majorant of every sample, so admissibility constants
/// derived from it stay valid).
inline EtaModel estimate_eta(const PointCloudSpace& d, const PointCloudSpace& theta,
                             long long triples = 200000, uint64_t seed = 7,
                             int buckets_per_decade = 8) {
  const int n = d.size();
  if (n < 3) throw config_error("eta estimation needs >= 3 points");
  struct Sample {
    double t, ratio;
  };
  std::vector<Sample> samples;
  Rng rng(seed);
  auto push = [&](int a, int b, int c) {
    if (a == c || b == a || d.dist(a, c) <= 0.0) return;
    const double t = d.dist(a, b) / d.dist(a, c);
    if (!(t > 0.0)) return;
    samples.push_back({t, theta.dist(a, b) / theta.dist(a, c)});
  };
  if (static_cast<long long>(n) * n * n <= triples) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) push(a, b, c);
  } else {
    for (long long s = 0; s < triples; ++s)
      push(static_cast<int>(rng.below(static_cast<uint64_t>(n))),
           static_cast<int>(rng.below(static_cast<uint64_t>(n))),
           static_cast<int>(rng.below(static_cast<uint64_t>(n))));
  }
  if (samples.empty()) throw construction_error("no usable triples for eta estimation");
  double tmin = samples[0].t, tmax = samples[0].t;
  for (const auto& s : samples) {
    tmin = std::min(tmin, s.t);
    tmax = std::max(tmax, s.t);
  }
  const double step = std::pow(10.0, 1.0 / buckets_per_decade);
  std::vector<double> edges{tmin};
  while (edges.back() < tmax) edges.push_back(edges.back() * step);
  std::vector<double> env(edges.size(), 0.0);
  for (const auto& s : samples) {
    size_t b = static_cast<size_t>(std::lower_bound(edges.begin(), edges.end(), s.t) - edges.begin());
    if (b >= env.size()) b = env.size() - 1;
    env[b] = std::max(env[b], s.ratio);
  }
  for (size_t i = 1; i < env.size(); ++i) env[i] = std::max(env[i], env[i - 1]);
  return EtaModel::empirical(std::move(edges), std::move(env));
}

namespace detail {
/// Points of X inside the open ball B((x,level)) of a graph vertex.
inline std::vector<int> ball_members(const FillingGraph& g, int center_point, double radius) {
  std::vector<int> out;
  const PointCloudSpace& space = *g.space;
  for (int z = 0; z < space.size(); ++z) {
    const double d = z == center_point ? 0.0 : space.dist(center_point, z);
    if (lt(d, radius)) out.push_back(z);
  }
  return out;
}

inline double diam_under(const PointCloudSpace& theta, const std::vector<int>& members) {
  double s = 0.0;
  for (size_t i = 0; i < members.size(); ++i)
    for (size_t j = i + 1; j < members.size(); ++j)
      s = std::max(s, theta.dist(members[i], members[j]));
  return s;
}
}  // namespace detail

/// Diameter-ratio density on level n_v+k:
///   rho'(v') = diam_theta(B_{v'}) / diam_theta(2B_v) when B_{v'} meets the
///   closed ball 2B_v, else 0. Indexed like the level's vertex list.
inline std::vector<double> gauge_admissible_density(const PointCloudSpace& theta,
                                                    const FillingGraph& g, int v, int k) {
  const int n = g.level_of(v);
  if (n + k > g.depth) throw config_error("k exceeds graph depth");
  const int x = g.point_of(v);
  const double rv = g.radius(n), rw = g.radius(n + k);
  const PointCloudSpace& space = *g.space;
  auto big = detail::ball_members(g, x, 2.0 * rv);
  // closed-ball variant: include boundary points (<= with tolerance)
  for (int z = 0; z < space.size(); ++z) {
    const double d = z == x ? 0.0 : space.dist(x, z);
    if (!lt(d, 2.0 * rv) && leq(d, 2.0 * rv))
      big.push_back(z);
  }
  std::sort(big.begin(), big.end());
  big.erase(std::unique(big.begin(), big.end()), big.end());
  const double denom = detail::diam_under(theta, big);
  if (!(denom > 0.0)) throw construction_error("degenerate diam_theta(2B_v)=0");
  std::vector<char> in_big(static_cast<size_t>(space.size()), 0);
  for (int z : big) in_big[static_cast<size_t>(z)] = 1;
  const auto& pts = g.level_points[static_cast<size_t>(n) + k];
  std::vector<double> rho(pts.size(), 0.0);
  for (size_t i = 0; i < pts.size(); ++i) {
    auto members = detail::ball_members(g, pts[i], rw);
    const bool meets = std::any_of(members.begin(), members.end(),
                                   [&](int z) { return in_big[static_cast<size_t>(z)] != 0; });
    if (!meets) continue;
    rho[i] = detail::diam_under(theta, members) / denom;
  }
  return rho;
}

/// Scaling constant 4*eta(8)*eta(K_d*tau) that makes the diameter-ratio
/// density admissible.
inline double admissibility_constant(const EtaModel& eta, double K_d, double tau) {
  if (!eta.defined_at(8.0) || !eta.defined_at(K_d * tau))
    throw construction_error("eta undefined at 8 or K_d*tau; sample more triples");
  return 4.0 * eta.eval(8.0) * eta.eval(K_d * tau);
}

struct DiamComparisonReport {
  int pairs_checked = 0;   // (v',z) pairs for the two-sided bound
  int pairs_failed = 0;
  int vertices_checked = 0;  // v' with the ratio bound evaluated
  int vertices_failed = 0;
  int skipped_vacuous = 0;   // empty annulus at this resolution
  double worst_upper = 0.0;  // max diam/(2 eta(K_d) theta(x',z))
  double worst_ratio = 0.0;  // max ratio/(bound)
};

/// Two displayed comparisons for every v' whose ball meets the closed 2B_v:
///   theta(x',z) <= diam_theta(B_{v'}) <= 2 eta(K_d) theta(x',z)
///   diam_theta(B_{v'})/diam_theta(2B_v) <= 2 eta(K_d) eta(3K_d) eta(K_d^2 a^-k)
/// z runs over the annulus B_{v'} \ (1/K_d)B_{v'}; vacuous cases are counted.
inline DiamComparisonReport verify_diam_comparison(const PointCloudSpace& theta,
                                                   const EtaModel& eta, double K_d,
                                                   const FillingGraph& g, int v, int k) {
  DiamComparisonReport rep;
  const int n = g.level_of(v);
  const int x = g.point_of(v);
  const double rv = g.radius(n), rw = g.radius(n + k);
  const PointCloudSpace& space = *g.space;
  std::vector<char> in_big(static_cast<size_t>(space.size()), 0);
  for (int z = 0; z < space.size(); ++z) {
    const double d = z == x ? 0.0 : space.dist(x, z);
    if (leq(d, 2.0 * rv)) in_big[static_cast<size_t>(z)] = 1;
  }
  const auto big_members = [&] {
    std::vector<int> out;
    for (int z = 0; z < space.size(); ++z)
      if (in_big[static_cast<size_t>(z)]) out.push_back(z);
    return out;
  }();
  const double big_diam = detail::diam_under(theta, big_members);
  const double ratio_bound =
      2.0 * eta.eval(K_d) * eta.eval(3.0 * K_d) * eta.eval(K_d * K_d * std::pow(g.alpha_eff, -k));
  const auto& pts = g.level_points[static_cast<size_t>(n) + k];
  for (size_t i = 0; i < pts.size(); ++i) {
    auto members = detail::ball_members(g, pts[i], rw);
    const bool meets = std::any_of(members.begin(), members.end(),
                                   [&](int z) { return in_big[static_cast<size_t>(z)] != 0; });
    if (!meets) continue;
    const double diam = detail::diam_under(theta, members);
    std::vector<int> annulus;
    for (int z : members) {
      const double d = z == pts[i] ? 0.0 : space.dist(pts[i], z);
      if (!lt(d, rw / K_d)) annulus.push_back(z);
    }
    if (annulus.empty()) {
      ++rep.skipped_vacuous;
      continue;
    }
    const double two_eta = 2.0 * eta.eval(K_d);
    for (int z : annulus) {
      ++rep.pairs_checked;
      const double tz = theta.dist(pts[i], z);
      const bool lower_ok = leq(tz, diam);
      const bool upper_ok = leq(diam, two_eta * tz);
      if (two_eta * tz > 0.0) rep.worst_upper = std::max(rep.worst_upper, diam / (two_eta * tz));
      if (!lower_ok || !upper_ok) ++rep.pairs_failed;
    }
    ++rep.vertices_checked;
    if (big_diam > 0.0) {
      const double ratio = diam / big_diam;
      rep.worst_ratio = std::max(rep.worst_ratio, ratio / ratio_bound);
      if (!leq(ratio, ratio_bound)) ++rep.vertices_failed;
    }
  }
  return rep;
}

struct GaugeFeasibilityReport {
  int families = 0;
  int paths_checked = 0;
  int paths_failed = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min scaled path sum
  double constant = 0.0;
};

/// Feasibility audit of C*rho' on the enumerated canonical paths of
/// Gamma_k(B_v) for every base vertex at the given offset k.
inline GaugeFeasibilityReport gauge_feasibility(const PointCloudSpace& theta, const EtaModel& eta,
                                                double K_d, const FillingGraph& g, int k,
                                                int path_cap = 20000) {
  GaugeFeasibilityReport rep;
  rep.constant = admissibility_constant(eta, K_d, g.tau);
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.level_of(v) + k > g.depth) continue;
    auto fam = build_family(g, v, k, false);
    std::vector<std::vector<int>> paths;
    try {
      paths = enumerate_paths(fam, path_cap);
    } catch (const size_error&) {
      continue;  // audited families are the enumerable ones
    }
    if (paths.empty()) continue;
    ++rep.families;
    const int n = g.level_of(v);
    auto rho = gauge_admissible_density(theta, g, v, k);
    const int off = g.level_offset[static_cast<size_t>(n) + k];
    for (const auto& P : paths) {
      double s = 0.0;
      for (int li : P) {
        const int gv = fam.vertices[static_cast<size_t>(li)];
        s += rep.constant * rho[static_cast<size_t>(gv - off)];
      }
      ++rep.paths_checked;
      rep.worst_margin = std::min(rep.worst_margin, s);
      if (lt(s, 1.0)) ++rep.paths_failed;
    }
  }
  return rep;
}

/// Decay of sum (C rho')^p across k for one base vertex.
inline std::vector<double> gauge_density_power_sums(const PointCloudSpace& theta,
                                                    const EtaModel& eta, double K_d,
                                                    const FillingGraph& g, int v, double p,
                                                    int k_lo, int k_hi) {
  std::vector<double> sums;
  const double C = admissibility_constant(eta, K_d, g.tau);
  for (int k = k_lo; k <= k_hi && g.level_of(v) + k <= g.depth; ++k) {
    auto rho = gauge_admissible_density(theta, g, v, k);
    double s = 0.0;
    for (double r : rho) s += std::pow(C * r, p);
    sums.push_back(s);
  }
  return sums;
}

}  // namespace confdim
