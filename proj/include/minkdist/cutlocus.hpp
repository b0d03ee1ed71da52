#pragma once

#include "minkdist/curvature.hpp"
#include "minkdist/distance.hpp"
#include "minkdist/parallel.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace minkdist {

struct CutOptions {
  ProjectionOptions projection;
  double rel_tol_cut = 1e-6;  // bisection stops at rel_tol_cut * initial bracket length
  double tol_focal = 1e-4;
  bool verify_monotone = true;
  int monotone_samples = 50;
  bool exterior = false;  // also compute l^-
};

enum class CutTag { multi_projection, focal };

inline std::string to_string(CutTag t) { return t == CutTag::focal ? "focal" : "multi"; }

template <int N>
struct RayRecord {
  BoundaryPoint<N> foot;
  Vec<N> x0;
  Vec<N> direction;  // D rho(nu(x0))
  double l = 0.0;
  std::optional<double> l_minus;  // +inf when no exterior cut is met
  double first_focal = std::numeric_limits<double>::infinity();
  Vec<N> cut_point;
  CutTag tag = CutTag::multi_projection;
  double tol_cut = 0.0;
  double kappa_max = 0.0;
};

// Upper bound on the Minkowski distance between two points of the closed
// domain: Euclidean box diameter times max rho0 on the unit sphere.
template <int N>
double diameter_bound(const Domain<N>& domain, const GaugeBody<N>& body) {
  return domain.box_diameter() / body.c1();
}

namespace detail {

// True while x0 is, up to the value tolerance, the only projection of the
// ray point at parameter t (negative t walks the exterior ray).
template <int N>
bool foot_is_sole_projection(const Domain<N>& domain, const GaugeBody<N>& body, const Vec<N>& x0, const Vec<N>& dir,
                             double t, Side side, const ProjectionOptions& opts) {
  const Vec<N> z = side == Side::interior ? Vec<N>(x0 + t * dir) : Vec<N>(x0 - t * dir);
  if (domain.inside(z) != (side == Side::interior)) return false;
  const GaugeBody<N> objective = side == Side::interior ? body : body.reflected();
  const ProjectionResult<N> r = classify(minimize_polar(domain, objective, z, opts), side, opts);
  if (t - r.distance > r.tol_value) return false;
  for (const auto& m : r.minimizers)
    if ((m.point - x0).norm() > opts.tol_cluster) return false;
  return true;
}

template <typename Pred>
double bisect_last_true(Pred&& pred, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Cut value l(x0): the last parameter t for which x0 stays the unique
// projection of x0 + t D rho(nu(x0)). Bisection on that predicate inside
// [0, min(first focal distance, diameter bound)].
template <int N>
RayRecord<N> cut_value(const Domain<N>& domain, const GaugeBody<N>& body, const CurvatureFrame<N>& cf,
                       const CutOptions& opts = {}) {
  RayRecord<N> rec;
  rec.foot = cf.foot;
  rec.x0 = cf.x0;
  rec.direction = cf.grad_rho_nu;
  rec.first_focal = first_focal(cf);
  rec.kappa_max = cf.max_kappa();
  const double diam = diameter_bound(domain, body);

  auto pred = [&](double t) {
    return detail::foot_is_sole_projection(domain, body, rec.x0, rec.direction, t, Side::interior, opts.projection);
  };

  const bool focal_upper = rec.first_focal <= diam;
  double hi = focal_upper ? rec.first_focal : diam;
  double lo = 0.0;
  // Bisection resolves the ray to a fixed fraction of its own bracket.
  rec.tol_cut = opts.rel_tol_cut * hi;
  bool done = false;
  if (pred(hi)) {
    if (focal_upper) {
      rec.l = hi;
      done = true;
    } else {
      hi *= 2.0;
      if (pred(hi)) throw BracketFailure("cut_value: predicate still true at twice the diameter bound");
    }
  }
  if (!done) {
    if (opts.verify_monotone && opts.monotone_samples > 1) {
      const int m = opts.monotone_samples;
      double last_true = 0.0;
      std::optional<double> first_false;
      for (int k = 1; k < m; ++k) {
        const double t = hi * k / m;
        const bool p = pred(t);
        if (p && first_false) {
          std::ostringstream msg;
          msg << "cut_value: ray predicate not monotone at x0 = (" << rec.x0.transpose() << "), false at t = "
              << *first_false << " but true at t = " << t;
          throw MonotoneViolation(msg.str());
        }
        if (p) last_true = t;
        else if (!first_false) first_false = t;
      }
      lo = last_true;
      if (first_false) hi = *first_false;
    }
    rec.l = detail::bisect_last_true(pred, lo, hi, rec.tol_cut);
  }
  rec.cut_point = rec.x0 + rec.l * rec.direction;
  rec.tag = std::isfinite(rec.first_focal) && std::abs(rec.l * rec.kappa_max - 1.0) <= opts.tol_focal
                ? CutTag::focal
                : CutTag::multi_projection;

  if (opts.exterior) {
    auto pred_ext = [&](double t) {
      return detail::foot_is_sole_projection(domain, body, rec.x0, rec.direction, t, Side::exterior,
                                             opts.projection);
    };
    // Exterior focal points sit at t = 1 / |kappa| for negative rho-curvatures.
    const double kmin = cf.min_kappa();
    const double ext_focal = kmin < 0.0 ? -1.0 / kmin : std::numeric_limits<double>::infinity();
    const bool ext_focal_upper = ext_focal <= diam;
    double ehi = ext_focal_upper ? ext_focal : diam;
    if (pred_ext(ehi)) {
      if (ext_focal_upper) rec.l_minus = ehi;
      else if (pred_ext(2.0 * ehi)) rec.l_minus = std::numeric_limits<double>::infinity();
      else rec.l_minus = detail::bisect_last_true(pred_ext, ehi, 2.0 * ehi, rec.tol_cut);
    } else {
      rec.l_minus = detail::bisect_last_true(pred_ext, 0.0, ehi, rec.tol_cut);
    }
  }
  return rec;
}

template <int N>
RayRecord<N> cut_value(const Domain<N>& domain, const GaugeBody<N>& body, const BoundaryPoint<N>& x0,
                       const CutOptions& opts = {}) {
  return cut_value(domain, body, curvature_frame(domain, body, x0), opts);
}

// Normal distance to the cut locus, tau(x) = l(p(x)) - d(x); zero on the
// (near-)singular set.
template <int N>
double tau(const Domain<N>& domain, const GaugeBody<N>& body, const Vec<N>& x, const CutOptions& opts = {}) {
  const SignedDistanceSample<N> s = signed_distance(domain, body, x, opts.projection);
  if (s.value < 0.0) throw SideMismatch("tau: point lies outside the domain");
  if (!s.gradient) return 0.0;
  const RayRecord<N> rec = cut_value(domain, body, s.projection.nearest().foot, opts);
  return std::max(0.0, rec.l - s.value);
}

template <int N>
struct CutLocusSet {
  std::vector<RayRecord<N>> samples;  // ordered by chart, then boundary parameter
  std::vector<Vec<N>> polyline;       // 2D only: parameter-ordered chain, duplicates collapsed
  std::vector<CutTag> polyline_tags;  // tag of the sample that produced each polyline vertex
};

// Boundary sample used for cut-locus extraction: equispaced on the periodic
// 2D chart; in 3D a (resolution/2) x resolution grid per chart, keeping the
// nodes where that chart dominates the partition of unity.
template <int N>
std::vector<BoundaryPoint<N>> boundary_sample(const Domain<N>& domain, int resolution) {
  std::vector<BoundaryPoint<N>> out;
  for (int c = 0; c < domain.chart_count(); ++c) {
    const BoundaryChart<N>& chart = domain.chart(c);
    if constexpr (N == 2) {
      for (int k = 0; k < resolution; ++k) {
        const double u = chart.lo()(0) + (chart.hi()(0) - chart.lo()(0)) * k / resolution;
        out.push_back({c, Param<2>(u)});
      }
    } else {
      const int nt = std::max(2, resolution / 2);
      for (int i = 0; i < nt; ++i) {
        const double th = chart.lo()(0) + (chart.hi()(0) - chart.lo()(0)) * (i + 0.5) / nt;
        for (int k = 0; k < resolution; ++k) {
          const double ph = chart.lo()(1) + (chart.hi()(1) - chart.lo()(1)) * k / resolution;
          const Param<3> u(th, ph);
          if (chart.weight(chart.eval(u).point) >= 0.5) out.push_back({c, u});
        }
      }
    }
  }
  return out;
}

template <int N>
CutLocusSet<N> extract_cut_locus(const Domain<N>& domain, const GaugeBody<N>& body, int boundary_resolution,
                                 const CutOptions& opts = {}) {
  if (boundary_resolution < 64) throw Error("extract_cut_locus: boundary resolution must be at least 64");
  const std::vector<BoundaryPoint<N>> feet = boundary_sample(domain, boundary_resolution);
  CutLocusSet<N> set;
  set.samples = parallel_map<RayRecord<N>>(feet.size(), [&](std::size_t i) {
    return cut_value(domain, body, feet[i], opts);
  });
  if constexpr (N == 2) {
    const double merge = opts.projection.tol_cluster;
    for (const auto& r : set.samples) {
      bool dup = false;
      for (const auto& p : set.polyline) {
        if ((p - r.cut_point).norm() <= merge) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        set.polyline.push_back(r.cut_point);
        set.polyline_tags.push_back(r.tag);
      }
    }
  }
  return set;
}

// Leaves of the ridge (2D): cut points of the samples where l * kappa_max
// peaks along the boundary sequence and the ray ends at or next to its
// focal point, merged within merge_radius.
template <int N>
std::vector<Vec<N>> ridge_endpoints(const CutLocusSet<N>& set, double merge_radius, double focal_slack = 1e-2) {
  std::vector<Vec<N>> out;
  const std::size_t m = set.samples.size();
  auto focality = [&](std::size_t i) { return set.samples[i].l * set.samples[i].kappa_max; };
  for (std::size_t i = 0; i < m; ++i) {
    const double q = focality(i);
    if (q < 1.0 - focal_slack) continue;
    if (q < focality((i + m - 1) % m) || q < focality((i + 1) % m)) continue;
    const Vec<N>& z = set.samples[i].cut_point;
    bool dup = false;
    for (const auto& p : out) dup = dup || (p - z).norm() <= merge_radius;
    if (!dup) out.push_back(z);
  }
  return out;
}

// Evidence that a cut point belongs to the ridge: how many distinct
// projections tie at the cut point, and whether the focal mechanism binds.
// Candidates are the minimizers at the cut point, x0 itself, and the
// minimizers just past the cut: limits of projections from either side are
// projections of the cut point, and at the bisected point one of two
// shallow competing wells is easily missed.
struct CutPointCheck {
  int multiplicity = 0;
  bool focal = false;
  bool ok() const { return multiplicity >= 2 || focal; }
};

template <int N>
CutPointCheck check_cut_point(const Domain<N>& domain, const GaugeBody<N>& body, const RayRecord<N>& rec,
                              const CutOptions& opts = {}) {
  CutPointCheck out;
  out.focal = std::isfinite(rec.first_focal) && std::abs(rec.l * rec.kappa_max - 1.0) <= opts.tol_focal;
  const ProjectionOptions& p = opts.projection;
  const double eps = 10.0 * rec.tol_cut;
  std::vector<Vec<N>> cands{rec.x0};
  for (const auto& c : detail::minimize_polar(domain, body, rec.cut_point, p)) cands.push_back(c.point);
  const Vec<N> past = rec.x0 + (rec.l + eps) * rec.direction;
  if (domain.inside(past))
    for (const auto& c : detail::minimize_polar(domain, body, past, p)) cands.push_back(c.point);

  // Moving the base point by eps along the ray shifts values by at most
  // eps * max(rho0(dir), rho0(-dir)).
  const double lip = std::max(body.rho_polar(rec.direction), body.rho_polar(Vec<N>(-rec.direction)));
  const double tie = 2.0 * eps * lip + p.rel_tol_value * (1.0 + rec.l);
  auto value = [&](const Vec<N>& y) { return body.rho_polar(Vec<N>(rec.cut_point - y)); };
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : cands) best = std::min(best, value(y));
  std::vector<Vec<N>> distinct;
  for (const auto& y : cands) {
    if (value(y) > best + tie) continue;
    bool dup = false;
    for (const auto& q : distinct) dup = dup || (q - y).norm() <= p.tol_cluster;
    if (!dup) distinct.push_back(y);
  }
  out.multiplicity = static_cast<int>(distinct.size());
  return out;
}

}  // namespace minkdist
