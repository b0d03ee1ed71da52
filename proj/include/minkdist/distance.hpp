#pragma once

#include "minkdist/boundary.hpp"
#include "minkdist/gauge.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace minkdist {

enum class Side { interior, exterior };

struct ProjectionOptions {
  int seeds_per_axis = 0;       // 0 selects 256 (2D) or 64 (3D)
  double tol_cluster = 1e-4;    // ambient radius merging Newton duplicates
  double rel_tol_value = 1e-9;  // ties: value <= min + rel_tol_value * (1 + min)
  int max_newton = 200;
  int max_candidates = 32;

  int seeds(int dim) const { return seeds_per_axis > 0 ? seeds_per_axis : (dim == 2 ? 256 : 64); }
};

template <int N>
struct Minimizer {
  BoundaryPoint<N> foot;
  Vec<N> point;
  double value = 0.0;
  bool converged = true;
};

// The projection set of x: every boundary point attaining the minimum of
// rho0(x - y) (interior) or rho0(y - x) (exterior), up to value ties.
template <int N>
struct ProjectionResult {
  Side side = Side::interior;
  double distance = 0.0;
  double tol_value = 0.0;
  std::vector<Minimizer<N>> minimizers;  // one per tied cluster, ascending value
  std::vector<Minimizer<N>> clusters;    // every local-minimum cluster, ascending value
  int multiplicity = 0;
  bool unique = false;
  bool near_singular = false;  // a runner-up within 10 tol_value of the minimum

  const Minimizer<N>& nearest() const { return minimizers.front(); }
};

namespace detail {

struct Objective {
  double value;
  bool at_origin;
};

// Gradient and Hessian of u -> rho0(x - Y(u)).
template <int N>
std::pair<Param<N>, TangentMat<N>> polar_derivatives(const ChartJet<N>& j, const GaugeBody<N>& body, const Vec<N>& w) {
  const Vec<N> dp = body.grad_rho_polar(w);
  const Mat<N> hp = body.hess_rho_polar(w);
  Param<N> g;
  TangentMat<N> h;
  for (int a = 0; a < N - 1; ++a) {
    g(a) = -dp.dot(j.dY.col(a));
    for (int b = 0; b < N - 1; ++b) h(a, b) = j.dY.col(a).dot(hp * j.dY.col(b)) - dp.dot(j.d2Y[a].col(b));
  }
  return {g, h};
}

// Local minimization of u -> rho0(x - Y(u)) on one chart by damped Newton.
template <int N>
Minimizer<N> refine_on_chart(const BoundaryChart<N>& chart, int chart_id, const GaugeBody<N>& body, const Vec<N>& x,
                             Param<N> u, double seed_spacing, const ProjectionOptions& opts) {
  auto clamp = [&chart](Param<N> p) {
    for (int i = 0; i < N - 1; ++i)
      if (!chart.periodic(i)) p(i) = std::clamp(p(i), chart.lo()(i), chart.hi()(i));
    return chart.wrap(p);
  };
  auto value_at = [&](const Param<N>& p) { return body.rho_polar(x - chart.jet(p).point); };

  u = clamp(u);
  bool converged = false;
  double f = value_at(u);
  for (int it = 0; it < opts.max_newton; ++it) {
    const ChartJet<N> j = chart.jet(u);
    const Vec<N> w = x - j.point;
    if (w.isZero(0.0)) {
      converged = true;
      f = 0.0;
      break;
    }
    f = body.rho_polar(w);
    const auto [g, h] = polar_derivatives(j, body, w);
    const double gscale = j.dY.norm();
    if (g.norm() <= 1e-13 * gscale) {
      converged = true;
      break;
    }
    Param<N> step;
    Eigen::LLT<TangentMat<N>> llt(h);
    const bool newton = llt.info() == Eigen::Success && (h.diagonal().array() > 0.0).all();
    if (newton) {
      step = -llt.solve(g);
    } else {
      step = -g * (seed_spacing / std::max(g.norm(), 1e-300));
    }
    const double slope = g.dot(step);
    double a = 1.0;
    bool accepted = false;
    Param<N> next = u;
    double fn = f;
    for (int ls = 0; ls < 60; ++ls) {
      next = clamp(u + a * step);
      fn = value_at(next);
      // Close to the minimum the decrease of a full Newton step drops below
      // the rounding of f; a few ulps of slack let it finish the job.
      const double slack = newton && a == 1.0 ? 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f) : 0.0;
      if (fn <= f + 1e-4 * a * slope + slack) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) {
      // No decrease is representable: we sit at the minimum up to roundoff.
      converged = step.norm() <= 1e-6 * std::max(1.0, seed_spacing);
      break;
    }
    const double moved = (a * step).norm();
    u = next;
    f = fn;
    if (moved <= 1e-15 * (1.0 + u.norm())) {
      converged = true;
      break;
    }
  }

  if constexpr (N == 2) {
    if (!converged) {
      // Golden-section fallback on the seed bracket.
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double lo = u(0) - seed_spacing;
      double hi = u(0) + seed_spacing;
      auto fv = [&](double s) { return value_at(clamp(Param<N>(s))); };
      double c = hi - phi * (hi - lo);
      double d = lo + phi * (hi - lo);
      double fc = fv(c);
      double fd = fv(d);
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(u(0))); ++it) {
        if (fc < fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - phi * (hi - lo);
          fc = fv(c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + phi * (hi - lo);
          fd = fv(d);
        }
      }
      const Param<N> best = clamp(Param<N>(0.5 * (lo + hi)));
      const double fb = value_at(best);
      if (fb <= f) {
        u = best;
        f = fb;
      }
      converged = true;
    }
  }

  Minimizer<N> m;
  m.foot = BoundaryPoint<N>{chart_id, chart.wrap(u)};
  m.point = chart.jet(u).point;
  m.value = f;
  m.converged = converged;
  return m;
}

// All local-minimum clusters of y -> rho0(x - y) over the boundary.
template <int N>
std::vector<Minimizer<N>> minimize_polar(const Domain<N>& domain, const GaugeBody<N>& body, const Vec<N>& x,
                                         const ProjectionOptions& opts) {
  const int n = opts.seeds(N);
  std::vector<Minimizer<N>> refined;
  for (int c = 0; c < domain.chart_count(); ++c) {
    const BoundaryChart<N>& chart = domain.chart(c);
    Param<N> step;
    for (int i = 0; i < N - 1; ++i) {
      const double span = chart.hi()(i) - chart.lo()(i);
      step(i) = chart.periodic(i) ? span / n : span / (n - 1);
    }
    auto param_of = [&](int i0, int i1) {
      Param<N> u;
      u(0) = chart.lo()(0) + i0 * step(0);
      if constexpr (N == 3) u(1) = chart.lo()(1) + i1 * step(1);
      return u;
    };
    const int n1 = (N == 3) ? n : 1;
    std::vector<double> vals(static_cast<std::size_t>(n) * n1);
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        vals[static_cast<std::size_t>(i0) * n1 + i1] = body.rho_polar(x - chart.jet(param_of(i0, i1)).point);

    auto at = [&](int i0, int i1) -> std::optional<double> {
      if (chart.periodic(0)) i0 = (i0 + n) % n;
      else if (i0 < 0 || i0 >= n) return std::nullopt;
      if constexpr (N == 3) {
        if (chart.periodic(1)) i1 = (i1 + n1) % n1;
        else if (i1 < 0 || i1 >= n1) return std::nullopt;
      }
      return vals[static_cast<std::size_t>(i0) * n1 + i1];
    };

    std::vector<std::pair<double, Param<N>>> seeds;
    for (int i0 = 0; i0 < n; ++i0) {
      for (int i1 = 0; i1 < n1; ++i1) {
        const double v = *at(i0, i1);
        bool local_min = true;
        const int offsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (const auto& o : offsets) {
          if (N == 2 && o[1] != 0) continue;
          if (auto nb = at(i0 + o[0], i1 + o[1]); nb && *nb < v) {
            local_min = false;
            break;
          }
        }
        if (local_min) seeds.emplace_back(v, param_of(i0, i1));
      }
    }
    std::stable_sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (seeds.size() > static_cast<std::size_t>(opts.max_candidates)) seeds.resize(opts.max_candidates);
    const double spacing = step.maxCoeff();
    auto keep = [&](const Minimizer<N>& m) {
      // Minimizers pinned to a chart edge belong to an overlapping chart.
      if (domain.chart_count() > 1 && chart.edge_margin(m.foot.u) <= 1e-9) return;
      refined.push_back(m);
    };
    for (const auto& s : seeds) {
      Minimizer<N> m = refine_on_chart(chart, c, body, x, s.second, spacing, opts);
      // A seed sitting exactly on a symmetric saddle or maximum stalls with
      // zero gradient; restart on both sides along negative curvature.
      if (const Vec<N> w = x - m.point; !w.isZero(0.0)) {
        const auto [g, h] = polar_derivatives(chart.jet(m.foot.u), body, w);
        Eigen::SelfAdjointEigenSolver<TangentMat<N>> es(h);
        if (es.eigenvalues()(0) < 0.0) {
          const Param<N> v = es.eigenvectors().col(0);
          for (double sgn : {-1.0, 1.0})
            keep(refine_on_chart(chart, c, body, x, chart.wrap(Param<N>(m.foot.u + sgn * 1e-3 * spacing * v)), spacing,
                                 opts));
          continue;
        }
      }
      keep(m);
    }
  }
  if (refined.empty()) throw NoConvergence("projection: no interior minimizer found on any chart");

  std::stable_sort(refined.begin(), refined.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  std::vector<Minimizer<N>> clusters;
  for (const auto& m : refined) {
    bool merged = false;
    for (const auto& c : clusters) {
      if ((c.point - m.point).norm() <= opts.tol_cluster) {
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back(m);
  }
  return clusters;
}

template <int N>
ProjectionResult<N> classify(std::vector<Minimizer<N>> clusters, Side side, const ProjectionOptions& opts) {
  ProjectionResult<N> r;
  r.side = side;
  r.distance = clusters.front().value;
  r.tol_value = opts.rel_tol_value * (1.0 + r.distance);
  for (const auto& c : clusters) {
    if (c.value <= r.distance + r.tol_value) r.minimizers.push_back(c);
    else if (c.value <= r.distance + 10.0 * r.tol_value) r.near_singular = true;
  }
  r.multiplicity = static_cast<int>(r.minimizers.size());
  r.unique = r.multiplicity == 1;
  r.clusters = std::move(clusters);
  return r;
}

template <int N>
double boundary_tolerance(const Domain<N>& domain) {
  return 1e-10 * std::max(1.0, domain.box_diameter());
}

}  // namespace detail

// Projections of x on the boundary in the Minkowski distance. The exterior
// side minimizes rho0(y - x), i.e. the interior objective of the body -K.
template <int N>
ProjectionResult<N> project(const Domain<N>& domain, const GaugeBody<N>& body, const Vec<N>& x, Side side,
                            const ProjectionOptions& opts = {}) {
  if (!x.allFinite()) throw NonFiniteInput("project");
  const GaugeBody<N> objective = side == Side::interior ? body : body.reflected();
  ProjectionResult<N> r = detail::classify(detail::minimize_polar(domain, objective, x, opts), side, opts);
  if (r.distance > detail::boundary_tolerance(domain) && domain.inside(x) != (side == Side::interior)) {
    throw SideMismatch("project: point lies on the other side of the boundary");
  }
  return r;
}

// Boundary handle of a point on (or very near) the boundary, by Euclidean
// closest point.
template <int N>
BoundaryPoint<N> locate(const Domain<N>& domain, const Vec<N>& x0, const ProjectionOptions& opts = {}) {
  if (!x0.allFinite()) throw NonFiniteInput("locate");
  const auto clusters = detail::minimize_polar(domain, GaugeBody<N>::euclidean_ball(), x0, opts);
  return clusters.front().foot;
}

template <int N>
struct SignedDistanceSample {
  double value = 0.0;                   // +d inside, -d^- outside, 0 on the boundary
  std::optional<Vec<N>> gradient;       // absent at singular and near-singular points
  std::optional<Vec<N>> ray_direction;  // D rho(D d^s)
  std::vector<Vec<N>> reachable_gradients;
  ProjectionResult<N> projection;
  bool on_boundary = false;
};

template <int N>
SignedDistanceSample<N> signed_distance(const Domain<N>& domain, const GaugeBody<N>& body, const Vec<N>& x,
                                        const ProjectionOptions& opts = {}) {
  if (!x.allFinite()) throw NonFiniteInput("signed_distance");
  const Side side = domain.inside(x) ? Side::interior : Side::exterior;
  SignedDistanceSample<N> s;
  s.projection = project(domain, body, x, side, opts);
  const ProjectionResult<N>& p = s.projection;

  if (p.distance <= detail::boundary_tolerance(domain)) {
    // On the boundary the signed distance is differentiable with gradient nu / rho(nu).
    s.value = 0.0;
    s.on_boundary = true;
    const Minimizer<N>& m = p.nearest();
    const Vec<N> nu = domain.chart(m.foot.chart).eval(m.foot.u).normal;
    s.gradient = nu / body.rho(nu);
    s.ray_direction = body.grad_rho(nu);
    s.reachable_gradients = {*s.gradient};
    return s;
  }

  s.value = side == Side::interior ? p.distance : -p.distance;
  // At a minimizer D rho0(x - y) = nu / rho(nu). The normal form does not
  // amplify foot-point error by 1 / |x - y| near the boundary.
  for (const auto& m : p.minimizers) {
    const Vec<N> nu = domain.chart(m.foot.chart).eval(m.foot.u).normal;
    s.reachable_gradients.push_back(nu / body.rho(nu));
  }
  if (p.unique && !p.near_singular) {
    s.gradient = s.reachable_gradients.front();
    s.ray_direction = body.grad_rho(*s.gradient);
  }
  return s;
}

// Hessian of the distance at a boundary point, from the curvature data of
// the chart: tangential block -kappa_i delta_ij / rho(nu), mixed entries
// kappa_i <D rho(nu), e_i> / rho(nu)^2, normal entry
// -sum_i kappa_i <D rho(nu), e_i>^2 / rho(nu)^3.
template <int N>
struct BoundaryHessian {
  PrincipalFrame<N> frame;
  Mat<N> principal;  // in the basis (e_1, ..., e_{n-1}, nu)
  Mat<N> ambient;
};

template <int N>
BoundaryHessian<N> boundary_hessian(const Domain<N>& domain, const GaugeBody<N>& body, const BoundaryPoint<N>& x0) {
  const BoundaryChart<N>& chart = domain.chart(x0.chart);
  BoundaryHessian<N> out;
  out.frame = principal_frame(chart, x0.u);
  const Vec<N> nu = out.frame.normal();
  const double r = body.rho(nu);
  const Vec<N> dr = body.grad_rho(nu);
  Mat<N> m = Mat<N>::Zero();
  double corner = 0.0;
  for (int i = 0; i < N - 1; ++i) {
    const double k = out.frame.kappa(i);
    const double p = dr.dot(out.frame.direction(i));
    m(i, i) = -k / r;
    m(i, N - 1) = m(N - 1, i) = k * p / (r * r);
    corner -= k * p * p / (r * r * r);
  }
  m(N - 1, N - 1) = corner;
  out.principal = m;
  out.ambient = out.frame.basis * m * out.frame.basis.transpose();
  return out;
}

}  // namespace minkdist
