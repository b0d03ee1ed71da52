#pragma once

#include "minkdist/curvature.hpp"
#include "minkdist/cutlocus.hpp"
#include "minkdist/parallel.hpp"
#include "minkdist/quadrature.hpp"

#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace minkdist {

struct RayQuadratureOptions {
  int boundary_resolution = 256;
  int ray_order = 16;
  CutOptions cut;
};

// One boundary node of the normal-ray rule: the foot x0 with its boundary
// weight (quadrature weight * sqrt(g) * rho(nu) * partition weight), the
// curvature data, the cut value, and a Gauss rule on [0, l - tol_cut].
template <int N>
struct RayNode {
  CurvatureFrame<N> frame;
  RayRecord<N> ray;
  double weight = 0.0;
  double upper = 0.0;
  QuadratureRule rule;

  const Vec<N>& x0() const { return frame.x0; }
  const Vec<N>& direction() const { return frame.grad_rho_nu; }
  Vec<N> point(double t) const { return frame.x0 + t * frame.grad_rho_nu; }
  double jacobian(double t) const { return jacobian_factor(frame, t); }
};

// Quadrature over the domain through the map (x0, t) -> x0 + t D rho(nu(x0)),
// 0 < t < l(x0), whose volume element is rho(nu) prod(1 - t kappa_i) dt dH.
template <int N>
class RayQuadrature {
 public:
  static RayQuadrature build(const Domain<N>& domain, const GaugeBody<N>& body, const RayQuadratureOptions& opts) {
    if (opts.boundary_resolution < 8) throw Error("ray quadrature: boundary resolution too small");
    if (opts.ray_order < 1) throw Error("ray quadrature: ray order must be positive");
    struct Seed {
      BoundaryPoint<N> foot;
      double w;
    };
    std::vector<Seed> seeds;
    const int m = opts.boundary_resolution;
    for (int c = 0; c < domain.chart_count(); ++c) {
      const BoundaryChart<N>& chart = domain.chart(c);
      if constexpr (N == 2) {
        // Periodic trapezoid rule.
        const double span = chart.hi()(0) - chart.lo()(0);
        for (int k = 0; k < m; ++k) seeds.push_back({{c, Param<2>(chart.lo()(0) + span * k / m)}, span / m});
      } else {
        const QuadratureRule gt = gauss_legendre(std::max(2, m / 2), chart.lo()(0), chart.hi()(0));
        const double span = chart.hi()(1) - chart.lo()(1);
        for (std::size_t i = 0; i < gt.nodes.size(); ++i)
          for (int k = 0; k < m; ++k)
            seeds.push_back({{c, Param<3>(gt.nodes[i], chart.lo()(1) + span * k / m)}, gt.weights[i] * span / m});
      }
    }

    RayQuadrature q;
    q.order_ = opts.ray_order;
    auto nodes = parallel_map<std::optional<RayNode<N>>>(seeds.size(), [&](std::size_t i) -> std::optional<RayNode<N>> {
      const BoundaryChart<N>& chart = domain.chart(seeds[i].foot.chart);
      const ChartSample<N> s = chart.eval(seeds[i].foot.u);
      const double pu = chart.weight(s.point);
      if (pu <= 0.0) return std::nullopt;
      RayNode<N> node;
      node.frame = curvature_frame(domain, body, seeds[i].foot);
      node.ray = cut_value(domain, body, node.frame, opts.cut);
      node.weight = seeds[i].w * s.sqrt_g * node.frame.rho_nu * pu;
      node.upper = std::max(0.0, node.ray.l - node.ray.tol_cut);
      node.rule = gauss_legendre(opts.ray_order, 0.0, node.upper);
      return node;
    });
    for (auto& n : nodes)
      if (n) q.nodes_.push_back(std::move(*n));
    q.min_jacobian_ = std::numeric_limits<double>::infinity();
    for (const auto& n : q.nodes_)
      for (double t : n.rule.nodes) q.min_jacobian_ = std::min(q.min_jacobian_, n.jacobian(t));
    return q;
  }

  const std::vector<RayNode<N>>& nodes() const { return nodes_; }
  int ray_order() const { return order_; }

  // Smallest prod(1 - t kappa_i) over all ray nodes.
  double min_jacobian() const { return min_jacobian_; }

  // Integral of h(x) over the domain.
  template <typename H>
  double integrate(H&& h) const {
    return integrate_along([&h](const RayNode<N>& node, double t) { return h(node.point(t)); });
  }

  // Integral of h(node, t) with the ray structure exposed to the integrand.
  template <typename H>
  double integrate_along(H&& h) const {
    std::vector<double> per_node = parallel_map<double>(nodes_.size(), [&](std::size_t i) {
      const RayNode<N>& node = nodes_[i];
      double s = 0.0;
      for (std::size_t j = 0; j < node.rule.nodes.size(); ++j) {
        const double t = node.rule.nodes[j];
        s += node.rule.weights[j] * h(node, t) * node.jacobian(t);
      }
      return node.weight * s;
    });
    return pairwise_sum(per_node);
  }

  // Same, restricted per ray to the parameter window returned by
  // window(node) -> std::pair<double, double>, with a fresh Gauss rule on the
  // clipped window. Used when h is supported on a set the rays cross
  // transversally, so the rule never straddles the support edge.
  template <typename H, typename W>
  double integrate_windowed(H&& h, W&& window) const {
    std::vector<double> per_node = parallel_map<double>(nodes_.size(), [&](std::size_t i) {
      const RayNode<N>& node = nodes_[i];
      const auto [a0, b0] = window(node);
      const double a = std::max(0.0, a0);
      const double b = std::min(node.upper, b0);
      if (!(b > a)) return 0.0;
      const QuadratureRule r = gauss_legendre(order_, a, b);
      double s = 0.0;
      for (std::size_t j = 0; j < r.nodes.size(); ++j) s += r.weights[j] * h(node, r.nodes[j]) * node.jacobian(r.nodes[j]);
      return node.weight * s;
    });
    return pairwise_sum(per_node);
  }

 private:
  std::vector<RayNode<N>> nodes_;
  int order_ = 0;
  double min_jacobian_ = 0.0;
};

// Midpoint rule on a tensor grid over the bounding box, inside cells only.
template <int N, typename H>
double grid_integral(const Domain<N>& domain, H&& h, int resolution) {
  if (resolution < 2) throw Error("grid_integral: resolution too small");
  const Vec<N> lo = domain.box_lo();
  const Vec<N> cell = (domain.box_hi() - lo) / resolution;
  const std::size_t rows = static_cast<std::size_t>(resolution);
  const std::size_t per_row = N == 2 ? rows : rows * rows;
  std::vector<double> partial = parallel_map<double>(rows, [&](std::size_t i) {
    std::vector<double> vals;
    vals.reserve(per_row);
    for (std::size_t k = 0; k < per_row; ++k) {
      Vec<N> x;
      x(0) = lo(0) + (i + 0.5) * cell(0);
      if constexpr (N == 2) {
        x(1) = lo(1) + (k + 0.5) * cell(1);
      } else {
        x(1) = lo(1) + (k / rows + 0.5) * cell(1);
        x(2) = lo(2) + (k % rows + 0.5) * cell(2);
      }
      vals.push_back(domain.inside(x) ? h(x) : 0.0);
    }
    return pairwise_sum(vals);
  });
  return pairwise_sum(partial) * cell.prod();
}

// Plain Monte-Carlo over the bounding box.
template <int N, typename H>
double monte_carlo_integral(const Domain<N>& domain, H&& h, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec<N> lo = domain.box_lo();
  const Vec<N> span = domain.box_hi() - lo;
  std::vector<double> vals(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    Vec<N> x;
    for (int k = 0; k < N; ++k) x(k) = lo(k) + span(k) * unit(rng);
    vals[i] = domain.inside(x) ? h(x) : 0.0;
  }
  return samples ? pairwise_sum(vals) * span.prod() / static_cast<double>(samples) : 0.0;
}

struct IntegrationReport {
  double ray = 0.0;
  double grid = 0.0;
  std::optional<double> monte_carlo;
  double min_jacobian = 0.0;

  double gap() const { return std::abs(ray - grid); }
};

template <int N, typename H>
IntegrationReport integrate_ray(const Domain<N>& domain, const GaugeBody<N>& body, H&& h,
                                const RayQuadratureOptions& opts, int grid_resolution,
                                std::size_t mc_samples = 0, std::uint64_t seed = 0) {
  if (opts.boundary_resolution < 64 || opts.ray_order < 8)
    throw Error("integrate_ray: resolutions must be at least (64, 8)");
  const RayQuadrature<N> q = RayQuadrature<N>::build(domain, body, opts);
  IntegrationReport r;
  r.ray = q.integrate(h);
  r.min_jacobian = q.min_jacobian();
  r.grid = grid_integral(domain, h, grid_resolution);
  if (mc_samples > 0) r.monte_carlo = monte_carlo_integral(domain, h, mc_samples, seed);
  return r;
}

// Same, for h supported in a known window along each ray (node -> [a, b]).
// Gauss rules that straddle the edge of the support lose their accuracy.
template <int N, typename H, typename W>
IntegrationReport integrate_ray_windowed(const Domain<N>& domain, const GaugeBody<N>& body, H&& h, W&& window,
                                         const RayQuadratureOptions& opts, int grid_resolution,
                                         std::size_t mc_samples = 0, std::uint64_t seed = 0) {
  if (opts.boundary_resolution < 64 || opts.ray_order < 8)
    throw Error("integrate_ray: resolutions must be at least (64, 8)");
  const RayQuadrature<N> q = RayQuadrature<N>::build(domain, body, opts);
  IntegrationReport r;
  r.ray = q.integrate_windowed([&h](const RayNode<N>& node, double t) { return h(node.point(t)); }, window);
  r.min_jacobian = q.min_jacobian();
  r.grid = grid_integral(domain, h, grid_resolution);
  if (mc_samples > 0) r.monte_carlo = monte_carlo_integral(domain, h, mc_samples, seed);
  return r;
}

// ---------------------------------------------------------------------------
// Transport density

template <int N>
using SourceFn = std::function<double(const Vec<N>&)>;

struct TransportOptions {
  int ray_order = 32;
  CutOptions cut;
};

// v_f along a ray in boundary parametrization: with x = x0 + t D rho(nu),
//   v_f(x) = int_t^upper f(x0 + s D rho(nu)) prod (1 - s k_i) / (1 - t k_i) ds.
template <int N>
double transport_on_ray(const RayNode<N>& node, double t, const SourceFn<N>& f, int order) {
  if (t >= node.upper) return 0.0;
  const QuadratureRule r = gauss_legendre(order, t, node.upper);
  const double base = node.jacobian(t);
  double s = 0.0;
  for (std::size_t j = 0; j < r.nodes.size(); ++j) s += r.weights[j] * f(node.point(r.nodes[j])) * node.jacobian(r.nodes[j]);
  return s / base;
}

template <int N>
struct TransportSample {
  double value = 0.0;
  double distance = 0.0;
  double tau = 0.0;
  bool singular = false;
};

// v_f(x) = int_0^tau(x) f(x0 + (d + t) D rho(nu)) prod (1 - (d + t) k_i) / (1 - d k_i) dt
// with x0 the projection of x, d = d(x), and zero on the (near-)singular set.
template <int N>
TransportSample<N> transport_sample(const Domain<N>& domain, const GaugeBody<N>& body, const SourceFn<N>& f,
                                    const Vec<N>& x, const TransportOptions& opts = {}) {
  const SignedDistanceSample<N> s = signed_distance(domain, body, x, opts.cut.projection);
  if (s.value < 0.0) throw SideMismatch("transport_density: point lies outside the domain");
  TransportSample<N> out;
  out.distance = s.value;
  if (!s.gradient) {
    out.singular = true;
    return out;
  }
  const CurvatureFrame<N> cf = curvature_frame(domain, body, s.projection.nearest().foot);
  const RayRecord<N> rec = cut_value(domain, body, cf, opts.cut);
  const double d = s.value;
  out.tau = std::max(0.0, rec.l - d);
  if (out.tau <= 0.0) return out;
  const QuadratureRule r = gauss_legendre(opts.ray_order, 0.0, out.tau);
  const double base = jacobian_factor(cf, d);
  double sum = 0.0;
  for (std::size_t j = 0; j < r.nodes.size(); ++j) {
    const double t = r.nodes[j];
    const Vec<N> y = cf.x0 + (d + t) * cf.grad_rho_nu;
    const double fv = f(y);
    if (fv < 0.0) throw Error("transport_density: source must be non-negative");
    sum += r.weights[j] * fv * jacobian_factor(cf, d + t);
  }
  out.value = sum / base;
  return out;
}

template <int N>
double transport_density(const Domain<N>& domain, const GaugeBody<N>& body, const SourceFn<N>& f, const Vec<N>& x,
                         const TransportOptions& opts = {}) {
  return transport_sample(domain, body, f, x, opts).value;
}

// v_f together with the constants of its a-priori bound
//   v_f(x) <= sup f * tau(x) * (1 + T K_-)^(n-1),
// T = max l over the boundary, K_- = max negative part of the rho-curvatures.
template <int N>
class TransportField {
 public:
  TransportField(Domain<N> domain, GaugeBody<N> body, SourceFn<N> f, TransportOptions opts = {},
                 int boundary_resolution = 256)
      : domain_(std::move(domain)), body_(std::move(body)), f_(std::move(f)), opts_(opts) {
    const std::vector<BoundaryPoint<N>> feet = boundary_sample(domain_, boundary_resolution);
    struct Pair {
      double l;
      double kneg;
    };
    const auto vals = parallel_map<Pair>(feet.size(), [&](std::size_t i) {
      const CurvatureFrame<N> cf = curvature_frame(domain_, body_, feet[i]);
      const RayRecord<N> r = cut_value(domain_, body_, cf, opts_.cut);
      return Pair{r.l, std::max(0.0, -cf.min_kappa())};
    });
    for (const auto& v : vals) {
      max_l_ = std::max(max_l_, v.l);
      max_kneg_ = std::max(max_kneg_, v.kneg);
    }
  }

  TransportSample<N> sample(const Vec<N>& x) const { return transport_sample(domain_, body_, f_, x, opts_); }
  double operator()(const Vec<N>& x) const { return sample(x).value; }

  double max_cut() const { return max_l_; }
  double max_negative_kappa() const { return max_kneg_; }

  double bound(double f_sup, double tau_x) const { return f_sup * tau_x * std::pow(1.0 + max_l_ * max_kneg_, N - 1); }

 private:
  Domain<N> domain_;
  GaugeBody<N> body_;
  SourceFn<N> f_;
  TransportOptions opts_;
  double max_l_ = 0.0;
  double max_kneg_ = 0.0;
};

// phi(x) = (1 - |x - c|^2 / r^2)^3 on the ball of radius r, zero outside.
template <int N>
struct Bump {
  Vec<N> center;
  double radius = 1.0;

  double value(const Vec<N>& x) const {
    const double q = (x - center).squaredNorm() / (radius * radius);
    return q < 1.0 ? std::pow(1.0 - q, 3) : 0.0;
  }

  // Parameter window where x0 + t dir lies in the support ball (empty when a >= b).
  std::pair<double, double> ray_window(const Vec<N>& x0, const Vec<N>& dir) const {
    const Vec<N> w = x0 - center;
    const double a = dir.squaredNorm();
    const double b = w.dot(dir);
    const double disc = b * b - a * (w.squaredNorm() - radius * radius);
    if (disc <= 0.0) return {0.0, 0.0};
    const double s = std::sqrt(disc);
    return {(-b - s) / a, (-b + s) / a};
  }

  Vec<N> gradient(const Vec<N>& x) const {
    const double q = (x - center).squaredNorm() / (radius * radius);
    if (q >= 1.0) return Vec<N>::Zero();
    return -6.0 * sqr(1.0 - q) * (x - center) / (radius * radius);
  }
};

struct WeakResidual {
  double transport_term = 0.0;  // int v_f <D rho(D d), D phi>
  double source_term = 0.0;     // int f phi
  double residual = 0.0;

  double relative() const { return source_term != 0.0 ? std::abs(residual) / std::abs(source_term) : std::abs(residual); }
};

// Residuals of the weak form of -div(v_f D rho(D d)) = f against bump test
// functions. Supports must keep two grid cells of clearance from the boundary.
template <int N>
std::vector<WeakResidual> weak_residual(const Domain<N>& domain, const RayQuadrature<N>& q, const SourceFn<N>& f,
                                        const std::vector<Bump<N>>& tests, int grid_resolution) {
  const double cell = (domain.box_hi() - domain.box_lo()).maxCoeff() / grid_resolution;
  for (const auto& b : tests) {
    if (!domain.inside(b.center)) throw SupportViolation("weak_residual: bump center outside the domain");
    for (const auto& bp : boundary_sample(domain, 256)) {
      const Vec<N> y = domain.chart(bp.chart).eval(bp.u).point;
      if ((y - b.center).norm() < b.radius + 2.0 * cell)
        throw SupportViolation("weak_residual: bump support within two grid cells of the boundary");
    }
  }
  std::vector<WeakResidual> out;
  for (const auto& b : tests) {
    WeakResidual r;
    auto window = [&b](const RayNode<N>& node) { return b.ray_window(node.x0(), node.direction()); };
    r.source_term = q.integrate_windowed(
        [&](const RayNode<N>& node, double t) {
          const Vec<N> x = node.point(t);
          return f(x) * b.value(x);
        },
        window);
    r.transport_term = q.integrate_windowed([&](const RayNode<N>& node, double t) {
      const Vec<N> x = node.point(t);
      const double slope = node.direction().dot(b.gradient(x));
      if (slope == 0.0) return 0.0;
      return transport_on_ray(node, t, f, q.ray_order()) * slope;
    }, window);
    r.residual = r.transport_term - r.source_term;
    out.push_back(r);
  }
  return out;
}

}  // namespace minkdist
