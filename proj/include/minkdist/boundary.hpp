#pragma once

#include "minkdist/types.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace minkdist {

// Y(u) with first and second derivatives. d2Y[i].col(j) = d^2 Y / du_i du_j.
template <int N>
struct ChartJet {
  Vec<N> point;
  Jacobian<N> dY;
  std::array<Jacobian<N>, N - 1> d2Y;
};

template <int N>
struct ChartSample {
  Vec<N> point;
  Jacobian<N> dY;
  std::array<Jacobian<N>, N - 1> d2Y;
  Vec<N> normal;  // inward unit normal
  double sqrt_g;  // sqrt(det(dY^T dY))
};

template <int N>
struct PrincipalCurvatures {
  TangentVec<N> kappa;     // ascending
  Jacobian<N> directions;  // unit tangent vectors, column i belongs to kappa(i)
  bool umbilic = false;
};

// Orthonormal basis (e_1, ..., e_{n-1}, nu) stored as matrix columns.
template <int N>
struct PrincipalFrame {
  Mat<N> basis;
  TangentVec<N> kappa;
  bool umbilic = false;

  Vec<N> normal() const { return basis.col(N - 1); }
  Vec<N> direction(int i) const { return basis.col(i); }
};

// A chart of the boundary: a parameter box, per-axis periodicity, and the
// member of the partition of unity attached to it.
template <int N>
class BoundaryChart {
 public:
  using MapFn = std::function<ChartJet<N>(const Param<N>&)>;
  using WeightFn = std::function<double(const Vec<N>&)>;

  BoundaryChart(MapFn map, Param<N> lo, Param<N> hi, std::array<bool, N - 1> periodic,
                double normal_sign, WeightFn weight = {})
      : map_(std::move(map)),
        lo_(lo),
        hi_(hi),
        periodic_(periodic),
        normal_sign_(normal_sign),
        weight_(std::move(weight)) {}

  const Param<N>& lo() const { return lo_; }
  const Param<N>& hi() const { return hi_; }
  bool periodic(int axis) const { return periodic_[axis]; }

  // Wraps periodic axes into [lo, hi); non-periodic axes are left alone.
  Param<N> wrap(Param<N> u) const {
    for (int i = 0; i < N - 1; ++i) {
      if (!periodic_[i]) continue;
      const double span = hi_(i) - lo_(i);
      u(i) = lo_(i) + std::fmod(std::fmod(u(i) - lo_(i), span) + span, span);
    }
    return u;
  }

  bool contains(const Param<N>& u) const {
    for (int i = 0; i < N - 1; ++i) {
      if (periodic_[i]) continue;
      if (u(i) < lo_(i) || u(i) > hi_(i)) return false;
    }
    return u.allFinite();
  }

  // Signed distance of u from the nearest non-periodic box face, in parameter
  // units (infinite for fully periodic charts).
  double edge_margin(const Param<N>& u) const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N - 1; ++i) {
      if (periodic_[i]) continue;
      m = std::min({m, u(i) - lo_(i), hi_(i) - u(i)});
    }
    return m;
  }

  ChartJet<N> jet(const Param<N>& u) const {
    if (!contains(u)) throw OutOfChart("chart parameter outside the chart box");
    return map_(wrap(u));
  }

  ChartSample<N> eval(const Param<N>& u) const {
    const ChartJet<N> j = jet(u);
    ChartSample<N> s{j.point, j.dY, j.d2Y, Vec<N>::Zero(), 0.0};
    if constexpr (N == 2) {
      const Vec<N> t = j.dY.col(0);
      s.normal = Vec<N>(-t(1), t(0)) * (normal_sign_ / t.norm());
    } else {
      const Vec<N> n = j.dY.col(0).cross(j.dY.col(1));
      s.normal = n * (normal_sign_ / n.norm());
    }
    const TangentMat<N> g = j.dY.transpose() * j.dY;
    s.sqrt_g = std::sqrt(g.determinant());
    return s;
  }

  // Partition-of-unity weight of this chart at a boundary point.
  double weight(const Vec<N>& x) const { return weight_ ? weight_(x) : 1.0; }

 private:
  MapFn map_;
  Param<N> lo_;
  Param<N> hi_;
  std::array<bool, N - 1> periodic_;
  double normal_sign_;
  WeightFn weight_;
};

// Euclidean curvature data from the second fundamental form. Sign convention:
// II_ij = <d2Y_ij, nu> with nu inward, so a disk has kappa = +1.
template <int N>
PrincipalCurvatures<N> principal_curvatures(const BoundaryChart<N>& chart, const Param<N>& u) {
  const ChartSample<N> s = chart.eval(u);
  TangentMat<N> g = s.dY.transpose() * s.dY;
  TangentMat<N> second;
  for (int i = 0; i < N - 1; ++i)
    for (int k = 0; k < N - 1; ++k) second(i, k) = s.d2Y[i].col(k).dot(s.normal);
  second = 0.5 * (second + second.transpose());

  PrincipalCurvatures<N> out;
  if constexpr (N == 2) {
    out.kappa(0) = second(0, 0) / g(0, 0);
    out.directions.col(0) = s.dY.col(0).normalized();
    out.umbilic = false;
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<TangentMat<N>> es(second, g);
    out.kappa = es.eigenvalues();
    const double scale = std::max(1.0, out.kappa.cwiseAbs().maxCoeff());
    out.umbilic = std::abs(out.kappa(1) - out.kappa(0)) <= 1e-9 * scale;
    if (out.umbilic) {
      // Deterministic Gram-Schmidt against the chart axes.
      const Vec<N> e1 = s.dY.col(0).normalized();
      const Vec<N> e2 = (s.dY.col(1) - s.dY.col(1).dot(e1) * e1).normalized();
      out.directions.col(0) = e1;
      out.directions.col(1) = e2;
    } else {
      for (int i = 0; i < N - 1; ++i) out.directions.col(i) = (s.dY * es.eigenvectors().col(i)).normalized();
    }
  }
  return out;
}

// Principal directions completed by the inward normal, right-handed.
template <int N>
PrincipalFrame<N> principal_frame(const BoundaryChart<N>& chart, const Param<N>& u) {
  const ChartSample<N> s = chart.eval(u);
  const PrincipalCurvatures<N> pc = principal_curvatures(chart, u);
  PrincipalFrame<N> f;
  for (int i = 0; i < N - 1; ++i) f.basis.col(i) = pc.directions.col(i);
  f.basis.col(N - 1) = s.normal;
  if (f.basis.determinant() < 0.0) f.basis.col(0) = -f.basis.col(0);
  f.kappa = pc.kappa;
  f.umbilic = pc.umbilic;
  return f;
}

enum class DomainFamily { ellipse, fourier_star, ellipsoid };

inline std::string to_string(DomainFamily f) {
  switch (f) {
    case DomainFamily::ellipse: return "ellipse";
    case DomainFamily::fourier_star: return "fourier_star";
    case DomainFamily::ellipsoid: return "ellipsoid";
  }
  return "unknown";
}

namespace detail {

// C-infinity step: 0 below lo, 1 above hi.
inline double smooth_step(double q, double lo, double hi) {
  auto e = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = e(q - lo);
  const double b = e(hi - q);
  return a + b > 0.0 ? a / (a + b) : 0.0;
}

// Radial function of a Fourier star, coefficients [a0, a1, b1, a2, b2, ...].
struct FourierRadius {
  std::vector<double> coeffs;

  std::array<double, 3> operator()(double theta) const {
    double r = coeffs.empty() ? 0.0 : coeffs[0];
    double dr = 0.0;
    double d2r = 0.0;
    for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
      const double a = coeffs[2 * k - 1];
      const double b = 2 * k < coeffs.size() ? coeffs[2 * k] : 0.0;
      const double kk = static_cast<double>(k);
      const double c = std::cos(kk * theta);
      const double s = std::sin(kk * theta);
      r += a * c + b * s;
      dr += kk * (-a * s + b * c);
      d2r += -kk * kk * (a * c + b * s);
    }
    return {r, dr, d2r};
  }
};

}  // namespace detail

// Bounded C^2 domain described by boundary charts covering its boundary.
template <int N>
class Domain {
  static_assert(N == 2 || N == 3, "Domain supports dimensions 2 and 3");

 public:
  using InsideFn = std::function<bool(const Vec<N>&)>;

  DomainFamily family() const { return family_; }
  const std::vector<double>& parameters() const { return params_; }
  const std::vector<BoundaryChart<N>>& charts() const { return charts_; }
  const BoundaryChart<N>& chart(int i) const { return charts_.at(static_cast<std::size_t>(i)); }
  int chart_count() const { return static_cast<int>(charts_.size()); }

  bool inside(const Vec<N>& x) const { return inside_(x); }

  // Axis-aligned bounding box of the closed domain.
  const Vec<N>& box_lo() const { return lo_; }
  const Vec<N>& box_hi() const { return hi_; }
  double box_diameter() const { return (hi_ - lo_).norm(); }

  static Domain ellipse(double a, double b)
    requires(N == 2)
  {
    if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
      throw InvalidDomain("ellipse: semi-axes must be positive and finite");
    Domain d;
    d.family_ = DomainFamily::ellipse;
    d.params_ = {a, b};
    auto map = [a, b](const Param<2>& u) {
      const double c = std::cos(u(0));
      const double s = std::sin(u(0));
      ChartJet<2> j;
      j.point = Vec<2>(a * c, b * s);
      j.dY.col(0) = Vec<2>(-a * s, b * c);
      j.d2Y[0].col(0) = Vec<2>(-a * c, -b * s);
      return j;
    };
    d.charts_.emplace_back(map, Param<2>(0.0), Param<2>(2.0 * std::numbers::pi), std::array<bool, 1>{true}, 1.0);
    d.inside_ = [a, b](const Vec<2>& x) { return sqr(x(0) / a) + sqr(x(1) / b) < 1.0; };
    d.lo_ = Vec<2>(-a, -b);
    d.hi_ = Vec<2>(a, b);
    return d;
  }

  // Star-shaped domain r(theta) = a0 + sum_k (a_k cos k theta + b_k sin k theta),
  // coefficients passed as [a0, a1, b1, a2, b2, ...].
  static Domain fourier_star(std::vector<double> coeffs)
    requires(N == 2)
  {
    if (coeffs.empty()) throw InvalidDomain("fourier_star: empty coefficient list");
    for (double c : coeffs)
      if (!std::isfinite(c)) throw InvalidDomain("fourier_star: non-finite coefficient");
    const detail::FourierRadius radius{coeffs};
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    constexpr int kSamples = 4096;
    for (int i = 0; i < kSamples; ++i) {
      const double r = radius(2.0 * std::numbers::pi * i / kSamples)[0];
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    if (!(rmin > 0.0)) throw InvalidDomain("fourier_star: radial function must stay positive");
    Domain d;
    d.family_ = DomainFamily::fourier_star;
    d.params_ = coeffs;
    auto map = [radius](const Param<2>& u) {
      const auto [r, dr, d2r] = radius(u(0));
      const double c = std::cos(u(0));
      const double s = std::sin(u(0));
      ChartJet<2> j;
      j.point = Vec<2>(r * c, r * s);
      j.dY.col(0) = Vec<2>(dr * c - r * s, dr * s + r * c);
      j.d2Y[0].col(0) = Vec<2>((d2r - r) * c - 2.0 * dr * s, (d2r - r) * s + 2.0 * dr * c);
      return j;
    };
    d.charts_.emplace_back(map, Param<2>(0.0), Param<2>(2.0 * std::numbers::pi), std::array<bool, 1>{true}, 1.0);
    d.inside_ = [radius](const Vec<2>& x) {
      const double rx = x.norm();
      if (rx == 0.0) return true;
      return rx < radius(std::atan2(x(1), x(0)))[0];
    };
    // The dense sample maximum undershoots by at most O(h^2); pad generously.
    const double pad = 1.01 * rmax;
    d.lo_ = Vec<2>(-pad, -pad);
    d.hi_ = Vec<2>(pad, pad);
    return d;
  }

  // Ellipsoid with semi-axes (a, b, c), covered by two spherical-coordinate
  // charts with poles on the z and x axes. Their overlap carries a smooth
  // partition of unity.
  static Domain ellipsoid(double a, double b, double c)
    requires(N == 3)
  {
    if (!(a > 0.0 && b > 0.0 && c > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
      throw InvalidDomain("ellipsoid: semi-axes must be positive and finite");
    Domain d;
    d.family_ = DomainFamily::ellipsoid;
    d.params_ = {a, b, c};
    constexpr double kThetaMin = 0.15;
    constexpr double kWeightLo = 0.03;
    constexpr double kWeightHi = 0.97;
    // Weight of the z-pole chart vanishes near the z poles, and symmetrically.
    auto psi_z = [c](const Vec<3>& x) { return detail::smooth_step(1.0 - sqr(x(2) / c), kWeightLo, kWeightHi); };
    auto psi_x = [a](const Vec<3>& x) { return detail::smooth_step(1.0 - sqr(x(0) / a), kWeightLo, kWeightHi); };
    // Spherical chart with semi-axes (p, q, r) mapped onto coordinates
    // (i0, i1, i2): point = (p sin t cos f, q sin t sin f, r cos t).
    auto make_map = [](double p, double q, double r, std::array<int, 3> axes) {
      return [p, q, r, axes](const Param<3>& u) {
        const double st = std::sin(u(0));
        const double ct = std::cos(u(0));
        const double sf = std::sin(u(1));
        const double cf = std::cos(u(1));
        const Vec<3> y(p * st * cf, q * st * sf, r * ct);
        const Vec<3> yt(p * ct * cf, q * ct * sf, -r * st);
        const Vec<3> yf(-p * st * sf, q * st * cf, 0.0);
        const Vec<3> ytt(-p * st * cf, -q * st * sf, -r * ct);
        const Vec<3> ytf(-p * ct * sf, q * ct * cf, 0.0);
        const Vec<3> yff(-p * st * cf, -q * st * sf, 0.0);
        auto place = [&axes](const Vec<3>& v) {
          Vec<3> out;
          for (int k = 0; k < 3; ++k) out(axes[k]) = v(k);
          return out;
        };
        ChartJet<3> j;
        j.point = place(y);
        j.dY.col(0) = place(yt);
        j.dY.col(1) = place(yf);
        j.d2Y[0].col(0) = place(ytt);
        j.d2Y[0].col(1) = place(ytf);
        j.d2Y[1].col(0) = place(ytf);
        j.d2Y[1].col(1) = place(yff);
        return j;
      };
    };
    const Param<3> lo(kThetaMin, 0.0);
    const Param<3> hi(std::numbers::pi - kThetaMin, 2.0 * std::numbers::pi);
    // Both charts are orientation-preserving relabelings of the standard
    // spherical chart, whose dY_t x dY_f points outward.
    d.charts_.emplace_back(make_map(a, b, c, {0, 1, 2}), lo, hi, std::array<bool, 2>{false, true}, -1.0,
                           [psi_z, psi_x](const Vec<3>& x) {
                             const double wz = psi_z(x);
                             return wz / (wz + psi_x(x));
                           });
    d.charts_.emplace_back(make_map(b, c, a, {1, 2, 0}), lo, hi, std::array<bool, 2>{false, true}, -1.0,
                           [psi_z, psi_x](const Vec<3>& x) {
                             const double wx = psi_x(x);
                             return wx / (psi_z(x) + wx);
                           });
    d.inside_ = [a, b, c](const Vec<3>& x) { return sqr(x(0) / a) + sqr(x(1) / b) + sqr(x(2) / c) < 1.0; };
    d.lo_ = Vec<3>(-a, -b, -c);
    d.hi_ = Vec<3>(a, b, c);
    return d;
  }

 private:
  Domain() = default;

  DomainFamily family_ = DomainFamily::ellipse;
  std::vector<double> params_;
  std::vector<BoundaryChart<N>> charts_;
  InsideFn inside_;
  Vec<N> lo_ = Vec<N>::Zero();
  Vec<N> hi_ = Vec<N>::Zero();
};

// Chart index plus parameter: a handle on a boundary point.
template <int N>
struct BoundaryPoint {
  int chart = 0;
  Param<N> u = Param<N>::Zero();
};

}  // namespace minkdist
