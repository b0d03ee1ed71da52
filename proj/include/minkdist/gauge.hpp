#pragma once

#include "minkdist/types.hpp"

#include <algorithm>
#include <string>

namespace minkdist {

enum class BodyFamily { euclidean_ball, ellipsoid, translated_ellipsoid };

inline std::string to_string(BodyFamily f) {
  switch (f) {
    case BodyFamily::euclidean_ball: return "euclidean_ball";
    case BodyFamily::ellipsoid: return "ellipsoid";
    case BodyFamily::translated_ellipsoid: return "translated_ellipsoid";
  }
  return "unknown";
}

// Convex body K = {p : (p - c)^T Q (p - c) <= 1} with the origin in its
// interior, described through its gauge rho(xi) = inf{t >= 0 : xi in tK} and
// polar gauge rho0(xi) = max{<xi, p> : p in K}.
//
// All three catalog families share one closed form. With
//   alpha = 1 - c^T Q c,  beta = c^T Q xi,  gamma = xi^T Q xi,
// rho(xi) is the positive root of alpha t^2 + 2 beta t - gamma = 0, and
// rho0(xi) = sqrt(xi^T Q^{-1} xi) + <c, xi>.
template <int N>
class GaugeBody {
  static_assert(N == 2 || N == 3, "GaugeBody supports dimensions 2 and 3");

 public:
  static GaugeBody euclidean_ball() {
    return GaugeBody(BodyFamily::euclidean_ball, Mat<N>::Identity(), Vec<N>::Zero());
  }

  static GaugeBody ellipsoid(const Mat<N>& q) {
    return GaugeBody(BodyFamily::ellipsoid, q, Vec<N>::Zero());
  }

  static GaugeBody translated_ellipsoid(const Mat<N>& q, const Vec<N>& c) {
    return GaugeBody(BodyFamily::translated_ellipsoid, q, c);
  }

  BodyFamily family() const { return family_; }
  const Mat<N>& shape() const { return q_; }
  const Vec<N>& center() const { return c_; }

  // c1 |xi| <= rho(xi) <= c2 |xi|.
  double c1() const { return c1_; }
  double c2() const { return c2_; }

  // The body -K. Its polar gauge is xi -> rho0(-xi), which turns the
  // exterior distance into an interior-style minimization.
  GaugeBody reflected() const {
    if (family_ != BodyFamily::translated_ellipsoid) return *this;
    return GaugeBody(family_, q_, -c_);
  }

  double rho(const Vec<N>& xi) const {
    check_finite(xi, "rho");
    if (xi.isZero(0.0)) return 0.0;
    return root(xi).t;
  }

  Vec<N> grad_rho(const Vec<N>& xi) const {
    check_nonzero(xi, "grad_rho");
    const Root r = root(xi);
    return q_ * (xi - r.t * c_) / r.s;
  }

  Mat<N> hess_rho(const Vec<N>& xi) const {
    check_nonzero(xi, "hess_rho");
    const Root r = root(xi);
    const Vec<N> g = q_ * (xi - r.t * c_) / r.s;
    const Vec<N> qc = q_ * c_;
    Mat<N> h = q_ - qc * g.transpose() - g * qc.transpose() - alpha_ * g * g.transpose();
    h /= r.s;
    return 0.5 * (h + h.transpose());
  }

  double rho_polar(const Vec<N>& xi) const {
    check_finite(xi, "rho_polar");
    if (xi.isZero(0.0)) return 0.0;
    return std::sqrt(xi.dot(qinv_ * xi)) + c_.dot(xi);
  }

  Vec<N> grad_rho_polar(const Vec<N>& xi) const {
    check_nonzero(xi, "grad_rho_polar");
    const Vec<N> qx = qinv_ * xi;
    return qx / std::sqrt(xi.dot(qx)) + c_;
  }

  Mat<N> hess_rho_polar(const Vec<N>& xi) const {
    check_nonzero(xi, "hess_rho_polar");
    const Vec<N> qx = qinv_ * xi;
    const double m = std::sqrt(xi.dot(qx));
    Mat<N> h = (qinv_ - qx * qx.transpose() / (m * m)) / m;
    return 0.5 * (h + h.transpose());
  }

 private:
  struct Root {
    double t;  // rho(xi)
    double s;  // sqrt(beta^2 + alpha gamma) = alpha t + beta > 0
  };

  GaugeBody(BodyFamily family, const Mat<N>& q, const Vec<N>& c) : family_(family), q_(q), c_(c) {
    if (!q.allFinite() || !c.allFinite()) throw InvalidBody("gauge body: non-finite parameters");
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
      throw InvalidBody("gauge body: Q must be symmetric");
    }
    q_ = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Mat<N>> eig(q_);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0)) throw InvalidBody("gauge body: Q must be positive definite");
    const double cqc = c_.dot(q_ * c_);
    if (!(cqc < 1.0)) throw InvalidBody("gauge body: origin must be interior (c^T Q c < 1)");
    qinv_ = q_.inverse();
    qinv_ = 0.5 * (qinv_ + qinv_.transpose());
    alpha_ = 1.0 - cqc;
    // A Q-ball of radius 1 - |c|_Q about the origin lies in K, and K lies in
    // the Q-ball of radius 1 + |c|_Q about the origin.
    const double cq = std::sqrt(cqc);
    const double r_in = (1.0 - cq) / std::sqrt(lmax);
    const double r_out = (1.0 + cq) / std::sqrt(lmin);
    c1_ = 1.0 / r_out;
    c2_ = 1.0 / r_in;
  }

  Root root(const Vec<N>& xi) const {
    const double beta = c_.dot(q_ * xi);
    const double gamma = xi.dot(q_ * xi);
    const double s = std::sqrt(beta * beta + alpha_ * gamma);
    // Pick the cancellation-free form of the positive root.
    const double t = beta >= 0.0 ? gamma / (beta + s) : (s - beta) / alpha_;
    return {t, s};
  }

  static void check_finite(const Vec<N>& xi, const char* where) {
    if (!xi.allFinite()) throw NonFiniteInput(where);
  }

  static void check_nonzero(const Vec<N>& xi, const char* where) {
    check_finite(xi, where);
    if (xi.isZero(0.0)) throw ZeroVector(where);
  }

  BodyFamily family_;
  Mat<N> q_;
  Vec<N> c_;
  Mat<N> qinv_;
  double alpha_ = 1.0;
  double c1_ = 1.0;
  double c2_ = 1.0;
};

// Residuals of the polar-duality identities at a single xi.
struct PolarResiduals {
  double polar_of_grad_rho;         // ||D rho0(D rho(xi)) - xi / rho(xi)||
  double grad_rho_of_grad_polar;    // ||D rho(D rho0(xi)) - xi / rho0(xi)||
  double unit_polar;                // |rho0(D rho(xi)) - 1|
  double euler;                     // |<D rho(xi), xi> - rho(xi)|
  double hessian_null;              // ||D^2 rho(xi) xi||

  double max() const {
    return std::max({polar_of_grad_rho, grad_rho_of_grad_polar, unit_polar, euler, hessian_null});
  }
};

template <int N>
PolarResiduals check_polar_identities(const GaugeBody<N>& body, const Vec<N>& xi) {
  if (!xi.allFinite()) throw NonFiniteInput("check_polar_identities");
  if (xi.isZero(0.0)) throw ZeroVector("check_polar_identities");
  const double r = body.rho(xi);
  const double r0 = body.rho_polar(xi);
  const Vec<N> g = body.grad_rho(xi);
  const Vec<N> g0 = body.grad_rho_polar(xi);
  PolarResiduals out{};
  out.polar_of_grad_rho = (body.grad_rho_polar(g) - xi / r).norm();
  out.grad_rho_of_grad_polar = (body.grad_rho(g0) - xi / r0).norm();
  out.unit_polar = std::abs(body.rho_polar(g) - 1.0);
  out.euler = std::abs(g.dot(xi) - r);
  out.hessian_null = (body.hess_rho(xi) * xi).norm();
  return out;
}

}  // namespace minkdist
