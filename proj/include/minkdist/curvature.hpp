#pragma once

#include "minkdist/boundary.hpp"
#include "minkdist/distance.hpp"
#include "minkdist/gauge.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace minkdist {

// Anisotropic Weingarten data at a boundary point, expressed in the
// principal frame (e_1, ..., e_{n-1}, nu):
//   Dmat = diag(-kappa_i)
//   Rmat = tangential block of D^2 rho(nu)
//   Hmat = tangential block of D^2 rho0(D rho(nu))
//   Wbar = -Rmat Dmat, whose eigenvalues are the principal rho-curvatures.
// The rho-curvatures solve (-Dmat) v = lambda rho(nu) Hmat v, a
// symmetric-definite pencil, so they are real by construction.
template <int N>
struct CurvatureFrame {
  BoundaryPoint<N> foot;
  Vec<N> x0;
  PrincipalFrame<N> frame;
  Vec<N> nu;
  double rho_nu = 1.0;
  Vec<N> grad_rho_nu;  // inward rho-normal D rho(nu)
  TangentMat<N> Dmat;
  TangentMat<N> Rmat;
  TangentMat<N> Hmat;
  TangentMat<N> Wbar;
  TangentVec<N> kappas;           // ascending
  TangentMat<N> local_directions;  // eigenvectors in frame coordinates (columns)
  Jacobian<N> directions;         // unit ambient rho-directions

  Jacobian<N> tangent_basis() const { return frame.basis.template leftCols<N - 1>(); }
  double max_kappa() const { return kappas(N - 2); }
  double min_kappa() const { return kappas(0); }
};

namespace detail {

// Unit length, first non-negligible component positive.
template <int N>
Vec<N> canonical_direction(Vec<N> v) {
  v.normalize();
  for (int i = 0; i < N; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace detail

template <int N>
CurvatureFrame<N> curvature_frame(const Domain<N>& domain, const GaugeBody<N>& body, const BoundaryPoint<N>& x0) {
  const BoundaryChart<N>& chart = domain.chart(x0.chart);
  CurvatureFrame<N> cf;
  cf.foot = x0;
  cf.x0 = chart.eval(x0.u).point;
  cf.frame = principal_frame(chart, x0.u);
  cf.nu = cf.frame.normal();
  cf.rho_nu = body.rho(cf.nu);
  cf.grad_rho_nu = body.grad_rho(cf.nu);

  const Jacobian<N> e = cf.tangent_basis();
  cf.Dmat = TangentMat<N>::Zero();
  for (int i = 0; i < N - 1; ++i) cf.Dmat(i, i) = -cf.frame.kappa(i);
  cf.Rmat = e.transpose() * body.hess_rho(cf.nu) * e;
  cf.Hmat = e.transpose() * body.hess_rho_polar(cf.grad_rho_nu) * e;
  cf.Rmat = 0.5 * (cf.Rmat + cf.Rmat.transpose()).eval();
  cf.Hmat = 0.5 * (cf.Hmat + cf.Hmat.transpose()).eval();
  cf.Wbar = -cf.Rmat * cf.Dmat;

  const TangentMat<N> a = -cf.Dmat;
  const TangentMat<N> b = cf.rho_nu * cf.Hmat;
  if constexpr (N == 2) {
    cf.kappas(0) = a(0, 0) / b(0, 0);
    cf.local_directions(0, 0) = 1.0;
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<TangentMat<N>> es(a, b);
    cf.kappas = es.eigenvalues();
    cf.local_directions = es.eigenvectors();
  }
  for (int i = 0; i < N - 1; ++i) {
    cf.local_directions.col(i).normalize();
    cf.directions.col(i) = detail::canonical_direction<N>(e * cf.local_directions.col(i));
  }
  return cf;
}

// Normal rho-curvature along a tangent direction v (ambient coordinates):
// kappa(v) = -<D w, w> / <rho(nu) H w, w>, w the frame coordinates of v.
template <int N>
double normal_rho_curvature(const CurvatureFrame<N>& cf, const Vec<N>& v) {
  if (!v.allFinite()) throw NonFiniteInput("normal_rho_curvature");
  const double len = v.norm();
  if (len == 0.0) throw ZeroVector("normal_rho_curvature");
  if (std::abs(v.dot(cf.nu)) > 1e-8 * len) throw NonTangent("normal_rho_curvature: vector is not tangent");
  const TangentVec<N> w = cf.tangent_basis().transpose() * v;
  return -w.dot(cf.Dmat * w) / (cf.rho_nu * w.dot(cf.Hmat * w));
}

// Distances 1/kappa_i of the focal points along the rho-normal ray, for the
// positive rho-curvatures, ascending.
template <int N>
std::vector<double> focal_values(const CurvatureFrame<N>& cf) {
  std::vector<double> out;
  for (int i = 0; i < N - 1; ++i)
    if (cf.kappas(i) > 0.0) out.push_back(1.0 / cf.kappas(i));
  std::sort(out.begin(), out.end());
  return out;
}

template <int N>
double first_focal(const CurvatureFrame<N>& cf) {
  return cf.max_kappa() > 0.0 ? 1.0 / cf.max_kappa() : std::numeric_limits<double>::infinity();
}

// prod_i (1 - t kappa_i).
template <int N>
double jacobian_factor(const CurvatureFrame<N>& cf, double t) {
  double p = 1.0;
  for (int i = 0; i < N - 1; ++i) p *= 1.0 - t * cf.kappas(i);
  return p;
}

// det(I - t Wbar), the determinant route to the same factor.
template <int N>
double jacobian_factor_det(const CurvatureFrame<N>& cf, double t) {
  return (TangentMat<N>::Identity() - t * cf.Wbar).determinant();
}

// Full n x n map W = -D^2 rho(D d) D^2 d at a boundary point, ambient
// coordinates, with D d = nu / rho(nu).
template <int N>
Mat<N> full_weingarten(const Domain<N>& domain, const GaugeBody<N>& body, const BoundaryPoint<N>& x0) {
  const BoundaryHessian<N> bh = boundary_hessian(domain, body, x0);
  const Vec<N> nu = bh.frame.normal();
  const Vec<N> grad_d = nu / body.rho(nu);
  return -body.hess_rho(grad_d) * bh.ambient;
}

}  // namespace minkdist
