#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace minkdist;
using oracle::pi;

namespace {

Vec<2> random_vec2(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec<2>(n(rng), n(rng));
}

Vec<3> random_vec3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec<3>(n(rng), n(rng), n(rng));
}

template <int N>
Vec<N> random_vec(std::mt19937_64& rng) {
  if constexpr (N == 2) return random_vec2(rng);
  else return random_vec3(rng);
}

template <int N>
std::vector<oracle::NamedBody<N>> catalog() {
  if constexpr (N == 2) return oracle::bodies2();
  else return oracle::bodies3();
}

}  // namespace

TEST(Gauge, EuclideanValues) {
  const auto b = GaugeBody<2>::euclidean_ball();
  EXPECT_DOUBLE_EQ(b.rho(Vec<2>(3, 4)), 5.0);
  EXPECT_DOUBLE_EQ(b.rho_polar(Vec<2>(3, 4)), 5.0);
  EXPECT_NEAR((b.grad_rho(Vec<2>(0, 2)) - Vec<2>(0, 1)).norm(), 0.0, 1e-15);
  const PolarResiduals r = check_polar_identities(b, Vec<2>(3, 4));
  EXPECT_LE(r.max(), 1e-12);
}

TEST(Gauge, EllipsoidValue) {
  const auto b = GaugeBody<2>::ellipsoid(Vec<2>(4, 1).asDiagonal());
  EXPECT_NEAR(b.rho(Vec<2>(1, 0)), 2.0, 1e-15);
  EXPECT_LE(check_polar_identities(b, Vec<2>(1, 1)).max(), 1e-10);
}

TEST(Gauge, TranslatedAgainstBisection) {
  const auto b = GaugeBody<2>::translated_ellipsoid(Mat<2>::Identity(), Vec<2>(0.5, 0));
  EXPECT_NEAR(b.rho(Vec<2>(1, 0)), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(oracle::gauge_bisect(b, Vec<2>(1, 0)), 2.0 / 3.0, 1e-14);
  std::mt19937_64 rng(11);
  for (const auto& nb : oracle::bodies2()) {
    for (int k = 0; k < 200; ++k) {
      const Vec<2> xi = random_vec2(rng);
      EXPECT_NEAR(nb.body.rho(xi), oracle::gauge_bisect(nb.body, xi), 1e-12 * (1 + xi.norm())) << nb.name;
    }
  }
  for (const auto& nb : oracle::bodies3()) {
    for (int k = 0; k < 100; ++k) {
      const Vec<3> xi = random_vec3(rng);
      EXPECT_NEAR(nb.body.rho(xi), oracle::gauge_bisect(nb.body, xi), 1e-12 * (1 + xi.norm())) << nb.name;
    }
  }
}

TEST(Gauge, PolarAgainstDenseSupport) {
  const auto b = GaugeBody<2>::translated_ellipsoid(Mat<2>::Identity(), Vec<2>(0.5, 0));
  EXPECT_NEAR(b.rho_polar(Vec<2>(1, 0)), 1.5, 1e-15);
  EXPECT_NEAR(b.rho_polar(Vec<2>(-1, 0)), 0.5, 1e-15);
  EXPECT_NEAR(oracle::support_dense(b, Vec<2>(1, 0)), 1.5, 1e-10);
  EXPECT_NEAR(oracle::support_dense(b, Vec<2>(-1, 0)), 0.5, 1e-10);
  std::mt19937_64 rng(12);
  for (const auto& nb : oracle::bodies2()) {
    for (int k = 0; k < 20; ++k) {
      const Vec<2> xi = random_vec2(rng);
      EXPECT_NEAR(nb.body.rho_polar(xi), oracle::support_dense(nb.body, xi, 20000), 1e-9 * (1 + xi.norm()))
          << nb.name;
    }
  }
}

TEST(Gauge, ZeroAndNonFinite) {
  for (const auto& nb : oracle::bodies2()) {
    const auto& b = nb.body;
    EXPECT_EQ(b.rho(Vec<2>::Zero()), 0.0);
    EXPECT_EQ(b.rho_polar(Vec<2>::Zero()), 0.0);
    EXPECT_THROW(b.grad_rho(Vec<2>::Zero()), ZeroVector);
    EXPECT_THROW(b.hess_rho(Vec<2>::Zero()), ZeroVector);
    EXPECT_THROW(b.grad_rho_polar(Vec<2>::Zero()), ZeroVector);
    EXPECT_THROW(b.hess_rho_polar(Vec<2>::Zero()), ZeroVector);
    EXPECT_THROW(check_polar_identities<2>(b, Vec<2>::Zero()), ZeroVector);
    const Vec<2> bad(std::nan(""), 1.0);
    EXPECT_THROW(b.rho(bad), NonFiniteInput);
    EXPECT_THROW(b.rho_polar(bad), NonFiniteInput);
    EXPECT_THROW(b.grad_rho(Vec<2>(INFINITY, 0)), NonFiniteInput);
  }
}

TEST(Gauge, ConstructorRejectsBadBodies) {
  EXPECT_THROW(GaugeBody<2>::translated_ellipsoid(Mat<2>::Identity(), Vec<2>(1.0, 0)), InvalidBody);
  EXPECT_THROW(GaugeBody<2>::translated_ellipsoid(Mat<2>::Identity(), Vec<2>(0.8, 0.7)), InvalidBody);
  Mat<2> indefinite;
  indefinite << 1, 0, 0, -1;
  EXPECT_THROW(GaugeBody<2>::ellipsoid(indefinite), InvalidBody);
  Mat<2> asym;
  asym << 2, 0.5, 0, 1;
  EXPECT_THROW(GaugeBody<2>::ellipsoid(asym), InvalidBody);
  EXPECT_THROW(GaugeBody<3>::ellipsoid(Mat<3>::Zero()), InvalidBody);
}

template <int N>
void check_homogeneity() {
  std::mt19937_64 rng(21 + N);
  std::uniform_real_distribution<double> ts(0.01, 50.0);
  for (const auto& nb : catalog<N>()) {
    const auto& b = nb.body;
    for (int k = 0; k < 150; ++k) {
      const Vec<N> xi = random_vec<N>(rng);
      const double t = ts(rng);
      const Vec<N> txi = t * xi;
      EXPECT_LE(std::abs(b.rho(txi) - t * b.rho(xi)), 1e-12 * t * b.rho(xi)) << nb.name;
      EXPECT_LE(std::abs(b.rho_polar(txi) - t * b.rho_polar(xi)), 1e-12 * t * b.rho_polar(xi)) << nb.name;
      EXPECT_LE((b.grad_rho(txi) - b.grad_rho(xi)).norm(), 1e-10 * b.grad_rho(xi).norm()) << nb.name;
      EXPECT_LE((b.grad_rho_polar(txi) - b.grad_rho_polar(xi)).norm(), 1e-10 * b.grad_rho_polar(xi).norm());
      EXPECT_LE((b.hess_rho(txi) - b.hess_rho(xi) / t).norm(), 1e-10 * b.hess_rho(xi).norm() / t) << nb.name;
      EXPECT_LE((b.hess_rho_polar(txi) - b.hess_rho_polar(xi) / t).norm(), 1e-10 * b.hess_rho_polar(xi).norm() / t);
    }
  }
}

TEST(GaugeProperty, Homogeneity2D) { check_homogeneity<2>(); }
TEST(GaugeProperty, Homogeneity3D) { check_homogeneity<3>(); }

template <int N>
void check_subadditivity() {
  std::mt19937_64 rng(31 + N);
  std::uniform_real_distribution<double> ls(0.0, 5.0);
  for (const auto& nb : catalog<N>()) {
    const auto& b = nb.body;
    for (int k = 0; k < 500; ++k) {
      const Vec<N> xi = random_vec<N>(rng);
      const Vec<N> eta = random_vec<N>(rng);
      EXPECT_LE(b.rho(Vec<N>(xi + eta)), b.rho(xi) + b.rho(eta) + 1e-12) << nb.name;
      EXPECT_LE(b.rho_polar(Vec<N>(xi + eta)), b.rho_polar(xi) + b.rho_polar(eta) + 1e-12) << nb.name;
      const double lam = ls(rng);
      const Vec<N> par = lam * xi;
      EXPECT_NEAR(b.rho(Vec<N>(xi + par)), b.rho(xi) + b.rho(par), 1e-10 * (1 + lam) * b.rho(xi)) << nb.name;
    }
  }
}

TEST(GaugeProperty, Subadditivity2D) { check_subadditivity<2>(); }
TEST(GaugeProperty, Subadditivity3D) { check_subadditivity<3>(); }

template <int N>
void check_identities() {
  std::mt19937_64 rng(41 + N);
  for (const auto& nb : catalog<N>()) {
    const auto& b = nb.body;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec<N> xi = random_vec<N>(rng);
      const PolarResiduals r = check_polar_identities(b, xi);
      // Hessian null vector relative to the Hessian scale.
      const double hs = b.hess_rho(xi).norm() * xi.norm();
      worst = std::max({worst, r.polar_of_grad_rho, r.grad_rho_of_grad_polar, r.unit_polar,
                        r.euler / b.rho(xi), r.hessian_null / std::max(1.0, hs)});
    }
    EXPECT_LE(worst, 1e-10) << nb.name;
  }
}

TEST(GaugeProperty, PolarIdentities2D) { check_identities<2>(); }
TEST(GaugeProperty, PolarIdentities3D) { check_identities<3>(); }

TEST(GaugeProperty, PolarIdentitiesTranslatedSample) {
  const auto b = GaugeBody<2>::translated_ellipsoid(Vec<2>(1, 2).asDiagonal(), Vec<2>(0.3, 0.1));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) EXPECT_LE(check_polar_identities(b, random_vec2(rng)).max(), 1e-8);
}

template <int N>
void check_finite_differences() {
  std::mt19937_64 rng(51 + N);
  for (const auto& nb : catalog<N>()) {
    const auto& b = nb.body;
    for (int k = 0; k < 100; ++k) {
      Vec<N> xi = random_vec<N>(rng);
      xi = xi.normalized() * (0.5 + xi.norm());
      auto rho = [&](const Vec<N>& v) { return b.rho(v); };
      auto rho0 = [&](const Vec<N>& v) { return b.rho_polar(v); };
      auto grad = [&](const Vec<N>& v) { return b.grad_rho(v); };
      auto grad0 = [&](const Vec<N>& v) { return b.grad_rho_polar(v); };
      EXPECT_LE((b.grad_rho(xi) - oracle::fd_gradient<N>(rho, xi)).cwiseAbs().maxCoeff(), 1e-6) << nb.name;
      EXPECT_LE((b.grad_rho_polar(xi) - oracle::fd_gradient<N>(rho0, xi)).cwiseAbs().maxCoeff(), 1e-6) << nb.name;
      EXPECT_LE((b.hess_rho(xi) - oracle::fd_jacobian<N>(grad, xi)).cwiseAbs().maxCoeff(), 1e-6) << nb.name;
      EXPECT_LE((b.hess_rho_polar(xi) - oracle::fd_jacobian<N>(grad0, xi)).cwiseAbs().maxCoeff(), 1e-6) << nb.name;
    }
  }
}

TEST(GaugeProperty, FiniteDifferences2D) { check_finite_differences<2>(); }
TEST(GaugeProperty, FiniteDifferences3D) { check_finite_differences<3>(); }

TEST(Gauge, FiniteDifferenceAtReferencePoint) {
  const auto b = GaugeBody<2>::translated_ellipsoid(Mat<2>::Identity(), Vec<2>(0.5, 0));
  const Vec<2> xi(0.3, -0.7);
  auto rho0 = [&](const Vec<2>& v) { return b.rho_polar(v); };
  auto rho = [&](const Vec<2>& v) { return b.rho(v); };
  EXPECT_LE((b.grad_rho_polar(xi) - oracle::fd_gradient<2>(rho0, xi)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((b.grad_rho(xi) - oracle::fd_gradient<2>(rho, xi)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(b.rho_polar(b.grad_rho(xi)), 1.0, 1e-12);
}

template <int N>
void check_bounds() {
  std::mt19937_64 rng(61 + N);
  for (const auto& nb : catalog<N>()) {
    const auto& b = nb.body;
    EXPECT_GT(b.c1(), 0.0);
    EXPECT_GE(b.c2(), b.c1());
    for (int k = 0; k < 1000; ++k) {
      const Vec<N> u = random_vec<N>(rng).normalized();
      EXPECT_GE(b.rho(u), b.c1() * (1 - 1e-12)) << nb.name;
      EXPECT_LE(b.rho(u), b.c2() * (1 + 1e-12)) << nb.name;
      // Polar bounds follow by duality.
      EXPECT_LE(b.rho_polar(u), (1 + 1e-12) / b.c1()) << nb.name;
      EXPECT_GE(b.rho_polar(u), (1 - 1e-12) / b.c2()) << nb.name;
    }
  }
}

TEST(GaugeProperty, Bounds2D) { check_bounds<2>(); }
TEST(GaugeProperty, Bounds3D) { check_bounds<3>(); }

TEST(Gauge, ReflectedBodyIsMinusK) {
  std::mt19937_64 rng(71);
  for (const auto& nb : oracle::bodies2()) {
    const auto r = nb.body.reflected();
    for (int k = 0; k < 100; ++k) {
      const Vec<2> xi = random_vec2(rng);
      EXPECT_NEAR(r.rho(xi), nb.body.rho(Vec<2>(-xi)), 1e-14 * (1 + xi.norm()));
      EXPECT_NEAR(r.rho_polar(xi), nb.body.rho_polar(Vec<2>(-xi)), 1e-14 * (1 + xi.norm()));
    }
  }
}

TEST(Gauge, GradientLiesOnPolarBoundary) {
  // D rho(xi) is the outer normal of K at xi / rho(xi), scaled to lie on the
  // boundary of the polar body: <D rho, p> <= 1 for every p in K with
  // equality at p = xi / rho.
  std::mt19937_64 rng(81);
  for (const auto& nb : oracle::bodies2()) {
    for (int k = 0; k < 50; ++k) {
      const Vec<2> xi = random_vec2(rng);
      const Vec<2> g = nb.body.grad_rho(xi);
      EXPECT_NEAR(oracle::support_dense(nb.body, g, 20000), 1.0, 1e-9) << nb.name;
      EXPECT_NEAR(g.dot(xi / nb.body.rho(xi)), 1.0, 1e-12) << nb.name;
    }
  }
}
