// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance [criterion numbers...]

#include "minkdist/app/config.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace minkdist;
using oracle::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

template <int N>
std::vector<BoundaryPoint<N>> sample_points(const Domain<N>& d, int count, double offset = 0.13) {
  std::vector<BoundaryPoint<N>> out;
  if constexpr (N == 2) {
    const auto& ch = d.chart(0);
    for (int k = 0; k < count; ++k)
      out.push_back({0, Param<2>(ch.lo()(0) + (ch.hi()(0) - ch.lo()(0)) * (k + offset) / count)});
  } else {
    for (int k = 0; k < count; ++k) {
      const int c = k % d.chart_count();
      const auto& ch = d.chart(c);
      const double s = (k * 0.618033988749895) - std::floor(k * 0.618033988749895);
      const double th = ch.lo()(0) + (ch.hi()(0) - ch.lo()(0)) * (k + 0.5) / count;
      const double ph = ch.lo()(1) + (ch.hi()(1) - ch.lo()(1)) * s;
      out.push_back({c, Param<3>(th, ph)});
    }
  }
  return out;
}

const Domain<3>& ellipsoid3() {
  static const Domain<3> d = Domain<3>::ellipsoid(1.5, 1.0, 0.8);
  return d;
}

RayQuadratureOptions ray_opts(int res, int order) {
  RayQuadratureOptions o;
  o.boundary_resolution = res;
  o.ray_order = order;
  return o;
}

// 1. Ellipse ridge endpoints at +-((a^2 - b^2) / a, 0).
void ridge(Outcome& o) {
  const auto d = Domain<2>::ellipse(2, 1);
  const auto set = extract_cut_locus(d, GaugeBody<2>::euclidean_ball(), 512);
  const auto ends = ridge_endpoints(set, 1e-2 * d.box_diameter());
  o.require(ends.size() == 2, "endpoint count " + std::to_string(ends.size()));
  double err = 0.0;
  for (const auto& e : ends) err = std::max(err, (e - Vec<2>(e(0) > 0 ? 1.5 : -1.5, 0.0)).norm());
  double xmin = 1e9;
  double xmax = -1e9;
  for (const auto& p : set.polyline) {
    xmin = std::min(xmin, p(0));
    xmax = std::max(xmax, p(0));
  }
  err = std::max({err, std::abs(xmax - 1.5), std::abs(xmin + 1.5)});
  o.require(err <= 1e-3, "endpoint error " + sci(err));
  o.detail << "endpoints=" << ends.size() << " max_err=" << sci(err) << " tol=1e-3";
}

// 2. Euclidean gauge: rho-curvatures equal the classical curvature.
void euclidean(Outcome& o) {
  const auto b = GaugeBody<2>::euclidean_ball();
  double worst = 0.0;
  int count = 0;
  for (const auto& nd : oracle::domains2()) {
    for (const auto& x0 : sample_points(nd.domain, 256)) {
      const auto cf = curvature_frame(nd.domain, b, x0);
      const auto pc = principal_curvatures(nd.domain.chart(0), x0.u);
      worst = std::max(worst, std::abs(cf.kappas(0) - pc.kappa(0)));
      ++count;
    }
  }
  o.require(worst <= 1e-8, "kappa gap " + sci(worst));
  o.detail << "samples=" << count << " max_gap=" << sci(worst) << " tol=1e-8";
}

// 3. Polar duality identities on random directions.
template <int N>
double duality_worst(const GaugeBody<N>& b, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Vec<N> xi;
    for (int i = 0; i < N; ++i) xi(i) = n(rng);
    worst = std::max(worst, check_polar_identities(b, xi).max());
  }
  return worst;
}

void duality(Outcome& o) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int bodies = 0;
  std::vector<oracle::NamedBody<2>> b2 = oracle::bodies2();
  Mat<2> q;
  q << 3.0, 0.8, 0.8, 1.2;
  b2.push_back({"rotated", GaugeBody<2>::ellipsoid(q)});
  b2.push_back({"rotated_translated", GaugeBody<2>::translated_ellipsoid(q, Vec<2>(-0.25, 0.2))});
  for (const auto& nb : b2) {
    const double w = duality_worst(nb.body, rng);
    o.require(w <= 1e-8, "2D " + nb.name + " residual " + sci(w));
    worst = std::max(worst, w);
    ++bodies;
  }
  for (const auto& nb : oracle::bodies3()) {
    const double w = duality_worst(nb.body, rng);
    o.require(w <= 1e-8, "3D " + nb.name + " residual " + sci(w));
    worst = std::max(worst, w);
    ++bodies;
  }
  o.detail << "bodies=" << bodies << " xi_per_body=1000 max_residual=" << sci(worst) << " tol=1e-8";
}

// 4. rho(nu) R H = I and det(I - tW) = det(I - tW_bar).
template <int N>
void matrix_identities(Outcome& o, const Domain<N>& d, const GaugeBody<N>& body, const std::string& name, double& w_id,
                       double& w_det) {
  for (const auto& x0 : sample_points(d, 100)) {
    const auto cf = curvature_frame(d, body, x0);
    const double id = (cf.rho_nu * cf.Rmat * cf.Hmat - TangentMat<N>::Identity()).cwiseAbs().maxCoeff();
    const Mat<N> w = full_weingarten(d, body, x0);
    double det = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double t = 0.1 * k;
      det = std::max(det, std::abs((Mat<N>::Identity() - t * w).determinant() - jacobian_factor_det(cf, t)));
    }
    o.require(id <= 1e-8, name + " identity " + sci(id));
    o.require(det <= 1e-8, name + " determinant " + sci(det));
    w_id = std::max(w_id, id);
    w_det = std::max(w_det, det);
  }
}

void matrices(Outcome& o) {
  double w_id = 0.0;
  double w_det = 0.0;
  int configs = 0;
  for (const auto& nd : oracle::domains2())
    for (const auto& nb : oracle::bodies2()) {
      matrix_identities(o, nd.domain, nb.body, nd.name + "/" + nb.name, w_id, w_det);
      ++configs;
    }
  for (const auto& nb : oracle::bodies3()) {
    matrix_identities(o, ellipsoid3(), nb.body, "ellipsoid3d/" + nb.name, w_id, w_det);
    ++configs;
  }
  o.detail << "configs=" << configs << " points=100 t_values=10 max_identity=" << sci(w_id)
           << " max_det_gap=" << sci(w_det) << " tol=1e-8";
}

// 5. Jacobian positivity at every ray quadrature node.
void jacobians(Outcome& o) {
  double lowest = std::numeric_limits<double>::infinity();
  std::size_t nodes = 0;
  for (const auto& nd : oracle::domains2()) {
    for (const auto& nb : oracle::bodies2()) {
      const auto q = RayQuadrature<2>::build(nd.domain, nb.body, ray_opts(256, 16));
      for (const auto& node : q.nodes())
        for (double t : node.rule.nodes) {
          const double j = node.jacobian(t);
          o.require(j > 0.0, nd.name + "/" + nb.name + " jacobian " + sci(j));
          lowest = std::min(lowest, j);
          ++nodes;
        }
    }
  }
  o.detail << "configs=6 ray_nodes=" << nodes << " min_jacobian=" << sci(lowest);
}

// 6. Change of variables.
void change_of_variables(Outcome& o) {
  const auto euclid = GaugeBody<2>::euclidean_ball();
  const auto opts = ray_opts(256, 16);
  const auto ellipse = Domain<2>::ellipse(2, 1);
  const double area = RayQuadrature<2>::build(ellipse, euclid, opts).integrate([](const Vec<2>&) { return 1.0; });
  const double e_area = std::abs(area - 2 * pi) / (2 * pi);
  o.require(e_area <= 1e-3, "ellipse area error " + sci(e_area));

  const auto disk = Domain<2>::ellipse(1, 1);
  const double dint = RayQuadrature<2>::build(disk, euclid, opts).integrate(
      [&](const Vec<2>& x) { return project(disk, euclid, x, Side::interior).distance; });
  const double e_dist = std::abs(dint - pi / 3) / (pi / 3);
  o.require(e_dist <= 1e-3, "disk distance integral error " + sci(e_dist));

  const auto cfg = app::load_config(std::string(MINKDIST_CONFIGS) + "/ellipse_translated.json");
  const auto dom = app::make_domain<2>(cfg.domain);
  const auto body = app::make_body<2>(cfg.body);
  const Bump<2> bump{Vec<2>(cfg.options.bump->center[0], cfg.options.bump->center[1]), cfg.options.bump->radius};
  const auto rep = integrate_ray_windowed(
      dom, body, [&](const Vec<2>& x) { return bump.value(x); },
      [&](const RayNode<2>& n) { return bump.ray_window(n.x0(), n.direction()); },
      ray_opts(cfg.options.boundary_resolution, cfg.options.ray_order), cfg.options.grid_resolution);
  const double gap = rep.gap() / std::abs(rep.grid);
  o.require(gap <= 1e-2, "bump ray/grid gap " + sci(gap));
  o.detail << "ellipse_area_err=" << sci(e_area) << " disk_distance_err=" << sci(e_dist)
           << " (tol 1e-3) bump_gap=" << sci(gap) << " (tol 1e-2)";
}

// 7. Transport density: closed form on the disk and weak-form residuals.
std::vector<Bump<2>> bumps_for(const std::string& domain) {
  if (domain == "ellipse") return {{Vec<2>(0.4, 0.1), 0.5}, {Vec<2>(-0.8, -0.2), 0.45}, {Vec<2>(0.9, 0.3), 0.4}};
  return {{Vec<2>(0.1, 0.05), 0.35}, {Vec<2>(-0.3, 0.2), 0.3}, {Vec<2>(0.25, -0.3), 0.25}};
}

void transport(Outcome& o) {
  const auto disk = Domain<2>::ellipse(1, 1);
  const auto euclid = GaugeBody<2>::euclidean_ball();
  const SourceFn<2> one = [](const Vec<2>&) { return 1.0; };
  double disk_err = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double r = 0.95 * k / 20.0;
    const double th = 0.37 * k;
    const Vec<2> x(r * std::cos(th), r * std::sin(th));
    disk_err = std::max(disk_err, std::abs(transport_density(disk, euclid, one, x) - r / 2));
  }
  o.require(disk_err <= 1e-6, "disk v_f error " + sci(disk_err));

  // Residual halving is checked down to a roundoff floor: the weak form is
  // an exact identity along rays, so residuals sit at quadrature roundoff.
  const double floor = 1e-12;
  const SourceFn<2> f = [](const Vec<2>& x) { return 1.0 + 0.3 * x(0) + 0.2 * x(1) * x(1); };
  double worst = 0.0;
  int checks = 0;
  for (const auto& nd : oracle::domains2()) {
    for (const auto& nb : oracle::bodies2()) {
      const auto bumps = bumps_for(nd.name);
      std::vector<double> prev;
      for (auto [res, order] : {std::pair{64, 8}, std::pair{128, 16}, std::pair{256, 32}}) {
        const auto q = RayQuadrature<2>::build(nd.domain, nb.body, ray_opts(res, order));
        const auto r = weak_residual(nd.domain, q, f, bumps, 200);
        const std::string tag = nd.name + "/" + nb.name + " res " + std::to_string(res);
        for (std::size_t i = 0; i < r.size(); ++i) {
          const double rel = r[i].relative();
          worst = std::max(worst, rel);
          o.require(rel <= 1e-2, tag + " residual " + sci(rel));
          if (!prev.empty())
            o.require(rel <= 0.5 * prev[i] || rel <= floor, tag + " no halving " + sci(prev[i]) + " -> " + sci(rel));
          ++checks;
        }
        prev.clear();
        for (const auto& w : r) prev.push_back(w.relative());
      }
    }
  }
  o.detail << "disk_max_err=" << sci(disk_err) << " (tol 1e-6) weak_checks=" << checks
           << " max_relative_residual=" << sci(worst) << " (tol 1e-2, halving floor " << sci(floor) << ")";
}

// 8. Cut-value bounds and distance invariants on random points.
Vec<2> random_inside(const Domain<2>& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const Vec<2> x(d.box_lo()(0) + (d.box_hi()(0) - d.box_lo()(0)) * u(rng),
                   d.box_lo()(1) + (d.box_hi()(1) - d.box_lo()(1)) * u(rng));
    if (d.inside(x)) return x;
  }
}

void cut_bounds(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int points = 500;
  double worst_focal = -1e300;
  double min_l = 1e300;
  double worst_prox = 0.0;
  double worst_ray = 0.0;
  int ray_checked = 0;
  for (const auto& nd : oracle::domains2()) {
    for (const auto& nb : oracle::bodies2()) {
      const std::string tag = nd.name + "/" + nb.name;
      const auto& ch = nd.domain.chart(0);
      for (int k = 0; k < points; ++k) {
        // Cut value at a random boundary point.
        const BoundaryPoint<2> x0{0, Param<2>(ch.lo()(0) + (ch.hi()(0) - ch.lo()(0)) * u(rng))};
        const auto cf = curvature_frame(nd.domain, nb.body, x0);
        const auto rec = cut_value(nd.domain, nb.body, cf);
        min_l = std::min(min_l, rec.l);
        o.require(rec.l > 0.0, tag + " l=" + sci(rec.l));
        if (cf.max_kappa() > 0.0) {
          const double excess = rec.l - 1.0 / cf.max_kappa();
          worst_focal = std::max(worst_focal, excess);
          o.require(excess <= 1e-6, tag + " l beyond focal by " + sci(excess));
        }

        // Proximal normal: x0 + t D rho(nu) projects back onto x0 with |d^s| = |t|.
        for (double t : {-1e-2, -1e-3, 1e-3, 1e-2}) {
          const auto s = signed_distance(nd.domain, nb.body, Vec<2>(cf.x0 + t * cf.grad_rho_nu));
                    o.require(s.projection.multiplicity == 1, tag + " proximal projection not unique");
          worst_prox = std::max(worst_prox, std::abs(s.value - t));
          o.require(std::abs(s.value - t) <= 1e-8, tag + " proximal distance " + sci(std::abs(s.value - t)));
          o.require((s.projection.nearest().point - cf.x0).norm() <= 1e-6, tag + " proximal foot moved");
        }

        // Ray restriction at a random interior point.
        const Vec<2> x = random_inside(nd.domain, rng);
        const auto sx = signed_distance(nd.domain, nb.body, x);
        if (!sx.gradient) continue;
        ++ray_checked;
        const Vec<2> y = sx.projection.nearest().point;
        for (double s : {0.25, 0.5, 0.75}) {
          const Vec<2> z = y + s * (x - y);
          const auto sz = signed_distance(nd.domain, nb.body, z);
          o.require(sz.projection.unique && sz.gradient.has_value(), tag + " ray point not regular");
          if (!sz.gradient) continue;
          worst_ray = std::max({worst_ray, std::abs(sz.value - s * sx.value), (*sz.gradient - *sx.gradient).norm()});
          o.require((sz.projection.nearest().point - y).norm() <= 1e-6, tag + " ray foot moved");
          o.require(std::abs(sz.value - s * sx.value) <= 1e-8, tag + " ray distance not linear");
          o.require((*sz.gradient - *sx.gradient).norm() <= 1e-8, tag + " ray gradient changed");
        }
      }
    }
  }
  o.detail << "configs=6 points_per_config=" << points << " min_l=" << sci(min_l)
           << " max(l - 1/kappa_max)=" << sci(worst_focal) << " (tol 1e-6) regular_rays=" << ray_checked
           << " proximal_err=" << sci(worst_prox) << " ray_err=" << sci(worst_ray);
}

// 9. Boundary Hessian against finite differences of the signed distance.
template <int N>
double hessian_gap(const Domain<N>& d, const GaugeBody<N>& body, const BoundaryPoint<N>& p) {
  const Vec<N> x0 = d.chart(p.chart).eval(p.u).point;
  const auto bh = boundary_hessian(d, body, p);
  auto ds = [&](const Vec<N>& x) { return signed_distance(d, body, x).value; };
  return (oracle::fd_hessian<N>(ds, x0, 1e-4) - bh.ambient).cwiseAbs().maxCoeff();
}

void hessians(Outcome& o) {
  double worst = 0.0;
  int configs = 0;
  for (const auto& nd : oracle::domains2())
    for (const auto& nb : oracle::bodies2()) {
      for (const auto& p : sample_points(nd.domain, 64, 0.41)) {
        const double g = hessian_gap(nd.domain, nb.body, p);
        worst = std::max(worst, g);
        o.require(g <= 1e-3, nd.name + "/" + nb.name + " gap " + sci(g));
      }
      ++configs;
    }
  for (const auto& nb : oracle::bodies3()) {
    for (const auto& p : sample_points(ellipsoid3(), 64)) {
      const double g = hessian_gap(ellipsoid3(), nb.body, p);
      worst = std::max(worst, g);
      o.require(g <= 1e-3, "ellipsoid3d/" + nb.name + " gap " + sci(g));
    }
    ++configs;
  }
  o.detail << "configs=" << configs << " points=64 fd_step=1e-4 max_gap=" << sci(worst) << " tol=1e-3";
}

// 10. Determinism of every CLI command.
std::string run_cli(const std::string& args, int& code) {
  const std::string cmd = std::string(MINKDIST_EXE) + " " + args + " 2>&1";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    code = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(Outcome& o) {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"field", "ellipse_translated.json"},   {"field", "ellipsoid_3d.json"},
      {"cutlocus", "star_ellipsoid_gauge.json"}, {"curvature", "ellipsoid_3d.json"},
      {"integrate", "ellipse_translated.json"},  {"transport", "ellipse_translated.json"},
      {"render", "ellipse_translated.json"},   {"render", "star_ellipsoid_gauge.json"},
  };
  const fs::path root = fs::temp_directory_path() / "minkdist_acceptance";
  std::size_t files = 0;
  for (const auto& [cmd, cfg] : runs) {
    std::array<std::string, 2> logs;
    std::array<fs::path, 2> dirs;
    for (int k = 0; k < 2; ++k) {
      dirs[k] = root / (cmd + "_" + cfg + "_" + std::to_string(k));
      fs::remove_all(dirs[k]);
      int code = 0;
      logs[k] = run_cli(cmd + " --config " + MINKDIST_CONFIGS + "/" + cfg + " --out " + dirs[k].string(), code);
      o.require(code == 0, cmd + " " + cfg + " exit " + std::to_string(code));
      for (std::size_t pos; (pos = logs[k].find(dirs[k].string())) != std::string::npos;)
        logs[k].replace(pos, dirs[k].string().size(), "OUT");
    }
    o.require(logs[0] == logs[1], cmd + " " + cfg + " stdout differs");
    std::set<std::string> names;
    for (int k = 0; k < 2; ++k)
      if (fs::exists(dirs[k]))
        for (const auto& e : fs::directory_iterator(dirs[k])) names.insert(e.path().filename().string());
    o.require(!names.empty(), cmd + " " + cfg + " wrote nothing");
    for (const auto& n : names) {
      o.require(fs::exists(dirs[0] / n) && fs::exists(dirs[1] / n) && slurp(dirs[0] / n) == slurp(dirs[1] / n),
                cmd + " " + cfg + " " + n + " differs");
      ++files;
    }
  }
  fs::remove_all(root);
  o.detail << "runs=" << runs.size() << " artifacts_compared=" << files;
}

struct Criterion {
  int id;
  std::string name;
  void (*fn)(Outcome&);
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "ellipse ridge endpoints", ridge},
      {2, "euclidean rho-curvature equals curvature", euclidean},
      {3, "polar duality identities", duality},
      {4, "matrix and determinant identities", matrices},
      {5, "jacobian positivity on ray nodes", jacobians},
      {6, "change of variables", change_of_variables},
      {7, "transport density", transport},
      {8, "cut-value bounds and distance invariants", cut_bounds},
      {9, "boundary hessian vs finite differences", hessians},
      {10, "cli determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s [%.1fs]\n", c.id, o.pass ? "PASS" : "FAIL", c.name.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
