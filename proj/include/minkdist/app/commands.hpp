#pragma once

#include "minkdist/app/config.hpp"
#include "minkdist/app/io.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace minkdist::app {

namespace fs = std::filesystem;

template <int N>
struct Run {
  const RunConfig& cfg;
  fs::path out;
  std::ostream& log;
  GaugeBody<N> body;
  Domain<N> domain;

  Run(const RunConfig& c, fs::path dir, std::ostream& os)
      : cfg(c), out(std::move(dir)), log(os), body(make_body<N>(c.body)), domain(make_domain<N>(c.domain)) {
    fs::create_directories(out);
  }
};

// ---------------------------------------------------------------------------
// field: signed distance on the grid

template <int N>
void cmd_field(Run<N>& r) {
  const SampleGrid<N> grid = make_grid(r.cfg, r.domain);
  const ProjectionOptions popts = projection_options(r.cfg);
  const auto samples = parallel_map<SignedDistanceSample<N>>(
      grid.size(), [&](std::size_t i) { return signed_distance(r.domain, r.body, grid.point(i), popts); });

  auto header = axis_names(N);
  header.push_back("value");
  header.push_back("flag");
  CsvWriter csv(r.out / "field.csv", header);
  std::optional<CsvWriter> grad;
  if (r.cfg.options.gradient) {
    auto h = axis_names(N);
    for (const auto& a : axis_names(N, "g")) h.push_back(a);
    grad.emplace(r.out / "field_gradient.csv", h);
  }
  std::size_t singular = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec<N> x = grid.point(i);
    const auto& s = samples[i];
    int flag = r.domain.inside(x) ? flag_inside : 0;
    if (!s.gradient) {
      flag |= flag_singular;
      ++singular;
    }
    auto row = coords(x);
    row.push_back(fmt(s.value));
    row.push_back(std::to_string(flag));
    csv.row(row);
    if (grad) {
      auto g = coords(x);
      for (int k = 0; k < N; ++k) g.push_back(s.gradient ? fmt((*s.gradient)(k)) : "nan");
      grad->row(g);
    }
  }
  r.log << "points=" << grid.size() << "\n" << "singular=" << singular << "\n";
}

// ---------------------------------------------------------------------------
// cutlocus: cut values along the boundary sample and the ridge polyline

template <int N>
void cmd_cutlocus(Run<N>& r) {
  const CutOptions opts = cut_options(r.cfg);
  const CutLocusSet<N> set = extract_cut_locus(r.domain, r.body, r.cfg.options.boundary_resolution, opts);
  auto header = axis_names(N, "foot_");
  header.push_back("l");
  for (const auto& a : axis_names(N, "cut_")) header.push_back(a);
  header.push_back("tag");
  header.push_back("first_focal");
  if (opts.exterior) header.push_back("l_minus");
  CsvWriter csv(r.out / "cutlocus_samples.csv", header);
  double max_depth = 0.0;
  for (const auto& s : set.samples) {
    auto row = coords(s.x0);
    row.push_back(fmt(s.l));
    for (const auto& c : coords(s.cut_point)) row.push_back(c);
    row.push_back(to_string(s.tag));
    row.push_back(fmt(s.first_focal));
    if (opts.exterior) row.push_back(fmt(s.l_minus.value_or(std::numeric_limits<double>::infinity())));
    csv.row(row);
    max_depth = std::max(max_depth, s.l);
  }
  if constexpr (N == 2) {
    auto ph = axis_names(2);
    ph.push_back("tag");
    CsvWriter poly(r.out / "cutlocus_polyline.csv", ph);
    for (std::size_t i = 0; i < set.polyline.size(); ++i) {
      auto row = coords(set.polyline[i]);
      row.push_back(to_string(set.polyline_tags[i]));
      poly.row(row);
    }
    r.log << "polyline_points=" << set.polyline.size() << "\n";
    for (const auto& e : ridge_endpoints(set, 1e-2 * r.domain.box_diameter()))
      r.log << "endpoint=" << fmt(e(0)) << "," << fmt(e(1)) << "\n";
  }
  r.log << "samples=" << set.samples.size() << "\n" << "max_l=" << fmt(max_depth) << "\n";
}

// ---------------------------------------------------------------------------
// curvature: Euclidean and rho-curvatures at the boundary sample

template <int N>
void cmd_curvature(Run<N>& r) {
  const auto feet = boundary_sample(r.domain, r.cfg.options.boundary_resolution);
  const auto frames = parallel_map<CurvatureFrame<N>>(
      feet.size(), [&](std::size_t i) { return curvature_frame(r.domain, r.body, feet[i]); });
  std::vector<std::string> header = {"chart"};
  for (int k = 0; k < N - 1; ++k) header.push_back("u" + std::to_string(k + 1));
  for (const auto& a : axis_names(N)) header.push_back(a);
  for (int k = 0; k < N - 1; ++k) header.push_back("kappa_" + std::to_string(k + 1));
  for (int k = 0; k < N - 1; ++k) header.push_back("rho_kappa_" + std::to_string(k + 1));
  header.push_back("rho_nu");
  header.push_back("first_focal");
  CsvWriter csv(r.out / "curvature.csv", header);
  double kmin = std::numeric_limits<double>::infinity();
  double kmax = -kmin;
  for (std::size_t i = 0; i < feet.size(); ++i) {
    const auto& cf = frames[i];
    std::vector<std::string> row = {std::to_string(feet[i].chart)};
    for (int k = 0; k < N - 1; ++k) row.push_back(fmt(feet[i].u(k)));
    for (const auto& c : coords(cf.x0)) row.push_back(c);
    for (int k = 0; k < N - 1; ++k) row.push_back(fmt(cf.frame.kappa(k)));
    for (int k = 0; k < N - 1; ++k) row.push_back(fmt(cf.kappas(k)));
    row.push_back(fmt(cf.rho_nu));
    row.push_back(fmt(first_focal(cf)));
    csv.row(row);
    kmin = std::min(kmin, cf.min_kappa());
    kmax = std::max(kmax, cf.max_kappa());
  }
  r.log << "samples=" << feet.size() << "\n" << "rho_kappa_min=" << fmt(kmin) << "\n"
        << "rho_kappa_max=" << fmt(kmax) << "\n";
}

// ---------------------------------------------------------------------------
// integrate: normal-ray quadrature against a midpoint grid

template <int N>
std::function<double(const Vec<N>&)> integrand(const Run<N>& r) {
  const Options& o = r.cfg.options;
  if (o.integrand == "one") return [](const Vec<N>&) { return 1.0; };
  if (o.integrand == "distance") {
    const ProjectionOptions popts = projection_options(r.cfg);
    const Domain<N>* d = &r.domain;
    const GaugeBody<N>* b = &r.body;
    return [d, b, popts](const Vec<N>& x) { return project(*d, *b, x, Side::interior, popts).distance; };
  }
  Bump<N> bump{Eigen::Map<const Vec<N>>(o.bump->center.data()), o.bump->radius};
  return [bump](const Vec<N>& x) { return bump.value(x); };
}

template <int N>
void cmd_integrate(Run<N>& r) {
  RayQuadratureOptions q;
  q.boundary_resolution = r.cfg.options.boundary_resolution;
  q.ray_order = r.cfg.options.ray_order;
  q.cut = cut_options(r.cfg);
  q.cut.exterior = false;
  const auto h = integrand(r);
  const Options& o = r.cfg.options;
  IntegrationReport rep;
  if (o.integrand == "bump") {
    const Bump<N> bump{Eigen::Map<const Vec<N>>(o.bump->center.data()), o.bump->radius};
    auto window = [&bump](const RayNode<N>& node) { return bump.ray_window(node.x0(), node.direction()); };
    rep = integrate_ray_windowed(r.domain, r.body, h, window, q, o.grid_resolution, o.mc_samples, r.cfg.seed);
  } else {
    rep = integrate_ray(r.domain, r.body, h, q, o.grid_resolution, o.mc_samples, r.cfg.seed);
  }
  std::ostringstream s;
  s << "integrand=" << r.cfg.options.integrand << "\n";
  s << "ray=" << fmt(rep.ray) << "\n";
  s << "grid=" << fmt(rep.grid) << "\n";
  s << "gap=" << fmt(rep.gap()) << "\n";
  if (rep.monte_carlo) s << "mc=" << fmt(*rep.monte_carlo) << "\n";
  s << "min_jacobian=" << fmt(rep.min_jacobian) << "\n";
  std::ofstream(r.out / "integrate_report.txt") << s.str();
  r.log << s.str();
}

// ---------------------------------------------------------------------------
// transport: v_f for constant f on the grid

template <int N>
std::vector<TransportSample<N>> transport_grid(const Run<N>& r, const SampleGrid<N>& grid) {
  TransportOptions topts;
  topts.ray_order = std::max(16, r.cfg.options.ray_order);
  topts.cut = cut_options(r.cfg);
  topts.cut.exterior = false;
  const double fval = r.cfg.options.source;
  const SourceFn<N> f = [fval](const Vec<N>&) { return fval; };
  return parallel_map<TransportSample<N>>(grid.size(), [&](std::size_t i) {
    const Vec<N> x = grid.point(i);
    if (!r.domain.inside(x)) return TransportSample<N>{};
    return transport_sample(r.domain, r.body, f, x, topts);
  });
}

template <int N>
void cmd_transport(Run<N>& r) {
  const SampleGrid<N> grid = make_grid(r.cfg, r.domain);
  const auto vals = transport_grid(r, grid);
  auto header = axis_names(N);
  header.push_back("value");
  header.push_back("flag");
  CsvWriter csv(r.out / "transport.csv", header);
  double vmax = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec<N> x = grid.point(i);
    int flag = r.domain.inside(x) ? flag_inside : 0;
    if (vals[i].singular) flag |= flag_singular;
    auto row = coords(x);
    row.push_back(fmt(vals[i].value));
    row.push_back(std::to_string(flag));
    csv.row(row);
    vmax = std::max(vmax, vals[i].value);
  }
  r.log << "points=" << grid.size() << "\n" << "max_value=" << fmt(vmax) << "\n";

  // Weak form of -div(v_f D rho(D d)) = f tested against the configured bump.
  if (const auto& b = r.cfg.options.bump) {
    RayQuadratureOptions q;
    q.boundary_resolution = r.cfg.options.boundary_resolution;
    q.ray_order = r.cfg.options.ray_order;
    q.cut = cut_options(r.cfg);
    q.cut.exterior = false;
    const RayQuadrature<N> rq = RayQuadrature<N>::build(r.domain, r.body, q);
    const double fval = r.cfg.options.source;
    const SourceFn<N> f = [fval](const Vec<N>&) { return fval; };
    const Bump<N> bump{Eigen::Map<const Vec<N>>(b->center.data()), b->radius};
    const WeakResidual w = weak_residual(r.domain, rq, f, {bump}, r.cfg.options.grid_resolution).front();
    std::ostringstream s;
    s << "weak_transport=" << fmt(w.transport_term) << "\n";
    s << "weak_source=" << fmt(w.source_term) << "\n";
    s << "weak_residual=" << fmt(w.residual) << "\n";
    s << "weak_relative=" << fmt(w.relative()) << "\n";
    std::ofstream(r.out / "weak_residual.txt") << s.str();
    r.log << s.str();
  }
}

// ---------------------------------------------------------------------------
// render: SVG overlay of field, boundary, cut locus and normal rays (2D)

inline void cmd_render(Run<2>& r) {
  const SampleGrid<2> grid = make_grid(r.cfg, r.domain);
  SvgCanvas svg(grid.lo, grid.hi);

  svg.open_layer("field");
  if (r.cfg.options.render_field != "none") {
    std::vector<double> vals(grid.size(), 0.0);
    if (r.cfg.options.render_field == "distance") {
      const ProjectionOptions popts = projection_options(r.cfg);
      vals = parallel_map<double>(grid.size(), [&](std::size_t i) {
        const Vec<2> x = grid.point(i);
        return r.domain.inside(x) ? signed_distance(r.domain, r.body, x, popts).value : 0.0;
      });
    } else {
      const auto t = transport_grid(r, grid);
      for (std::size_t i = 0; i < t.size(); ++i) vals[i] = t[i].value;
    }
    const double vmax = *std::max_element(vals.begin(), vals.end());
    const Vec<2> cell((grid.hi - grid.lo).array() / (grid.dims.cast<double>().array() - 1.0));
    const double w = cell(0) * svg.scale();
    const double h = cell(1) * svg.scale();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (vals[i] <= 0.0) continue;
      const Vec<2> c = svg.map(grid.point(i));
      svg.raw("<rect x=\"" + fmt_short(c(0) - 0.5 * w) + "\" y=\"" + fmt_short(c(1) - 0.5 * h) + "\" width=\"" +
              fmt_short(w) + "\" height=\"" + fmt_short(h) + "\" fill=\"" + ramp(vmax > 0 ? vals[i] / vmax : 0.0) +
              "\"/>");
    }
  }
  svg.close_layer();

  svg.open_layer("boundary");
  {
    std::vector<Vec<2>> pts;
    const auto& ch = r.domain.chart(0);
    for (int k = 0; k < 720; ++k)
      pts.push_back(ch.eval(Param<2>(ch.lo()(0) + (ch.hi()(0) - ch.lo()(0)) * k / 720)).point);
    svg.polyline(pts, "fill=\"none\" stroke=\"black\" stroke-width=\"2\"", true);
  }
  svg.close_layer();

  const CutLocusSet<2> set = extract_cut_locus(r.domain, r.body, r.cfg.options.boundary_resolution, cut_options(r.cfg));
  svg.open_layer("cutlocus");
  if (set.polyline.size() > 1)
    svg.polyline(set.polyline, "fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\"");
  for (const auto& e : ridge_endpoints(set, 1e-2 * r.domain.box_diameter()))
    svg.circle(e, 5.0, "fill=\"#c0392b\" class=\"endpoint\"");
  svg.close_layer();

  svg.open_layer("rays");
  const int nrays = r.cfg.options.rays;
  if (nrays > 0 && !set.samples.empty()) {
    const std::size_t stride = std::max<std::size_t>(1, set.samples.size() / static_cast<std::size_t>(nrays));
    for (std::size_t i = 0; i < set.samples.size(); i += stride)
      svg.line(set.samples[i].x0, set.samples[i].cut_point, "stroke=\"#2c7a7b\" stroke-width=\"0.8\"");
  }
  svg.close_layer();

  std::ofstream(r.out / "render.svg") << svg.document();
  r.log << "svg=" << (r.out / "render.svg").string() << "\n" << "cut_points=" << set.polyline.size() << "\n";
}

inline void cmd_render(Run<3>&) { throw ConfigError("render supports 2D domains only"); }

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"field", "cutlocus", "curvature", "integrate", "transport", "render"};
  return names;
}

template <int N>
void dispatch(const std::string& cmd, Run<N>& r) {
  if (cmd == "field") cmd_field(r);
  else if (cmd == "cutlocus") cmd_cutlocus(r);
  else if (cmd == "curvature") cmd_curvature(r);
  else if (cmd == "integrate") cmd_integrate(r);
  else if (cmd == "transport") cmd_transport(r);
  else if (cmd == "render") cmd_render(r);
  else throw ConfigError("unknown command '" + cmd + "'");
}

inline void run_command(const std::string& cmd, const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  if (cfg.dim == 2) {
    Run<2> r(cfg, out, log);
    dispatch(cmd, r);
  } else {
    Run<3> r(cfg, out, log);
    dispatch(cmd, r);
  }
}

}  // namespace minkdist::app
