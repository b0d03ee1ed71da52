#pragma once

#include "minkdist/minkdist.hpp"

#if __has_include(<json.hpp>)
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace minkdist::app {

inline constexpr const char* schema_version = "minkdist/1";

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

struct BodySpec {
  std::string family = "euclidean_ball";
  std::vector<double> q;  // row-major n x n
  std::vector<double> c;
};

struct DomainSpec {
  std::string family;
  std::vector<double> params;  // ellipse: a,b ; ellipsoid: a,b,c ; fourier_star: coefficients
};

struct GridSpec {
  int nx = 64;
  int ny = 64;
  int nz = 0;
  std::optional<std::vector<double>> lo;  // absent: auto box around the domain
  std::optional<std::vector<double>> hi;
};

struct Tolerances {
  double tol_cluster = 1e-4;
  double rel_tol_value = 1e-9;
  double rel_tol_cut = 1e-6;
  double tol_focal = 1e-4;
};

struct BumpSpec {
  std::vector<double> center;
  double radius = 0.5;
};

struct Options {
  int seeds_per_axis = 0;
  int boundary_resolution = 256;
  int ray_order = 16;
  int grid_resolution = 400;
  bool gradient = false;
  bool exterior = false;
  bool verify_monotone = true;
  std::string integrand = "one";  // one | distance | bump
  std::optional<BumpSpec> bump;
  double source = 1.0;  // constant f for transport
  std::size_t mc_samples = 0;
  int rays = 32;
  std::string render_field = "distance";  // distance | transport | none
};

struct RunConfig {
  int dim = 2;
  BodySpec body;
  DomainSpec domain;
  GridSpec grid;
  Tolerances tol;
  Options options;
  std::string output = ".";
  std::uint64_t seed = 0;
};

namespace detail {

using json = nlohmann::json;

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + " must be finite");
  return v;
}

inline double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) throw ConfigError(where + " must be positive");
  return v;
}

inline int count(const json& j, const std::string& where, int min) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  const long long v = j.get<long long>();
  if (v < min || v > 1'000'000) throw ConfigError(where + " out of range");
  return static_cast<int>(v);
}

inline bool boolean(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + " must be true or false");
  return j.get<bool>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Q as a flat row-major list or as a list of rows.
inline std::vector<double> matrix(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array");
  if (!j.empty() && j[0].is_array()) {
    std::vector<double> out;
    for (std::size_t r = 0; r < j.size(); ++r) {
      const auto row = numbers(j[r], where + "[" + std::to_string(r) + "]");
      if (row.size() != j.size()) throw ConfigError(where + " must be square");
      out.insert(out.end(), row.begin(), row.end());
    }
    return out;
  }
  return numbers(j, where);
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  using namespace detail;
  only_keys(j, "config", {"schema", "body", "domain", "grid", "tolerances", "options", "output", "seed"});
  if (!j.contains("schema")) throw ConfigError("missing 'schema'");
  if (text(j["schema"], "schema") != schema_version)
    throw ConfigError(std::string("unsupported schema, expected '") + schema_version + "'");
  RunConfig cfg;

  if (!j.contains("domain")) throw ConfigError("missing 'domain'");
  {
    const json& d = j["domain"];
    if (!d.is_object() || !d.contains("family")) throw ConfigError("domain.family is required");
    cfg.domain.family = text(d["family"], "domain.family");
    if (cfg.domain.family == "ellipse") {
      only_keys(d, "domain", {"family", "a", "b"});
      if (!d.contains("a") || !d.contains("b")) throw ConfigError("ellipse needs a and b");
      cfg.domain.params = {positive(d["a"], "domain.a"), positive(d["b"], "domain.b")};
      cfg.dim = 2;
    } else if (cfg.domain.family == "fourier_star") {
      only_keys(d, "domain", {"family", "coeffs"});
      if (!d.contains("coeffs")) throw ConfigError("fourier_star needs coeffs");
      cfg.domain.params = numbers(d["coeffs"], "domain.coeffs");
      if (cfg.domain.params.empty() || cfg.domain.params.size() % 2 == 0)
        throw ConfigError("fourier_star coeffs must be [a0, a1, b1, a2, b2, ...]");
      cfg.dim = 2;
    } else if (cfg.domain.family == "ellipsoid") {
      only_keys(d, "domain", {"family", "a", "b", "c"});
      if (!d.contains("a") || !d.contains("b") || !d.contains("c")) throw ConfigError("ellipsoid needs a, b and c");
      cfg.domain.params = {positive(d["a"], "domain.a"), positive(d["b"], "domain.b"), positive(d["c"], "domain.c")};
      cfg.dim = 3;
    } else {
      throw ConfigError("unknown domain family '" + cfg.domain.family + "'");
    }
  }
  const std::size_t n = static_cast<std::size_t>(cfg.dim);

  if (j.contains("body")) {
    const json& b = j["body"];
    only_keys(b, "body", {"family", "Q", "c"});
    if (!b.contains("family")) throw ConfigError("body.family is required");
    cfg.body.family = text(b["family"], "body.family");
    if (cfg.body.family == "euclidean_ball") {
      if (b.contains("Q") || b.contains("c")) throw ConfigError("euclidean_ball takes no Q or c");
    } else if (cfg.body.family == "ellipsoid" || cfg.body.family == "translated_ellipsoid") {
      if (!b.contains("Q")) throw ConfigError("body.Q is required");
      cfg.body.q = matrix(b["Q"], "body.Q");
      if (cfg.body.q.size() != n * n) throw ConfigError("body.Q has the wrong size for this domain");
      if (cfg.body.family == "translated_ellipsoid") {
        if (!b.contains("c")) throw ConfigError("body.c is required");
        cfg.body.c = numbers(b["c"], "body.c");
        if (cfg.body.c.size() != n) throw ConfigError("body.c has the wrong size for this domain");
      } else if (b.contains("c")) {
        throw ConfigError("ellipsoid takes no c; use translated_ellipsoid");
      }
    } else {
      throw ConfigError("unknown body family '" + cfg.body.family + "'");
    }
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    only_keys(g, "grid", {"nx", "ny", "nz", "bbox"});
    if (g.contains("nx")) cfg.grid.nx = count(g["nx"], "grid.nx", 2);
    if (g.contains("ny")) cfg.grid.ny = count(g["ny"], "grid.ny", 2);
    if (g.contains("nz")) {
      if (cfg.dim != 3) throw ConfigError("grid.nz only applies to 3D domains");
      cfg.grid.nz = count(g["nz"], "grid.nz", 2);
    }
    if (g.contains("bbox")) {
      const json& bb = g["bbox"];
      if (bb.is_string()) {
        if (bb.get<std::string>() != "auto") throw ConfigError("grid.bbox must be \"auto\" or {lo, hi}");
      } else {
        only_keys(bb, "grid.bbox", {"lo", "hi"});
        if (!bb.contains("lo") || !bb.contains("hi")) throw ConfigError("grid.bbox needs lo and hi");
        cfg.grid.lo = numbers(bb["lo"], "grid.bbox.lo");
        cfg.grid.hi = numbers(bb["hi"], "grid.bbox.hi");
        if (cfg.grid.lo->size() != n || cfg.grid.hi->size() != n) throw ConfigError("grid.bbox has the wrong size");
        for (std::size_t i = 0; i < n; ++i)
          if (!((*cfg.grid.hi)[i] > (*cfg.grid.lo)[i])) throw ConfigError("grid.bbox needs hi > lo");
      }
    }
  }
  if (cfg.dim == 3 && cfg.grid.nz == 0) cfg.grid.nz = cfg.grid.nx;

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    only_keys(t, "tolerances", {"tol_cluster", "rel_tol_value", "rel_tol_cut", "tol_focal"});
    if (t.contains("tol_cluster")) cfg.tol.tol_cluster = positive(t["tol_cluster"], "tolerances.tol_cluster");
    if (t.contains("rel_tol_value")) cfg.tol.rel_tol_value = positive(t["rel_tol_value"], "tolerances.rel_tol_value");
    if (t.contains("rel_tol_cut")) cfg.tol.rel_tol_cut = positive(t["rel_tol_cut"], "tolerances.rel_tol_cut");
    if (t.contains("tol_focal")) cfg.tol.tol_focal = positive(t["tol_focal"], "tolerances.tol_focal");
  }

  if (j.contains("options")) {
    const json& o = j["options"];
    only_keys(o, "options",
              {"seeds_per_axis", "boundary_resolution", "ray_order", "grid_resolution", "gradient", "exterior",
               "verify_monotone", "integrand", "bump", "source", "mc_samples", "rays", "render_field"});
    Options& op = cfg.options;
    if (o.contains("seeds_per_axis")) op.seeds_per_axis = count(o["seeds_per_axis"], "options.seeds_per_axis", 8);
    if (o.contains("boundary_resolution"))
      op.boundary_resolution = count(o["boundary_resolution"], "options.boundary_resolution", 64);
    if (o.contains("ray_order")) op.ray_order = count(o["ray_order"], "options.ray_order", 8);
    if (o.contains("grid_resolution")) op.grid_resolution = count(o["grid_resolution"], "options.grid_resolution", 2);
    if (o.contains("gradient")) op.gradient = boolean(o["gradient"], "options.gradient");
    if (o.contains("exterior")) op.exterior = boolean(o["exterior"], "options.exterior");
    if (o.contains("verify_monotone")) op.verify_monotone = boolean(o["verify_monotone"], "options.verify_monotone");
    if (o.contains("integrand")) {
      op.integrand = text(o["integrand"], "options.integrand");
      if (op.integrand != "one" && op.integrand != "distance" && op.integrand != "bump")
        throw ConfigError("options.integrand must be one, distance or bump");
    }
    if (o.contains("bump")) {
      const json& b = o["bump"];
      only_keys(b, "options.bump", {"center", "radius"});
      BumpSpec bs;
      if (!b.contains("center")) throw ConfigError("options.bump.center is required");
      bs.center = numbers(b["center"], "options.bump.center");
      if (bs.center.size() != n) throw ConfigError("options.bump.center has the wrong size");
      if (b.contains("radius")) bs.radius = positive(b["radius"], "options.bump.radius");
      op.bump = bs;
    }
    if (op.integrand == "bump" && !op.bump) throw ConfigError("integrand bump needs options.bump");
    if (o.contains("source")) {
      op.source = number(o["source"], "options.source");
      if (op.source < 0.0) throw ConfigError("options.source must be non-negative");
    }
    if (o.contains("mc_samples")) op.mc_samples = static_cast<std::size_t>(count(o["mc_samples"], "options.mc_samples", 0));
    if (o.contains("rays")) op.rays = count(o["rays"], "options.rays", 0);
    if (o.contains("render_field")) {
      op.render_field = text(o["render_field"], "options.render_field");
      if (op.render_field != "distance" && op.render_field != "transport" && op.render_field != "none")
        throw ConfigError("options.render_field must be distance, transport or none");
    }
  }

  if (j.contains("output")) cfg.output = text(j["output"], "output");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ConfigError("seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Config -> library objects

template <int N>
GaugeBody<N> make_body(const BodySpec& s) {
  try {
    if (s.family == "euclidean_ball") return GaugeBody<N>::euclidean_ball();
    const Mat<N> q = Eigen::Map<const Eigen::Matrix<double, N, N, Eigen::RowMajor>>(s.q.data());
    if (s.family == "ellipsoid") return GaugeBody<N>::ellipsoid(q);
    return GaugeBody<N>::translated_ellipsoid(q, Eigen::Map<const Vec<N>>(s.c.data()));
  } catch (const InvalidBody& e) {
    throw ConfigError(e.what());
  }
}

template <int N>
Domain<N> make_domain(const DomainSpec& s) {
  try {
    if constexpr (N == 2) {
      if (s.family == "ellipse") return Domain<2>::ellipse(s.params[0], s.params[1]);
      return Domain<2>::fourier_star(s.params);
    } else {
      return Domain<3>::ellipsoid(s.params[0], s.params[1], s.params[2]);
    }
  } catch (const InvalidDomain& e) {
    throw ConfigError(e.what());
  }
}

inline ProjectionOptions projection_options(const RunConfig& c) {
  ProjectionOptions p;
  p.seeds_per_axis = c.options.seeds_per_axis;
  p.tol_cluster = c.tol.tol_cluster;
  p.rel_tol_value = c.tol.rel_tol_value;
  return p;
}

inline CutOptions cut_options(const RunConfig& c) {
  CutOptions o;
  o.projection = projection_options(c);
  o.rel_tol_cut = c.tol.rel_tol_cut;
  o.tol_focal = c.tol.tol_focal;
  o.verify_monotone = c.options.verify_monotone;
  o.exterior = c.options.exterior;
  return o;
}

}  // namespace minkdist::app
