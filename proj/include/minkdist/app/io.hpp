#pragma once

#include "minkdist/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace minkdist::app {

// Fixed 17-significant-digit rendering so CSV values round-trip exactly.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline std::vector<std::string> axis_names(int dim, const std::string& prefix = "") {
  std::vector<std::string> n = {prefix + "x", prefix + "y"};
  if (dim == 3) n.push_back(prefix + "z");
  return n;
}

// Mask bits of a sampled field: bit 0 inside the domain, bit 1 singular
// (no unique projection, gradient undefined).
enum : int { flag_inside = 1, flag_singular = 2 };

// Node grid including both ends of every axis, x fastest.
template <int N>
struct SampleGrid {
  Vec<N> lo;
  Vec<N> hi;
  Eigen::Matrix<int, N, 1> dims;

  std::size_t size() const { return static_cast<std::size_t>(dims.prod()); }

  Vec<N> point(std::size_t idx) const {
    Vec<N> x;
    for (int k = 0; k < N; ++k) {
      const int i = static_cast<int>(idx % dims(k));
      idx /= dims(k);
      x(k) = lo(k) + (hi(k) - lo(k)) * i / (dims(k) - 1);
    }
    return x;
  }
};

template <int N>
SampleGrid<N> make_grid(const RunConfig& cfg, const Domain<N>& domain) {
  SampleGrid<N> g;
  if (cfg.grid.lo) {
    g.lo = Eigen::Map<const Vec<N>>(cfg.grid.lo->data());
    g.hi = Eigen::Map<const Vec<N>>(cfg.grid.hi->data());
  } else {
    const Vec<N> pad = 0.1 * (domain.box_hi() - domain.box_lo());
    g.lo = domain.box_lo() - pad;
    g.hi = domain.box_hi() + pad;
  }
  g.dims(0) = cfg.grid.nx;
  g.dims(1) = cfg.grid.ny;
  if constexpr (N == 3) g.dims(2) = cfg.grid.nz;
  return g;
}

template <int N>
std::vector<std::string> coords(const Vec<N>& x) {
  std::vector<std::string> c;
  for (int k = 0; k < N; ++k) c.push_back(fmt(x(k)));
  return c;
}

// ---------------------------------------------------------------------------
// SVG painter. World box is mapped onto a centred square of side 900 inside
// the 1000 x 1000 view box, y up.

class SvgCanvas {
 public:
  SvgCanvas(const Vec<2>& lo, const Vec<2>& hi) {
    centre_ = 0.5 * (lo + hi);
    scale_ = 900.0 / (hi - lo).maxCoeff();
  }

  double scale() const { return scale_; }
  const Vec<2>& centre() const { return centre_; }

  Vec<2> map(const Vec<2>& x) const {
    return Vec<2>(500.0 + scale_ * (x(0) - centre_(0)), 500.0 - scale_ * (x(1) - centre_(1)));
  }

  std::string pt(const Vec<2>& x) const {
    const Vec<2> v = map(x);
    return fmt_short(v(0)) + "," + fmt_short(v(1));
  }

  void open_layer(const std::string& id) { body_ += "  <g id=\"" + id + "\">\n"; }
  void close_layer() { body_ += "  </g>\n"; }
  void raw(const std::string& s) { body_ += "    " + s + "\n"; }

  void polyline(const std::vector<Vec<2>>& pts, const std::string& style, bool closed = false) {
    if (pts.empty()) return;
    std::string s = closed ? "<polygon points=\"" : "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + pt(pts[i]);
    raw(s + "\" " + style + "/>");
  }

  void circle(const Vec<2>& x, double r, const std::string& style) {
    const Vec<2> v = map(x);
    raw("<circle cx=\"" + fmt_short(v(0)) + "\" cy=\"" + fmt_short(v(1)) + "\" r=\"" + fmt_short(r) + "\" " + style +
        "/>");
  }

  void line(const Vec<2>& a, const Vec<2>& b, const std::string& style) {
    const Vec<2> p = map(a);
    const Vec<2> q = map(b);
    raw("<line x1=\"" + fmt_short(p(0)) + "\" y1=\"" + fmt_short(p(1)) + "\" x2=\"" + fmt_short(q(0)) + "\" y2=\"" +
        fmt_short(q(1)) + "\" " + style + "/>");
  }

  std::string document() const {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" viewBox=\"0 0 1000 1000\">\n";
    s += "  <metadata id=\"transform\">view_x = 500 + " + fmt(scale_) + " * (x - " + fmt(centre_(0)) +
         "); view_y = 500 - " + fmt(scale_) + " * (y - " + fmt(centre_(1)) + ")</metadata>\n";
    s += "  <rect x=\"0\" y=\"0\" width=\"1000\" height=\"1000\" fill=\"white\"/>\n";
    return s + body_ + "</svg>\n";
  }

 private:
  Vec<2> centre_;
  double scale_ = 1.0;
  std::string body_;
};

// Sequential colour ramp on [0, 1]: white to dark blue.
inline std::string ramp(double s) {
  s = std::clamp(s, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 - 215 * s));
  const int g = static_cast<int>(std::lround(255 - 165 * s));
  const int b = static_cast<int>(std::lround(255 - 55 * s));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace minkdist::app
