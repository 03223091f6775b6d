#ifndef BVY_GRID_HPP
#define BVY_GRID_HPP

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "bvy/point.hpp"

namespace bvy {

/// Uniform tensor grid of cell centers over [-half_width, half_width]^dim.
struct GridSpec {
  int dim = 1;
  double half_width = 4.0;
  std::array<int, kMaxDim> counts{400, 1, 1};

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(counts[i]);
    return s;
  }
  double spacing(int axis) const { return 2.0 * half_width / counts[axis]; }
  double cell_measure() const {
    double m = 1.0;
    for (int i = 0; i < dim; ++i) m *= spacing(i);
    return m;
  }
  /// The same box with every axis count multiplied by `factor`.
  GridSpec refined(int factor) const {
    GridSpec g = *this;
    for (int i = 0; i < dim; ++i) g.counts[i] *= factor;
    return g;
  }
};

/// A non-negative field sampled at cell centers, with the Lebesgue measure
/// of each cell. Assumed zero outside B(0, coverage_radius). When `grid` is
/// set, nodes are in tensor order with axis 0 varying fastest.
struct SampledField {
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<double> cell_measures;
  std::vector<double> values;
  double coverage_radius = 0.0;
  std::optional<GridSpec> grid;

  std::size_t size() const { return nodes.size(); }

  /// Same carrier, new values.
  SampledField with_values(std::vector<double> v) const {
    require(v.size() == nodes.size(), "SampledField::with_values: size mismatch");
    SampledField out = *this;
    out.values = std::move(v);
    return out;
  }

  template <class F>
  SampledField map(F&& op) const {
    SampledField out = *this;
    for (auto& v : out.values) v = op(v);
    return out;
  }
};

inline SampledField make_carrier(const GridSpec& g) {
  check_dim(g.dim);
  for (int i = 0; i < g.dim; ++i)
    require(g.counts[i] >= 1, "GridSpec: counts must be positive");
  require(g.half_width > 0.0, "GridSpec: half_width must be positive");
  SampledField f;
  f.dim = g.dim;
  f.grid = g;
  f.coverage_radius = g.half_width * std::sqrt(static_cast<double>(g.dim));
  const std::size_t n = g.size();
  f.nodes.resize(n);
  f.cell_measures.assign(n, g.cell_measure());
  f.values.assign(n, 0.0);
  const int n0 = g.counts[0];
  const int n1 = g.dim > 1 ? g.counts[1] : 1;
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::array<std::size_t, 3> ijk{idx % n0, (idx / n0) % n1, idx / (static_cast<std::size_t>(n0) * n1)};
    Point p{};
    for (int a = 0; a < g.dim; ++a)
      p[a] = -g.half_width + (static_cast<double>(ijk[a]) + 0.5) * g.spacing(a);
    f.nodes[idx] = p;
  }
  return f;
}

/// Samples `fn(x)` at every cell center of `g`.
template <class F>
SampledField sample(const GridSpec& g, F&& fn) {
  SampledField f = make_carrier(g);
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = fn(f.nodes[i]);
  return f;
}

}  // namespace bvy

#endif  // BVY_GRID_HPP
