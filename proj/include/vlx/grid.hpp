#pragma once

#include <cstddef>
#include <vector>

namespace vlx {

// Samples on the uniform grid t_k = k * dt, k = 0..n.
struct GridFn {
  double dt = 0.0;
  std::vector<double> values;

  GridFn() = default;
  GridFn(double step, std::vector<double> v) : dt(step), values(std::move(v)) {}

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double t(std::size_t k) const { return static_cast<double>(k) * dt; }
  double horizon() const { return t(steps()); }
  double operator[](std::size_t k) const { return values[k]; }
  double& operator[](std::size_t k) { return values[k]; }

  template <class F>
  static GridFn sample(double step, std::size_t n, F&& f) {
    GridFn g(step, std::vector<double>(n + 1));
    for (std::size_t k = 0; k <= n; ++k) g.values[k] = f(g.t(k));
    return g;
  }

  static GridFn constant(double step, std::size_t n, double c) {
    return GridFn(step, std::vector<double>(n + 1, c));
  }
};

// t^exponent * regular(t). Lets kernels with an integrable singularity at 0
// live on the same grid without ever being evaluated at t = 0.
struct SingularGridFn {
  double exponent = 0.0;
  GridFn regular;

  SingularGridFn() = default;
  SingularGridFn(double e, GridFn r) : exponent(e), regular(std::move(r)) {}
  explicit SingularGridFn(GridFn r) : exponent(0.0), regular(std::move(r)) {}

  double dt() const { return regular.dt; }
  std::size_t steps() const { return regular.steps(); }
  // Value at node k >= 1 (node 0 is singular when exponent < 0).
  double at(std::size_t k) const;
  // Regular-grid version; requires exponent >= 0.
  GridFn to_grid() const;
};

}  // namespace vlx
