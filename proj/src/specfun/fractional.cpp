#include <cmath>
#include <vector>

#include "vlx/error.hpp"
#include "vlx/specfun.hpp"

namespace vlx {

double SingularGridFn::at(std::size_t k) const {
  if (exponent == 0.0) return regular[k];
  if (k == 0) throw DomainError("SingularGridFn: value at t = 0 is singular");
  return std::pow(regular.t(k), exponent) * regular[k];
}

GridFn SingularGridFn::to_grid() const {
  if (exponent < 0.0) throw DomainError("SingularGridFn: cannot flatten a singular function");
  GridFn g = regular;
  if (exponent > 0.0) {
    g[0] = 0.0;
    for (std::size_t k = 1; k < g.values.size(); ++k) g[k] = at(k);
  }
  return g;
}

}  // namespace vlx

namespace vlx::specfun {

namespace {
void check_order(double order) {
  if (!(order >= 0.0 && order <= 1.0)) throw DomainError("fractional_integral: order must lie in [0,1]");
}
}  // namespace

double fractional_integral_at(double order, const GridFn& f, std::size_t n) {
  check_order(order);
  if (n > f.steps()) throw DomainError("fractional_integral_at: node out of range");
  if (order == 0.0) return f[n];
  if (n == 0) return 0.0;
  std::vector<double> w;
  product_weights_cells(order - 1.0, 0.0, n, w);
  double s = 0.0;
  for (std::size_t j = 0; j <= n; ++j) s += w[j] * f[j];
  return s * std::pow(f.dt, order) * rgamma(order);
}

GridFn fractional_integral(double order, const GridFn& f) {
  check_order(order);
  if (!(f.dt > 0.0)) throw DomainError("fractional_integral: dt must be positive");
  if (order == 0.0) return f;
  GridFn out(f.dt, std::vector<double>(f.values.size(), 0.0));
  if (order == 1.0) {
    for (std::size_t k = 1; k < f.values.size(); ++k)
      out[k] = out[k - 1] + 0.5 * f.dt * (f[k - 1] + f[k]);
    return out;
  }
  const double scale = std::pow(f.dt, order) * rgamma(order);
  std::vector<double> w;
  for (std::size_t n = 1; n < f.values.size(); ++n) {
    product_weights_cells(order - 1.0, 0.0, n, w);
    double s = 0.0;
    for (std::size_t j = 0; j <= n; ++j) s += w[j] * f[j];
    out[n] = s * scale;
  }
  return out;
}

}  // namespace vlx::specfun
