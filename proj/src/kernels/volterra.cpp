#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "vlx/error.hpp"
#include "vlx/kernels.hpp"
#include "vlx/specfun.hpp"

namespace vlx::kernels {

namespace {

void check_grids(const SingularGridFn& a, const SingularGridFn& b, const char* who) {
  if (a.steps() != b.steps() || a.dt() != b.dt()) {
    std::ostringstream os;
    os << who << ": functions live on different grids";
    throw DomainError(os.str());
  }
  if (!(a.exponent > -1.0 && b.exponent > -1.0)) {
    std::ostringstream os;
    os << who << ": exponents must exceed -1";
    throw DomainError(os.str());
  }
}

using WeightFn = void (*)(double, double, std::size_t, std::vector<double>&);

// Raw convolution values at nodes 1..n (node 0 left at 0).
std::vector<double> convolution_values(const SingularGridFn& a, const SingularGridFn& b, WeightFn weights) {
  const std::size_t n = a.steps();
  const double scale = std::pow(a.dt(), a.exponent + b.exponent + 1.0);
  std::vector<double> out(n + 1, 0.0);
  std::vector<double> w;
  for (std::size_t m = 1; m <= n; ++m) {
    weights(a.exponent, b.exponent, m, w);
    double s = 0.0;
    for (std::size_t j = 0; j <= m; ++j) s += w[j] * a.regular[m - j] * b.regular[j];
    out[m] = s * scale;
  }
  return out;
}

SingularGridFn convolve_with(const SingularGridFn& a, const SingularGridFn& b, WeightFn weights) {
  check_grids(a, b, "convolve");
  const auto raw = convolution_values(a, b, weights);
  const double e = a.exponent + b.exponent + 1.0;
  GridFn reg(a.dt(), raw);
  if (e >= 0.0) return SingularGridFn(0.0, std::move(reg));
  reg[0] = a.regular[0] * b.regular[0] * std::beta(a.exponent + 1.0, b.exponent + 1.0);
  for (std::size_t m = 1; m < reg.values.size(); ++m) reg[m] /= std::pow(reg.t(m), e);
  return SingularGridFn(e, std::move(reg));
}

}  // namespace

SingularGridFn convolve(const SingularGridFn& a, const SingularGridFn& b) {
  return convolve_with(a, b, specfun::product_weights);
}

SingularGridFn convolve_cells(const SingularGridFn& a, const SingularGridFn& b) {
  return convolve_with(a, b, specfun::product_weights_cells);
}

SingularGridFn combine(double ca, const SingularGridFn& a, double cb, const SingularGridFn& b) {
  if (a.steps() != b.steps() || a.dt() != b.dt()) throw DomainError("combine: different grids");
  const double e = std::min(a.exponent, b.exponent);
  GridFn reg(a.dt(), std::vector<double>(a.steps() + 1));
  for (std::size_t k = 0; k < reg.values.size(); ++k) {
    const double t = reg.t(k);
    auto lift = [&](const SingularGridFn& f) {
      const double p = f.exponent - e;
      if (p == 0.0) return f.regular[k];
      return k == 0 ? 0.0 : std::pow(t, p) * f.regular[k];
    };
    reg[k] = ca * lift(a) + cb * lift(b);
  }
  return SingularGridFn(e, std::move(reg));
}

double vie_defect(const SingularGridFn& k, const SingularGridFn& f, const SingularGridFn& x) {
  check_grids(k, x, "vie_defect");
  const auto conv = convolution_values(k, x, specfun::product_weights_cells);
  double worst = 0.0;
  for (std::size_t m = 1; m <= x.steps(); ++m) worst = std::max(worst, std::abs(x.at(m) + conv[m] - f.at(m)));
  return worst;
}

SingularGridFn linear_vie_solve(const SingularGridFn& k, const SingularGridFn& f, double tol) {
  check_grids(k, f, "linear_vie_solve");
  const std::size_t n = f.steps();
  const double a = k.exponent;
  const double b = f.exponent;
  const double dt = f.dt();
  const double scale = std::pow(dt, a + b + 1.0);
  const auto& g = k.regular.values;
  const auto& h = f.regular.values;

  GridFn chi(dt, std::vector<double>(n + 1, 0.0));
  chi[0] = h[0];
  std::vector<double> w;
  for (std::size_t m = 1; m <= n; ++m) {
    specfun::product_weights(a, b, m, w);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += w[j] * g[m - j] * chi[j];
    const double tb = b == 0.0 ? 1.0 : std::pow(chi.t(m), b);
    const double denom = tb + scale * w[m] * g[0];
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      std::ostringstream os;
      os << "linear_vie_solve: singular step at node " << m << " (pivot " << denom << ")";
      throw NumericalError(os.str());
    }
    chi[m] = (tb * h[m] - scale * s) / denom;
    if (!std::isfinite(chi[m])) {
      std::ostringstream os;
      os << "linear_vie_solve: non-finite value at node " << m;
      throw NumericalError(os.str());
    }
  }
  SingularGridFn x(b, std::move(chi));

  // Discrete defect with the solver's own weights; rounding-level by construction.
  const auto conv = convolution_values(k, x, specfun::product_weights);
  double worst = 0.0;
  std::size_t worst_node = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    const double d = std::abs(x.at(m) + conv[m] - f.at(m));
    if (d > worst) {
      worst = d;
      worst_node = m;
    }
  }
  if (worst > tol) {
    std::ostringstream os;
    os << "linear_vie_solve: defect " << worst << " exceeds tolerance " << tol << " at node " << worst_node
       << " (t=" << x.regular.t(worst_node) << ")";
    throw NumericalError(os.str());
  }
  return x;
}

GridFn linear_vie_solve(const GridFn& k, const GridFn& f, double tol) {
  return linear_vie_solve(SingularGridFn(k), SingularGridFn(f), tol).to_grid();
}

ResolventTable resolvent_second_kind(const SingularGridFn& k, double tol) {
  ResolventTable out;
  out.kernel = k;
  out.r = linear_vie_solve(k, k, tol);
  const auto conv = convolution_values(out.r, k, specfun::product_weights);
  for (std::size_t m = 1; m <= k.steps(); ++m)
    out.residual = std::max(out.residual, std::abs(out.r.at(m) + conv[m] - k.at(m)));
  return out;
}

ResolventTable resolvent_second_kind(const GridFn& k, double tol) {
  return resolvent_second_kind(SingularGridFn(k), tol);
}

}  // namespace vlx::kernels
