#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "vlx/error.hpp"
#include "vlx/kernels.hpp"
#include "vlx/specfun.hpp"

namespace vlx::kernels {

using specfun::mittag_leffler;
using specfun::rgamma;

KernelSpec KernelSpec::power(double alpha) {
  KernelSpec s{KernelKind::Power, alpha, 0.0, 1.0};
  s.validate();
  return s;
}

KernelSpec KernelSpec::mittag_leffler(double alpha, double lambda, double epsilon) {
  KernelSpec s{KernelKind::MittagLeffler, alpha, lambda, epsilon};
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  std::ostringstream os;
  if (kind == KernelKind::Power) {
    if (!(alpha > 0.0 && alpha <= 1.0)) os << "power kernel: alpha must lie in (0,1], got " << alpha;
  } else {
    if (!(alpha > 0.5 && alpha <= 1.0))
      os << "Mittag-Leffler kernel: alpha must lie in (1/2,1], got " << alpha;
    else if (!(lambda > 0.0))
      os << "Mittag-Leffler kernel: lambda must be positive, got " << lambda;
    else if (!(epsilon > 0.0))
      os << "Mittag-Leffler kernel: epsilon must be positive, got " << epsilon;
  }
  if (!os.str().empty()) throw DomainError(os.str());
}

namespace {
void require_positive_time(double t, const char* who) {
  if (!(t > 0.0)) {
    std::ostringstream os;
    os << who << ": t must be positive, got " << t;
    throw DomainError(os.str());
  }
}

double ml_regular(const KernelSpec& s, double t) {
  return mittag_leffler({s.alpha, s.alpha}, -(s.lambda / s.epsilon) * std::pow(t, s.alpha)) / s.epsilon;
}
}  // namespace

double kernel_eval(const KernelSpec& spec, double t) {
  spec.validate();
  require_positive_time(t, "kernel_eval");
  const double p = std::pow(t, spec.alpha - 1.0);
  if (spec.kind == KernelKind::Power) return p * rgamma(spec.alpha);
  return p * ml_regular(spec, t);
}

double kernel_mass(const KernelSpec& spec, double t) {
  spec.validate();
  if (t < 0.0) throw DomainError("kernel_mass: t must be non-negative");
  if (t == 0.0) return 0.0;
  const double ta = std::pow(t, spec.alpha);
  if (spec.kind == KernelKind::Power) return ta * rgamma(spec.alpha + 1.0);
  return ta / spec.epsilon *
         mittag_leffler({spec.alpha, spec.alpha + 1.0}, -(spec.lambda / spec.epsilon) * ta);
}

double ml_density(double alpha, double lambda, double t) {
  require_positive_time(t, "ml_density");
  if (!(alpha > 0.0 && alpha <= 1.0) || !(lambda > 0.0))
    throw DomainError("ml_density: need alpha in (0,1] and lambda > 0");
  return lambda * std::pow(t, alpha - 1.0) * mittag_leffler({alpha, alpha}, -lambda * std::pow(t, alpha));
}

double ml_density_tail(double alpha, double lambda, double t) {
  if (t < 0.0) throw DomainError("ml_density_tail: t must be non-negative");
  return mittag_leffler({alpha, 1.0}, -lambda * std::pow(t, alpha));
}

double ml_density_tail_asymptotic(double alpha, double lambda, double t) {
  require_positive_time(t, "ml_density_tail_asymptotic");
  return std::pow(t, -alpha) * rgamma(1.0 - alpha) / lambda;
}

double convolve_exact(const KernelSpec& a, double ca, const KernelSpec& b, double cb, double t) {
  a.validate();
  b.validate();
  require_positive_time(t, "convolve_exact");
  // xc is the signed distance to the nearest endpoint; using it keeps t - s
  // accurate where the left factor is singular.
  auto integrand = [&](double s, double xc) {
    const double left = xc < 0.0 ? -xc : s;
    const double right = xc > 0.0 ? xc : t - s;
    if (left <= 0.0 || right <= 0.0) return 0.0;
    return kernel_eval(a, right) * kernel_eval(b, left);
  };
  boost::math::quadrature::tanh_sinh<double> ts(15);
  double err = 0.0;
  double l1 = 0.0;
  const double v = ts.integrate(integrand, 0.0, t, 1e-13, &err, &l1);
  if (!std::isfinite(v) || err > 1e-10 * l1) {
    std::ostringstream os;
    os << "convolve_exact: quadrature did not converge at t=" << t << " (error estimate " << err << ")";
    throw NumericalError(os.str());
  }
  return ca * cb * v;
}

SingularGridFn sample_kernel(const KernelSpec& spec, double dt, std::size_t n, double scale) {
  spec.validate();
  if (!(dt > 0.0)) throw DomainError("sample_kernel: dt must be positive");
  GridFn reg(dt, std::vector<double>(n + 1));
  for (std::size_t k = 0; k <= n; ++k) {
    if (spec.kind == KernelKind::Power)
      reg[k] = rgamma(spec.alpha);
    else
      reg[k] = ml_regular(spec, reg.t(k));
    reg[k] *= scale;
  }
  return SingularGridFn(spec.alpha - 1.0, std::move(reg));
}

}  // namespace vlx::kernels
