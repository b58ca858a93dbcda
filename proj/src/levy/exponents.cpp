#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "vlx/error.hpp"
#include "vlx/levy.hpp"

namespace vlx::levy {

namespace {

[[noreturn]] void domain(const std::string& msg) { throw DomainError(msg); }

template <class F, class DF>
double bisect_then_newton(F&& g, DF&& dg, double lo, double hi, const char* who) {
  // g is monotone on [lo, hi] with a sign change; bisection to width 1e-8,
  // then safeguarded Newton.
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-8; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double gx = g(x);
    const double d = dg(x);
    if (gx == 0.0 || d == 0.0 || !std::isfinite(d)) break;
    double next = x - gx / d;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if ((g(next) > 0.0) == (glo > 0.0))
      lo = next;
    else
      hi = next;
    if (std::abs(next - x) <= 4e-16 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << who << ": root-finding produced a non-finite value";
    throw NumericalError(os.str());
  }
  return x;
}

}  // namespace

void LevyTriple::validate() const {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) domain("LevyTriple: sigma2 must be finite and non-negative");
  if (!std::isfinite(drift)) domain("LevyTriple: drift must be finite");
}

double big_lambda(const LevyTriple& z, double u) {
  if (u > 0.0) domain("big_lambda: u must be non-positive");
  return z.drift * u + 0.5 * z.sigma2 * u * u + v1(z.measure, u);
}

double big_lambda_prime(const LevyTriple& z, double u) { return z.drift + z.sigma2 * u + v1_prime(z.measure, u); }

double lambda_inverse(const LevyTriple& z, double q) {
  z.validate();
  if (!(q >= 0.0) || !std::isfinite(q)) domain("lambda_inverse: q must be finite and non-negative");
  if (z.drift > 0.0) domain("lambda_inverse: drift must be non-positive for a monotone exponent");
  if (z.drift == 0.0 && z.sigma2 == 0.0 && z.measure.kind() == LevyMeasureSpec::Kind::None)
    domain("lambda_inverse: degenerate triple (Lambda == 0)");
  if (q == 0.0) return 0.0;
  double lo = -1.0;
  while (big_lambda(z, lo) < q) {
    lo *= 2.0;
    if (lo < -1e300) {
      std::ostringstream os;
      os << "lambda_inverse: bracket [" << lo << ", 0] failed to reach q=" << q;
      throw NumericalError(os.str());
    }
  }
  const double hi = lo == -1.0 ? 0.0 : lo / 2.0;
  return bisect_then_newton([&](double u) { return big_lambda(z, u) - q; },
                            [&](double u) { return big_lambda_prime(z, u); }, lo, hi, "lambda_inverse");
}

double psi0_solve(double f_val, double lambda, double sigma, const LevyMeasureSpec& m) {
  if (!(f_val <= 0.0) || !std::isfinite(f_val)) domain("psi0_solve: forcing value must be finite and non-positive");
  if (!(lambda > 0.0)) domain("psi0_solve: lambda must be positive");
  if (!(sigma >= 0.0)) domain("psi0_solve: sigma must be non-negative");
  if (f_val == 0.0) return 0.0;
  auto phi = [&](double w) { return f_val - lambda * w + gbar(sigma, m, w); };
  // psi0 lies in [f/lambda, 0] since Gbar >= 0
  const double lo = f_val / lambda;
  if (phi(lo) == 0.0) return lo;
  std::uintmax_t iters = 300;
  const auto r = boost::math::tools::toms748_solve(phi, lo, 0.0, phi(lo), f_val,
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
  if (iters >= 300) {
    std::ostringstream os;
    os << "psi0_solve: no convergence for f=" << f_val << " within bracket [" << lo << ", 0]";
    throw NumericalError(os.str());
  }
  return 0.5 * (r.first + r.second);
}

void RiccatiCoeffs::validate() const {
  std::ostringstream os;
  if (!(rho >= -1.0 && rho <= 0.0)) os << "RiccatiCoeffs: rho must lie in [-1,0], got " << rho;
  else if (!(nu > 0.0)) os << "RiccatiCoeffs: nu must be positive, got " << nu;
  else if (!(lambda > 0.0)) os << "RiccatiCoeffs: lambda must be positive, got " << lambda;
  else if (!(theta > 0.0)) os << "RiccatiCoeffs: theta must be positive, got " << theta;
  else if (!(v0 >= 0.0)) os << "RiccatiCoeffs: V0 must be non-negative, got " << v0;
  else if (!std::isfinite(p)) os << "RiccatiCoeffs: p must be finite";
  if (!os.str().empty()) throw DomainError(os.str());
}

double riccati_f(const RiccatiCoeffs& c, double w) {
  return 0.5 * (c.p * c.p - c.p) + (c.rho * c.p * c.nu - c.lambda) * w + 0.5 * c.nu * c.nu * w * w;
}

double u1(const RiccatiCoeffs& c) {
  c.validate();
  if (!(c.p >= 0.0 && c.p <= 1.0)) domain("u1: p must lie in [0,1]");
  const double b = c.lambda - c.rho * c.p * c.nu;
  const double disc = b * b - c.nu * c.nu * (c.p * c.p - c.p);
  if (disc < 0.0) domain("u1: negative discriminant");
  // product of the roots is (p^2 - p)/nu^2; divide by the larger one
  return (c.p * c.p - c.p) / (b + std::sqrt(disc));
}

double nig_log_mgf(const RiccatiCoeffs& c, double p, double t) {
  if (!(t >= 0.0)) domain("nig_log_mgf: t must be non-negative");
  RiccatiCoeffs q = c;
  q.p = p;
  return c.lambda * c.theta * u1(q) * t;
}

void SpectrallyNegativeTriple::validate() const {
  if (!(gamma >= 0.0)) domain("SpectrallyNegativeTriple: drift gamma = E[X_1] must be non-negative");
  if (!(sigma2 >= 0.0)) domain("SpectrallyNegativeTriple: sigma2 must be non-negative");
  if (gamma == 0.0 && sigma2 == 0.0 && jumps.kind() == LevyMeasureSpec::Kind::None)
    domain("SpectrallyNegativeTriple: degenerate (X == 0)");
}

SpectrallyNegativeTriple mirror(const LevyTriple& z) { return {-z.drift, z.sigma2, z.measure}; }

double v_exponent(const SpectrallyNegativeTriple& x, double p) {
  if (p < 0.0) domain("v_exponent: p must be non-negative");
  return 0.5 * x.sigma2 * p * p + x.gamma * p + v1(x.jumps, -p);
}

double v_inverse(const SpectrallyNegativeTriple& x, double q) {
  x.validate();
  if (!(q >= 0.0) || !std::isfinite(q)) domain("v_inverse: q must be finite and non-negative");
  if (q == 0.0) return 0.0;
  double hi = 1.0;
  while (v_exponent(x, hi) < q) {
    hi *= 2.0;
    if (hi > 1e300) {
      std::ostringstream os;
      os << "v_inverse: bracket [0, " << hi << "] failed to reach q=" << q;
      throw NumericalError(os.str());
    }
  }
  const double lo = hi == 1.0 ? 0.0 : hi / 2.0;
  auto dv = [&](double p) { return x.sigma2 * p + x.gamma - v1_prime(x.jumps, -p); };
  return bisect_then_newton([&](double p) { return v_exponent(x, p) - q; }, dv, lo, hi, "v_inverse");
}

double hitting_laplace(const SpectrallyNegativeTriple& x, double b, double q) {
  if (!(b >= 0.0)) domain("hitting_laplace: barrier b must be non-negative");
  if (!(q >= 0.0)) domain("hitting_laplace: q must be non-negative");
  if (b == 0.0 || q == 0.0) return 1.0;
  return std::exp(-b * v_inverse(x, q));
}

double subordinator_fdd_log_mgf(const LevyTriple& z, const PiecewiseLinearCurve& xi00,
                                const std::vector<double>& times, const std::vector<double>& u) {
  if (times.empty() || times.size() != u.size()) domain("subordinator_fdd_log_mgf: need matching times and u");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > (i == 0 ? 0.0 : times[i - 1]))) domain("subordinator_fdd_log_mgf: times must increase from 0");
    if (!(u[i] <= 0.0)) domain("subordinator_fdd_log_mgf: u must be non-positive");
  }
  if (xi00.min_value() < 0.0) domain("subordinator_fdd_log_mgf: xi00 must be non-negative");
  const double lambda = z.lambda();
  double tail = 0.0;
  double total = 0.0;
  for (std::size_t k = times.size(); k-- > 0;) {
    tail += u[k];
    if (tail == 0.0) continue;
    const double dg = lambda * xi00.integral(k == 0 ? 0.0 : times[k - 1], times[k]);
    total += lambda_inverse(z, -tail) * dg;
  }
  return total;
}

}  // namespace vlx::levy
