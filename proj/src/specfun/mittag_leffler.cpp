#include <quadmath.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vlx/error.hpp"
#include "vlx/specfun.hpp"

namespace vlx::specfun {

namespace {

constexpr double kSeriesRadius = 5.0;
constexpr double kAsymptoticRadius = 50.0;
constexpr int kMaxTerms = 20000;
constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const char* regime, double a, double b, double z, const std::string& why) {
  std::ostringstream os;
  os.precision(17);
  os << "mittag_leffler: evaluation failed in " << regime << " regime (alpha=" << a
     << ", beta=" << b << ", z=" << z << "): " << why;
  throw NumericalError(os.str());
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// 1/Gamma(a k + b) in binary128, grown on demand. The solvers call the same
// (alpha, beta) pairs thousands of times, so a few tables are kept per thread.
const std::vector<__float128>& series_coefficients(double a, double b, std::size_t need) {
  struct Entry {
    double a, b;
    std::vector<__float128> c;
  };
  thread_local std::vector<Entry> cache;
  thread_local std::size_t next_slot = 0;
  Entry* e = nullptr;
  for (auto& x : cache)
    if (x.a == a && x.b == b) e = &x;
  if (!e) {
    if (cache.size() < 16) {
      cache.push_back({a, b, {}});
      e = &cache.back();
    } else {
      e = &cache[next_slot];
      next_slot = (next_slot + 1) % cache.size();
      *e = {a, b, {}};
    }
  }
  while (e->c.size() < need) {
    const __float128 arg = static_cast<__float128>(a) * e->c.size() + b;
    // 1/Gamma vanishes at the poles
    const bool pole = arg <= 0 && arg == floorq(arg);
    e->c.push_back(pole ? 0 : 1 / tgammaq(arg));
  }
  return e->c;
}

// Power series accumulated in binary128. Cancellation for z near -5 costs
// about 12 of the 34 available digits.
double series_quad(double a, double b, double z) {
  const __float128 zq = z;
  __float128 sum = 0;
  __float128 zk = 1;
  __float128 prev = 0;
  std::size_t have = 0;
  const std::vector<__float128>* c = nullptr;
  for (int k = 0; k < kMaxTerms; ++k) {
    if (static_cast<std::size_t>(k) >= have) {
      have = std::max<std::size_t>(64, 2 * have);
      c = &series_coefficients(a, b, have);
    }
    const __float128 term = zk * (*c)[k];
    sum += term;
    if (k > 2 && fabsq(term) <= fabsq(prev) && fabsq(term) < 1e-33Q * fabsq(sum) && (*c)[k] != 0) {
      return static_cast<double>(sum);
    }
    prev = term;
    zk *= zq;
  }
  fail("power-series", a, b, z, "term limit reached");
}

// Positive arguments: all terms positive, double accumulation is enough.
double series_positive(double a, double b, double z) {
  const double logz = std::log(z);
  double sum = 0.0;
  double prev = 0.0;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double term = std::exp(k * logz - std::lgamma(a * k + b));
    sum += term;
    if (!std::isfinite(sum)) fail("power-series", a, b, z, "overflow");
    if (k > 2 && term <= prev && term < 1e-17 * sum) return sum;
    prev = term;
  }
  fail("power-series", a, b, z, "term limit reached");
}

// E(z) ~ -sum_k z^{-k} / Gamma(beta - alpha k), z -> -inf, alpha < 1.
// Convergence is judged on the envelope |z|^-k |Gamma(1 - x)| / pi, since
// individual terms can vanish or nearly vanish at poles of Gamma.
std::optional<double> asymptotic(double a, double b, double z) {
  double sum = 0.0;
  double zk = 1.0;
  double last_env = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    zk /= z;
    const double x = b - a * k;
    sum += -zk * rgamma(x);
    const double env = std::abs(zk) * (x > 0.0 ? std::abs(rgamma(x)) : std::tgamma(1.0 - x) / kPi);
    if (k > 2 && env > last_env) return std::nullopt;
    if (k > 2 && env < 1e-17 * std::abs(sum)) return sum;
    last_env = env;
  }
  return std::nullopt;
}

// Integral representation valid for |arg z| > alpha*pi and beta < 1 + alpha,
// i.e. for every negative z when alpha < 1.
double integral_negative(double a, double b, double z) {
  const double s1 = std::sin(kPi * (1.0 - b));
  const double s2 = std::sin(kPi * (1.0 - b + a));
  const double c = std::cos(kPi * a);
  const double pw = (1.0 - b) / a;
  const double inva = 1.0 / a;
  auto kernel = [&](double chi) {
    if (chi <= 0.0) return 0.0;
    const double num = chi * s1 - z * s2;
    const double den = chi * chi - 2.0 * chi * z * c + z * z;
    return std::pow(chi, pw) * std::exp(-std::pow(chi, inva)) * num / den;
  };
  const double chi_max = std::pow(740.0, a);
  boost::math::quadrature::tanh_sinh<double> ts(12);
  double total = 0.0;
  double l1 = 0.0;
  double err_sum = 0.0;
  double lo = 0.0;
  for (double hi : {std::min(std::abs(z), chi_max), chi_max}) {
    if (hi <= lo) continue;
    double err = 0.0;
    double l1part = 0.0;
    total += ts.integrate(kernel, lo, hi, 1e-14, &err, &l1part);
    err_sum += err;
    l1 += l1part;
    lo = hi;
  }
  const double value = total / (a * kPi);
  if (!std::isfinite(value) || err_sum > 1e-11 * std::max(std::abs(total), 1e-300) + 1e-15 * l1)
    fail("integral", a, b, z, "quadrature error estimate too large");
  return value;
}

double negative_general(double a, double b, double z) {
  if (std::abs(z) >= kAsymptoticRadius) {
    if (auto v = asymptotic(a, b, z)) return *v;
  }
  if (b >= 1.0 + a) return (negative_general(a, b - a, z) - rgamma(b - a)) / z;
  return integral_negative(a, b, z);
}

double alpha_one_negative(double b, double z) {
  if (b == 1.0) return std::exp(z);
  if (b == std::floor(b)) {
    double e = std::exp(z);
    for (double m = 2.0; m <= b; m += 1.0) e = (e - rgamma(m - 1.0)) / z;
    return e;
  }
  if (b < 1.0) return rgamma(b) + z * alpha_one_negative(b + 1.0, z);
  // E_{1,b}(z) = (1/Gamma(b-1)) int_0^1 e^{zs} (1-s)^{b-2} ds for b > 1.
  boost::math::quadrature::tanh_sinh<double> ts(12);
  double err = 0.0;
  const double v = ts.integrate([&](double s, double sc) {
        const double one_minus = sc > 0.0 ? sc : 1.0 - s;
        return std::exp(z * s) * std::pow(one_minus, b - 2.0);
      },
                                0.0, 1.0, 1e-14, &err);
  if (!std::isfinite(v)) fail("alpha=1 integral", 1.0, b, z, "non-finite quadrature");
  return v * rgamma(b - 1.0);
}

}  // namespace

double rgamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > 171.0) return 0.0;
  if (x < 0.0) {
    // Reflection keeps 1/Gamma finite for large negative x.
    return std::sin(kPi * x) * std::tgamma(1.0 - x) / kPi;
  }
  return 1.0 / std::tgamma(x);
}

double binomial(double a, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c *= (a - i + 1) / i;
  return c;
}

double mittag_leffler(MlParams p, double z) {
  const double a = p.alpha;
  const double b = p.beta;
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("mittag_leffler: alpha must lie in (0,1]");
  if (!(b > 0.0)) throw DomainError("mittag_leffler: beta must be positive");
  if (std::isnan(z)) throw DomainError("mittag_leffler: z is NaN");
  if (z == 0.0) return rgamma(b);
  if (z > 0.0) {
    if (a == 1.0 && b == 1.0) return std::exp(z);
    if (z <= kSeriesRadius) return series_quad(a, b, z);
    return series_positive(a, b, z);
  }
  // For small alpha the series needs astronomically many terms once |z| > 1.
  const double radius = a >= 0.5 ? kSeriesRadius : 1.0;
  if (-z <= radius) return series_quad(a, b, z);
  if (a == 1.0) return alpha_one_negative(b, z);
  return negative_general(a, b, z);
}

}  // namespace vlx::specfun
