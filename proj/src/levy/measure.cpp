#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "vlx/error.hpp"
#include "vlx/levy.hpp"
#include "vlx/specfun.hpp"

namespace vlx::levy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// e^z - 1 - z
double phi2(double z) {
  if (std::abs(z) < 0.1) {
    double term = z * z / 2.0;
    double s = term;
    for (int k = 3; k < 14; ++k) {
      term *= z / k;
      s += term;
    }
    return s;
  }
  return std::expm1(z) - z;
}

// (1-x)^Y - 1 + Y x
double cgmy_bracket(double Y, double x) {
  if (std::abs(x) < 0.5) {
    double c = Y;
    double xk = -x;
    double s = 0.0;
    for (int k = 2; k < 200; ++k) {
      c *= (Y - k + 1) / k;
      xk *= -x;
      const double t = c * xk;
      s += t;
      if (std::abs(t) < 1e-18 * std::abs(s)) break;
    }
    return s;
  }
  return std::pow(1.0 - x, Y) - 1.0 + Y * x;
}

std::shared_ptr<TabulatedRule> build_rule(const std::function<double(double)>& density, double lower, double upper,
                                          int panels) {
  using G = boost::math::quadrature::gauss<double, 8>;
  auto rule = std::make_shared<TabulatedRule>();
  rule->density = density;
  rule->lower = lower;
  rule->upper = upper;
  const double ratio = std::pow(upper / lower, 1.0 / panels);
  double a = lower;
  for (int i = 0; i < panels; ++i) {
    const double b = i + 1 == panels ? upper : a * ratio;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    for (std::size_t k = 0; k < ab.size(); ++k)
      for (double sgn : {-1.0, 1.0}) {
        const double x = mid + sgn * half * ab[k];
        const double d = density(x);
        if (!(d >= 0.0) || !std::isfinite(d)) {
          std::ostringstream os;
          os << "tabulated Levy density must be finite and non-negative, got " << d << " at x=" << x;
          throw DomainError(os.str());
        }
        rule->x.push_back(x);
        rule->w.push_back(half * wt[k] * d);
      }
    a = b;
  }
  return rule;
}

double rule_moment(const TabulatedRule& r, int k) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * std::pow(r.x[i], k);
  return s;
}

}  // namespace

LevyMeasureSpec LevyMeasureSpec::cgmy(double C, double M, double Y) {
  std::ostringstream os;
  if (!(C > 0.0)) os << "CGMY: C must be positive, got " << C;
  else if (!(M > 0.0)) os << "CGMY: M must be positive, got " << M;
  else if (!(Y > 0.0 && Y < 2.0) || Y == 1.0) os << "CGMY: Y must lie in (0,2) and differ from 1, got " << Y;
  if (!os.str().empty()) throw DomainError(os.str());
  LevyMeasureSpec s;
  s.kind_ = Kind::Cgmy;
  s.cgmy_ = {C, M, Y};
  return s;
}

LevyMeasureSpec LevyMeasureSpec::tabulated(std::function<double(double)> density, double lower, double upper,
                                           int panels_per_decade) {
  if (!(lower > 0.0 && upper > lower && std::isfinite(upper)))
    throw DomainError("tabulated Levy measure: need 0 < lower < upper < inf");
  if (panels_per_decade < 4) throw DomainError("tabulated Levy measure: too few panels");
  const int panels = std::max(8, static_cast<int>(std::ceil(std::log10(upper / lower) * panels_per_decade)));
  auto fine = build_rule(density, lower, upper, panels);
  const auto coarse = build_rule(density, lower, upper, (panels + 1) / 2);
  for (int k : {1, 2}) {
    const double a = rule_moment(*fine, k);
    const double b = rule_moment(*coarse, k);
    if (!std::isfinite(a) || std::abs(a - b) > 1e-8 * std::abs(a)) {
      std::ostringstream os;
      os << "tabulated Levy measure: moment " << k << " not resolved by quadrature (" << a << " vs " << b << ")";
      throw NumericalError(os.str());
    }
  }
  LevyMeasureSpec s;
  s.kind_ = Kind::Tabulated;
  s.rule_ = std::move(fine);
  return s;
}

double LevyMeasureSpec::density(double x) const {
  if (x <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::None:
      return 0.0;
    case Kind::Cgmy:
      return cgmy_.C * std::exp(-cgmy_.M * x) * std::pow(x, -1.0 - cgmy_.Y);
    case Kind::Tabulated:
      return (x < rule_->lower || x > rule_->upper) ? 0.0 : rule_->density(x);
  }
  return 0.0;
}

double LevyMeasureSpec::second_moment() const { return v1_second(*this, 0.0); }

double LevyMeasureSpec::support_upper() const {
  switch (kind_) {
    case Kind::None:
      return 0.0;
    case Kind::Cgmy:
      return kInf;
    case Kind::Tabulated:
      return rule_->upper;
  }
  return 0.0;
}

double LevyMeasureSpec::exponential_limit() const { return kind_ == Kind::Cgmy ? cgmy_.M : kInf; }

std::string LevyMeasureSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::None:
      os << "none";
      break;
    case Kind::Cgmy:
      os << "cgmy(C=" << cgmy_.C << ", M=" << cgmy_.M << ", Y=" << cgmy_.Y << ")";
      break;
    case Kind::Tabulated:
      os << "tabulated[" << rule_->lower << ", " << rule_->upper << "] with " << rule_->x.size() << " nodes";
      break;
  }
  return os.str();
}

namespace {
void check_cgmy_argument(const LevyMeasureSpec& m, double w) {
  if (m.kind() == LevyMeasureSpec::Kind::Cgmy && !(w < m.cgmy_params().M)) {
    std::ostringstream os;
    os << "v1: CGMY exponent is infinite for w >= M (w=" << w << ", M=" << m.cgmy_params().M << ")";
    throw DomainError(os.str());
  }
  if (std::isnan(w)) throw DomainError("v1: argument is NaN");
}
}  // namespace

double v1(const LevyMeasureSpec& m, double w) {
  check_cgmy_argument(m, w);
  switch (m.kind()) {
    case LevyMeasureSpec::Kind::None:
      return 0.0;
    case LevyMeasureSpec::Kind::Cgmy: {
      const auto& p = m.cgmy_params();
      return p.C * std::tgamma(-p.Y) * std::pow(p.M, p.Y) * cgmy_bracket(p.Y, w / p.M);
    }
    case LevyMeasureSpec::Kind::Tabulated: {
      const auto& r = *m.rule();
      double s = 0.0;
      for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * phi2(w * r.x[i]);
      return s;
    }
  }
  return 0.0;
}

double v1_prime(const LevyMeasureSpec& m, double w) {
  check_cgmy_argument(m, w);
  switch (m.kind()) {
    case LevyMeasureSpec::Kind::None:
      return 0.0;
    case LevyMeasureSpec::Kind::Cgmy: {
      const auto& p = m.cgmy_params();
      const double x = w / p.M;
      return -p.C * std::tgamma(-p.Y) * p.Y * std::pow(p.M, p.Y - 1.0) * std::expm1((p.Y - 1.0) * std::log1p(-x));
    }
    case LevyMeasureSpec::Kind::Tabulated: {
      const auto& r = *m.rule();
      double s = 0.0;
      for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * r.x[i] * std::expm1(w * r.x[i]);
      return s;
    }
  }
  return 0.0;
}

double v1_second(const LevyMeasureSpec& m, double w) {
  check_cgmy_argument(m, w);
  switch (m.kind()) {
    case LevyMeasureSpec::Kind::None:
      return 0.0;
    case LevyMeasureSpec::Kind::Cgmy: {
      const auto& p = m.cgmy_params();
      return p.C * std::tgamma(2.0 - p.Y) * std::pow(p.M - w, p.Y - 2.0);
    }
    case LevyMeasureSpec::Kind::Tabulated: {
      const auto& r = *m.rule();
      double s = 0.0;
      for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * r.x[i] * r.x[i] * std::exp(w * r.x[i]);
      return s;
    }
  }
  return 0.0;
}

double gbar(double sigma, const LevyMeasureSpec& m, double w) {
  if (w > 0.0) throw DomainError("gbar: w must be non-positive");
  return 0.5 * sigma * sigma * w * w + v1(m, w);
}

double gbar_prime(double sigma, const LevyMeasureSpec& m, double w) { return sigma * sigma * w + v1_prime(m, w); }

double h_fn(const LevyMeasureSpec& m, double w) {
  if (w >= 0.0) return 0.0;
  return v1(m, w) / w;
}

double h_tilde(const LevyMeasureSpec& m, double w1, double w2) {
  if (w1 > 0.0 || w2 > 0.0) throw DomainError("h_tilde: arguments must be non-positive");
  if (w1 == w2) return v1_prime(m, w1);
  const double d = w1 - w2;
  if (std::abs(d) > 1e-3 * (1.0 + std::abs(w1))) return (v1(m, w1) - v1(m, w2)) / d;
  // mean of V1' over [w2, w1]; the difference quotient would cancel
  using G = boost::math::quadrature::gauss<double, 8>;
  const double mid = 0.5 * (w1 + w2);
  const double half = 0.5 * d;
  double s = 0.0;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  for (std::size_t k = 0; k < ab.size(); ++k)
    s += 0.5 * wt[k] * (v1_prime(m, mid + half * ab[k]) + v1_prime(m, mid - half * ab[k]));
  return s;
}

}  // namespace vlx::levy
