#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vlx/error.hpp"
#include "vlx/mc.hpp"

namespace vlx::mc {

namespace {

constexpr int kPanelsPerUnitLog = 200;

}  // namespace

JumpTable::JumpTable(const levy::LevyMeasureSpec& m, double delta) : delta_(delta) {
  using Kind = levy::LevyMeasureSpec::Kind;
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("jump_trunc must be positive and finite");
  if (m.kind() == Kind::None) return;

  double lo = delta;
  double hi = 0.0;
  if (m.kind() == Kind::Cgmy) {
    const auto& p = m.cgmy_params();
    // int_0^delta x^2 C e^{-Mx} x^{-1-Y} dx
    var_ = p.C * std::tgamma(2.0 - p.Y) * std::pow(p.M, p.Y - 2.0) * boost::math::gamma_p(2.0 - p.Y, p.M * delta);
    // beyond hi the tail mass is below e^{-45} of the mass near delta
    hi = delta + 45.0 / p.M;
  } else {
    const auto* r = m.rule();
    lo = std::max(delta, r->lower);
    hi = r->upper;
    if (delta > r->lower) {
      boost::math::quadrature::tanh_sinh<double> ts;
      const double top = std::min(delta, r->upper);
      var_ = ts.integrate([&](double x) { return x * x * r->density(x); }, r->lower, top);
    }
    if (lo >= hi) return;
  }
  if (!std::isfinite(var_)) throw ConfigError("jump_trunc: small-jump variance is not finite");

  const int panels = std::max(64, static_cast<int>(std::ceil(std::log(hi / lo) * kPanelsPerUnitLog)));
  const double ratio = std::pow(hi / lo, 1.0 / panels);
  x_.resize(panels + 1);
  cdf_.assign(panels + 1, 0.0);
  x_[0] = lo;
  for (int i = 1; i <= panels; ++i) x_[i] = i == panels ? hi : x_[i - 1] * ratio;
  using GL = boost::math::quadrature::gauss<double, 8>;
  for (int i = 0; i < panels; ++i) {
    const double mass = GL::integrate([&](double x) { return m.density(x); }, x_[i], x_[i + 1]);
    mean_ += GL::integrate([&](double x) { return x * m.density(x); }, x_[i], x_[i + 1]);
    cdf_[i + 1] = cdf_[i] + mass;
  }
  rate_ = cdf_.back();
  if (!std::isfinite(rate_) || !std::isfinite(mean_)) throw ConfigError("jump_trunc: jump rate above the threshold is not finite");
}

double JumpTable::sample(double u) const {
  const double target = u * rate_;
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.begin()) return x_.front();
  if (it == cdf_.end()) return x_.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double w = cdf_[i + 1] - cdf_[i];
  const double lam = w > 0.0 ? (target - cdf_[i]) / w : 0.0;
  return x_[i] + lam * (x_[i + 1] - x_[i]);
}

}  // namespace vlx::mc
