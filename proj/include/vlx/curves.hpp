#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "vlx/error.hpp"

namespace vlx {

// Continuous piecewise-linear table, constant beyond its end points.
class PiecewiseLinearCurve {
 public:
  PiecewiseLinearCurve(std::vector<double> t, std::vector<double> v) : t_(std::move(t)), v_(std::move(v)) {
    if (t_.empty() || t_.size() != v_.size()) throw DomainError("PiecewiseLinearCurve: need matching non-empty tables");
    for (std::size_t i = 1; i < t_.size(); ++i)
      if (!(t_[i] > t_[i - 1])) throw DomainError("PiecewiseLinearCurve: abscissae must increase");
    for (double x : v_)
      if (!std::isfinite(x)) throw DomainError("PiecewiseLinearCurve: values must be finite");
  }

  static PiecewiseLinearCurve flat(double value) { return PiecewiseLinearCurve({0.0}, {value}); }

  double operator()(double t) const {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double lam = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return (1.0 - lam) * v_[i] + lam * v_[i + 1];
  }

  // Exact integral over [a, b].
  double integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    std::vector<double> cuts{a};
    for (double x : t_)
      if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    double s = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i)
      s += 0.5 * (cuts[i] - cuts[i - 1]) * ((*this)(cuts[i - 1]) + (*this)(cuts[i]));
    return s;
  }

  double min_value() const { return *std::min_element(v_.begin(), v_.end()); }
  double max_value() const { return *std::max_element(v_.begin(), v_.end()); }
  const std::vector<double>& knots() const { return t_; }
  const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> t_;
  std::vector<double> v_;
};

// Right-continuous step function on [0, T]: value[i] on [breaks[i], breaks[i+1]),
// the last piece closed at T.
class PiecewiseConstant {
 public:
  PiecewiseConstant(std::vector<double> breaks, std::vector<double> values, double horizon)
      : b_(std::move(breaks)), v_(std::move(values)), T_(horizon) {
    if (b_.empty() || b_.size() != v_.size()) throw DomainError("PiecewiseConstant: need matching non-empty tables");
    if (b_.front() != 0.0) throw DomainError("PiecewiseConstant: first piece must start at 0");
    for (std::size_t i = 1; i < b_.size(); ++i)
      if (!(b_[i] > b_[i - 1])) throw DomainError("PiecewiseConstant: breaks must increase");
    if (!(T_ > b_.back())) throw DomainError("PiecewiseConstant: horizon must exceed the last break");
    for (double x : v_)
      if (!std::isfinite(x)) throw DomainError("PiecewiseConstant: values must be finite");
  }

  static PiecewiseConstant constant(double value, double horizon) { return PiecewiseConstant({0.0}, {value}, horizon); }

  double operator()(double t) const {
    const auto it = std::upper_bound(b_.begin(), b_.end(), t);
    const std::size_t i = it == b_.begin() ? 0 : static_cast<std::size_t>(it - b_.begin()) - 1;
    return v_[i];
  }

  double horizon() const { return T_; }
  const std::vector<double>& breaks() const { return b_; }
  const std::vector<double>& values() const { return v_; }
  double sup_norm() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double max_value() const { return *std::max_element(v_.begin(), v_.end()); }

 private:
  std::vector<double> b_;
  std::vector<double> v_;
  double T_;
};

}  // namespace vlx
