#pragma once

#include <cstddef>
#include <vector>

#include "vlx/grid.hpp"

namespace vlx::specfun {

struct MlParams {
  double alpha = 1.0;
  double beta = 1.0;
};

// 1/Gamma(x); zero at the poles x = 0, -1, -2, ...
double rgamma(double x);

// E_{alpha,beta}(z), alpha in (0,1], beta > 0. Throws NumericalError naming
// z and the regime when an evaluation branch fails to converge.
double mittag_leffler(MlParams p, double z);

// Generalized binomial coefficient C(a, k).
double binomial(double a, int k);

// Product-integration weights on unit spacing:
//   int_0^n (n-u)^a u^b phi(u) du  ~=  sum_j w[j] phi(j),
// exact for phi piecewise linear between integer nodes. a, b > -1.
// Multiply by dt^(a+b+1) for spacing dt.
void product_weights(double a, double b, std::size_t n, std::vector<double>& w);
// Same weights assembled cell by cell from quadrature/series moments; slower,
// used as the independent rule for defect checks.
void product_weights_cells(double a, double b, std::size_t n, std::vector<double>& w);

// Closed-form Toeplitz weights of the fractional trapezoid rule (b = 0) and
// the matching rectangle predictor, in the classical Diethelm normalisation.
class FractionalTrapezoid {
 public:
  FractionalTrapezoid(double order, std::size_t max_steps);

  double order() const { return order_; }
  std::size_t max_steps() const { return interior_.size() - 1; }

  // Corrector weight of node j at step n, in units dt^order / Gamma(order+2).
  double corrector(std::size_t n, std::size_t j) const;
  // Predictor weight of node j < n at step n, in units dt^order / Gamma(order+1).
  double predictor(std::size_t n, std::size_t j) const { return rect_[n - j]; }

 private:
  double order_;
  std::vector<double> interior_;  // (m+1)^p - 2m^p + (m-1)^p, p = order+1
  std::vector<double> start_;     // (n-1)^p - n^order (n - p)
  std::vector<double> rect_;      // m^order - (m-1)^order
};

// I^order f on the grid of f, order in [0, 1] (order 0 is the identity).
GridFn fractional_integral(double order, const GridFn& f);
// Same, at a single node.
double fractional_integral_at(double order, const GridFn& f, std::size_t n);

}  // namespace vlx::specfun
