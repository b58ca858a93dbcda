#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <vector>

#include "vlx/error.hpp"
#include "vlx/specfun.hpp"

namespace vlx::specfun {

namespace {

// (m+1)^p - 2 m^p + (m-1)^p without cancellation for large m.
double second_difference(double p, double m) {
  if (m < 4.0) return std::pow(m + 1.0, p) - 2.0 * std::pow(m, p) + std::pow(m - 1.0, p);
  const double x = 1.0 / m;
  double c = 1.0;  // C(p, k)
  double xk = 1.0;
  double s = 0.0;
  for (int k = 1; k < 80; ++k) {
    c *= (p - k + 1) / k;
    xk *= x;
    if (k % 2 == 1) continue;
    const double t = c * xk;
    s += t;
    if (std::abs(t) < 1e-18 * std::abs(s)) break;
  }
  return 2.0 * std::pow(m, p) * s;
}

// (n-1)^p - n^(p-1) (n - p) = n^p [ (1-1/n)^p - 1 + p/n ].
double start_weight(double p, double n) {
  if (n < 4.0) return std::pow(n - 1.0, p) - std::pow(n, p - 1.0) * (n - p);
  const double x = -1.0 / n;
  double c = p;
  double xk = x;
  double s = 0.0;
  for (int k = 2; k < 120; ++k) {
    c *= (p - k + 1) / k;
    xk *= x;
    const double t = c * xk;
    s += t;
    if (std::abs(t) < 1e-18 * std::abs(s)) break;
  }
  return std::pow(n, p) * s;
}

// m^q - (m-1)^q.
double rect_weight(double q, double m) {
  if (m <= 1.0) return 1.0;
  return -std::pow(m, q) * std::expm1(q * std::log1p(-1.0 / m));
}

template <int N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};
  GaussRule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    int i = 0;
    for (std::size_t k = 0; k < ab.size(); ++k) {
      // nodes on [-1,1] mapped to [0,1]
      x[i] = 0.5 * (1.0 + ab[k]);
      w[i++] = 0.5 * wt[k];
      x[i] = 0.5 * (1.0 - ab[k]);
      w[i++] = 0.5 * wt[k];
    }
  }
};

const GaussRule<4>& gl4() {
  static const GaussRule<4> r;
  return r;
}
const GaussRule<8>& gl8() {
  static const GaussRule<8> r;
  return r;
}
const GaussRule<16>& gl16() {
  static const GaussRule<16> r;
  return r;
}

template <int N>
void cell_moments(const GaussRule<N>& g, double a, double b, double n, double j, double& m0, double& m1) {
  m0 = 0.0;
  m1 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double u = j + g.x[i];
    const double v = g.w[i] * std::pow(n - u, a) * std::pow(u, b);
    m0 += v;
    m1 += v * g.x[i];
  }
}

// sum_k C(c,k) (-1/n)^k / (e + k), the binomial expansion of an end cell.
double end_series(double c, double e, double n) {
  const double x = -1.0 / n;
  double coef = 1.0;
  double xk = 1.0;
  double s = 1.0 / e;
  for (int k = 1; k < 400; ++k) {
    coef *= (c - k + 1) / k;
    xk *= x;
    const double t = coef * xk / (e + k);
    s += t;
    if (std::abs(t) < 1e-18 * std::abs(s) || coef == 0.0) break;
  }
  return s;
}

}  // namespace

void product_weights_cells(double a, double b, std::size_t n, std::vector<double>& w) {
  w.assign(n + 1, 0.0);
  if (n == 0) return;
  if (n == 1) {
    const double m0 = std::beta(b + 1.0, a + 1.0);
    const double m1 = std::beta(b + 2.0, a + 1.0);
    w[0] = m0 - m1;
    w[1] = m1;
    return;
  }
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    double m0 = 0.0;
    double m1 = 0.0;
    if (j == 0) {
      const double s = std::pow(nn, a);
      m0 = s * end_series(a, b + 1.0, nn);
      m1 = s * end_series(a, b + 2.0, nn);
    } else if (j == n - 1) {
      const double s = std::pow(nn, b);
      m0 = s * end_series(b, a + 1.0, nn);
      m1 = m0 - s * end_series(b, a + 2.0, nn);
    } else {
      const std::size_t d = std::min(j, n - 1 - j);
      const double jj = static_cast<double>(j);
      if (d >= 16)
        cell_moments(gl4(), a, b, nn, jj, m0, m1);
      else if (d >= 4)
        cell_moments(gl8(), a, b, nn, jj, m0, m1);
      else
        cell_moments(gl16(), a, b, nn, jj, m0, m1);
    }
    w[j] += m0 - m1;
    w[j + 1] += m1;
  }
}

void product_weights(double a, double b, std::size_t n, std::vector<double>& w) {
  if (!(a > -1.0 && b > -1.0)) throw DomainError("product_weights: exponents must exceed -1");
  if (b != 0.0) {
    product_weights_cells(a, b, n, w);
    return;
  }
  w.assign(n + 1, 0.0);
  if (n == 0) return;
  const double p = a + 2.0;
  const double norm = 1.0 / ((a + 1.0) * (a + 2.0));
  w[0] = start_weight(p, static_cast<double>(n)) * norm;
  for (std::size_t j = 1; j < n; ++j) w[j] = second_difference(p, static_cast<double>(n - j)) * norm;
  w[n] = norm;
}

FractionalTrapezoid::FractionalTrapezoid(double order, std::size_t max_steps) : order_(order) {
  if (!(order > 0.0 && order <= 1.0)) throw DomainError("FractionalTrapezoid: order must lie in (0,1]");
  const double p = order + 1.0;
  interior_.assign(max_steps + 1, 0.0);
  start_.assign(max_steps + 1, 0.0);
  rect_.assign(max_steps + 1, 0.0);
  interior_[0] = 1.0;
  for (std::size_t m = 1; m <= max_steps; ++m) {
    const double mm = static_cast<double>(m);
    interior_[m] = second_difference(p, mm);
    start_[m] = start_weight(p, mm);
    rect_[m] = rect_weight(order, mm);
  }
}

double FractionalTrapezoid::corrector(std::size_t n, std::size_t j) const {
  if (j == n) return 1.0;
  if (j == 0) return start_[n];
  return interior_[n - j];
}

}  // namespace vlx::specfun
