#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vlx/curves.hpp"

namespace vlx::levy {

struct CgmyParams {
  double C = 1.0;
  double M = 1.0;
  double Y = 0.5;
};

// Cached composite Gauss-Legendre rule for a tabulated density.
struct TabulatedRule {
  std::vector<double> x;
  std::vector<double> w;  // quadrature weight times density
  std::function<double(double)> density;
  double lower = 0.0;
  double upper = 0.0;
};

// Jump measure nu on (0, inf).
class LevyMeasureSpec {
 public:
  enum class Kind { None, Cgmy, Tabulated };

  LevyMeasureSpec() = default;
  static LevyMeasureSpec none() { return {}; }
  static LevyMeasureSpec cgmy(double C, double M, double Y);
  // nu(dx) = density(x) dx on [lower, upper], zero elsewhere.
  static LevyMeasureSpec tabulated(std::function<double(double)> density, double lower, double upper,
                                   int panels_per_decade = 48);

  Kind kind() const { return kind_; }
  const CgmyParams& cgmy_params() const { return cgmy_; }
  const TabulatedRule* rule() const { return rule_.get(); }

  double density(double x) const;
  double second_moment() const;
  // Upper bound of the support (infinity for CGMY).
  double support_upper() const;
  // Largest w for which V1(w) is finite (exclusive for CGMY).
  double exponential_limit() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::None;
  CgmyParams cgmy_{};
  std::shared_ptr<const TabulatedRule> rule_;
};

// V1(w) = int (e^{wx} - 1 - wx) nu(dx) and its first two derivatives.
double v1(const LevyMeasureSpec& m, double w);
double v1_prime(const LevyMeasureSpec& m, double w);
double v1_second(const LevyMeasureSpec& m, double w);

// Gbar(w) = sigma^2 w^2 / 2 + V1(w), w <= 0.
double gbar(double sigma, const LevyMeasureSpec& m, double w);
double gbar_prime(double sigma, const LevyMeasureSpec& m, double w);

// h(w) = V1(w)/w for w < 0, 0 otherwise; h~ is the divided difference of V1.
double h_fn(const LevyMeasureSpec& m, double w);
double h_tilde(const LevyMeasureSpec& m, double w1, double w2);

// Z_t = drift t + sqrt(sigma2) W_t + compensated jumps from `measure`.
struct LevyTriple {
  double drift = 0.0;
  double sigma2 = 0.0;
  LevyMeasureSpec measure;
  void validate() const;
  double lambda() const { return -drift; }
};

// Lambda(u) = drift u + sigma2 u^2 / 2 + V1(u).
double big_lambda(const LevyTriple& z, double u);
double big_lambda_prime(const LevyTriple& z, double u);
// Unique u <= 0 with Lambda(u) = q.
double lambda_inverse(const LevyTriple& z, double q);

// Unique psi0 <= 0 with f - lambda psi0 + Gbar(psi0) = 0.
double psi0_solve(double f_val, double lambda, double sigma, const LevyMeasureSpec& m);

struct RiccatiCoeffs {
  double p = 0.5;
  double rho = 0.0;
  double nu = 0.4;
  double lambda = 1.0;
  double theta = 0.04;
  double v0 = 0.04;
  void validate() const;
  double rho_bar2() const { return 1.0 - rho * rho; }
};

// F(w) = (p^2 - p)/2 + (rho p nu - lambda) w + nu^2 w^2 / 2.
double riccati_f(const RiccatiCoeffs& c, double w);
// Smallest root of F.
double u1(const RiccatiCoeffs& c);
// lambda theta U1(p) t, with U1 evaluated at the given p.
double nig_log_mgf(const RiccatiCoeffs& c, double p, double t);

// X_t = gamma t + sqrt(sigma2) W_t - (compensated jumps of `jumps`).
struct SpectrallyNegativeTriple {
  double gamma = 0.0;
  double sigma2 = 0.0;
  LevyMeasureSpec jumps;
  void validate() const;
};

SpectrallyNegativeTriple mirror(const LevyTriple& z);
// V(p) = sigma2 p^2/2 + gamma p + int_{R-} (e^{px} - 1 - px) nu_X(dx), p >= 0.
double v_exponent(const SpectrallyNegativeTriple& x, double p);
double v_inverse(const SpectrallyNegativeTriple& x, double q);
// E[exp(-q tau_b)] = exp(-b V^{-1}(q)).
double hitting_laplace(const SpectrallyNegativeTriple& x, double b, double q);

// log E[exp(sum_i u_i X_{g(s_i)})] for the subordinator X_t = H_{-t} of Z,
// g(t) = lambda int_0^t xi00.
double subordinator_fdd_log_mgf(const LevyTriple& z, const PiecewiseLinearCurve& xi00,
                                const std::vector<double>& times, const std::vector<double>& u);

}  // namespace vlx::levy
