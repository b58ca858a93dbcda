#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "vlx/curves.hpp"
#include "vlx/grid.hpp"
#include "vlx/kernels.hpp"
#include "vlx/levy.hpp"

namespace vlx::vie {

enum class Scheme {
  // Product trapezoid on the equivalent form psi = kappa*f + kappa*Gbar(psi),
  // kappa(t) = (1/eps) t^{alpha-1} E_{alpha,alpha}(-(lambda/eps) t^alpha):
  // the stiff linear part is integrated exactly.
  Resolvent,
  Implicit,  // product trapezoid with the power kernel, node value by Newton
  Pece       // power kernel, rectangle predictor and trapezoid corrector
};

const char* scheme_name(Scheme s);

// eps psi(t) = int_0^t K(t-s) (f(s) - lambda psi(s) + sigma^2 psi(s)^2 / 2 + V1(psi(s))) ds
// with the power kernel K(t) = t^{alpha-1}/Gamma(alpha) on [0, forcing.horizon()].
struct RiccatiProblem {
  kernels::KernelSpec kernel = kernels::KernelSpec::power(0.7);
  double lambda = 1.0;
  double epsilon = 1.0;
  PiecewiseConstant forcing = PiecewiseConstant::constant(-1.0, 1.0);
  double sigma = 0.0;
  levy::LevyMeasureSpec measure;
  std::size_t n_steps = 2000;
  Scheme scheme = Scheme::Resolvent;
  // Bound on the re-evaluated node residual, in units of psi.
  double tol = 1e-8;

  double alpha() const { return kernel.alpha; }
  double horizon() const { return forcing.horizon(); }
  void validate() const;
};

// Smallest n >= requested for which every forcing break is a grid node.
std::size_t aligned_steps(const PiecewiseConstant& f, std::size_t requested);

struct SolutionPath {
  GridFn grid;
  std::string scheme;
  double max_defect = 0.0;
  kernels::KernelSpec kernel;
};

SolutionPath adams_solve(const RiccatiProblem& problem);

// Exact I^alpha f and (kappa_eps * f) for the piecewise-constant forcing at time t,
// where kappa_eps solves the linear part eps psi = K * (f - lambda psi).
double forcing_integral(const PiecewiseConstant& f, double alpha, double t);
double linear_part(const RiccatiProblem& problem, double t);

struct BoundsReport {
  double max_value = 0.0;            // max psi
  double max_lower_violation = 0.0;  // max (kappa*f - psi), <= 0 when the bound holds
  double sup_norm = 0.0;
  double uniform_bound = std::numeric_limits<double>::infinity();  // ||f|| / lambda
  bool holds(double tol = 1e-8, double sign_tol = 1e-12) const;
  std::string describe() const;
};

BoundsReport check_bounds(const RiccatiProblem& problem, const SolutionPath& path);

// psi0 evaluated piece by piece, and the L1 / sup distances of a path to it.
std::vector<double> psi0_pieces(const RiccatiProblem& problem);
struct LimitGap {
  double l1 = 0.0;
  double linf = 0.0;
  double psi0_l1 = 0.0;
};
LimitGap limit_gap(const RiccatiProblem& problem, const SolutionPath& path);
// psi0 sampled on the path grid (right-continuous at breaks).
GridFn psi0_on_grid(const RiccatiProblem& problem, const GridFn& grid);

// ---- scalar-coefficient drive ----

// Solves phi = I^alpha(F(phi/eps)) for phi = eps y, where y solves the
// general problem with f = (p^2-p)/2, lambda' = lambda - rho p nu, sigma = nu.
RiccatiProblem prop11_problem(const levy::RiccatiCoeffs& c, double epsilon, double alpha, double T,
                              std::size_t n_steps);
SolutionPath prop11_phi(const levy::RiccatiCoeffs& c, double epsilon, double alpha, double T,
                        std::size_t n_steps);
// V0 I^{1-alpha} phi(t) + (lambda theta / eps) I^1 phi(t)
double prop11_log_mgf(const levy::RiccatiCoeffs& c, double epsilon, double alpha, double t,
                      std::size_t n_steps);

struct ScalingRow {
  double epsilon = 0.0;
  double max_rel_gap = 0.0;  // phi_eps vs eps psi(t eps^{-1/alpha}) over nodes t > 0
  double u1_gap = 0.0;       // sup_{t >= t_min} |phi_eps/eps - U1|
};
std::vector<ScalingRow> scaling_check(const levy::RiccatiCoeffs& c, double alpha,
                                      const std::vector<double>& eps_ladder, double T, std::size_t n_steps,
                                      double t_min = 0.1);

// ---- finite-dimensional distributions ----

// f(tau) = sum_{i >= k} u_i on [T - s_k, T - s_{k-1}), zero on [0, T - s_n);
// T <= 0 selects T = s_n.
PiecewiseConstant fdd_forcing(const std::vector<double>& times, const std::vector<double>& u, double T = 0.0);
// int_0^T G(s, psi(s)) xi0(T - s) ds with G(s, w) = f(s) + sigma^2 w^2/2 + V1(w).
double fdd_log_mgf_eps(const RiccatiProblem& problem, const PiecewiseLinearCurve& xi0_eps);
double fdd_log_mgf_eps(const RiccatiProblem& problem, const SolutionPath& path, const PiecewiseLinearCurve& xi0_eps);
// V0 - (V0 - theta) int_0^t f^{alpha, lambda/eps}, tabulated on n intervals of [0, t_max].
PiecewiseLinearCurve xi0_eps_curve(double alpha, double lambda, double epsilon, double v0, double theta,
                                   double t_max, std::size_t n);

// ---- hyper-rough limit ----

// Smaller root of phi = -u^2/2 + sigma^2 phi^2 / 2.
double hyper_rough_phi(double u, double sigma);
// phi = I^alpha(-u^2/2 + sigma^2 phi^2/2) on [0, T].
RiccatiProblem hyper_rough_problem(double alpha, double u, double sigma, double T, std::size_t n_steps);

}  // namespace vlx::vie
