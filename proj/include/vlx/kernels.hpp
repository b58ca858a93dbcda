#pragma once

#include <cstddef>

#include "vlx/grid.hpp"

namespace vlx::kernels {

enum class KernelKind { Power, MittagLeffler };

// Power: K(t) = t^{alpha-1}/Gamma(alpha).
// MittagLeffler: kappa(t) = (1/eps) t^{alpha-1} E_{alpha,alpha}(-(lambda/eps) t^alpha).
struct KernelSpec {
  KernelKind kind = KernelKind::Power;
  double alpha = 1.0;
  double lambda = 0.0;
  double epsilon = 1.0;

  static KernelSpec power(double alpha);
  static KernelSpec mittag_leffler(double alpha, double lambda, double epsilon);
  // Power kernels accept alpha in (0,1]; Mittag-Leffler kernels need
  // alpha in (1/2,1], lambda > 0, epsilon > 0.
  void validate() const;
};

double kernel_eval(const KernelSpec& spec, double t);
// int_0^t kernel(s) ds
double kernel_mass(const KernelSpec& spec, double t);

// f^{alpha,lambda}(t) = lambda t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha)
double ml_density(double alpha, double lambda, double t);
// int_t^inf f^{alpha,lambda} = E_{alpha,1}(-lambda t^alpha)
double ml_density_tail(double alpha, double lambda, double t);
// leading large-t behaviour of the tail: t^{-alpha} / (lambda Gamma(1-alpha))
double ml_density_tail_asymptotic(double alpha, double lambda, double t);

// scale * kernel sampled as t^{alpha-1} * regular(t) on n steps of dt.
SingularGridFn sample_kernel(const KernelSpec& spec, double dt, std::size_t n, double scale = 1.0);

// (ca*a) * (cb*b) at a single time t > 0 by adaptive tanh-sinh quadrature
// of the closed-form kernels; independent of any grid.
double convolve_exact(const KernelSpec& a, double ca, const KernelSpec& b, double cb, double t);

// (a*b)(t_n) = int_0^{t_n} a(t_n - s) b(s) ds with product-integration
// weights exact for piecewise-linear regular parts. The result carries
// exponent min(0, ea + eb + 1).
SingularGridFn convolve(const SingularGridFn& a, const SingularGridFn& b);
// Same, with the cell-quadrature weight rule.
SingularGridFn convolve_cells(const SingularGridFn& a, const SingularGridFn& b);

// ca * a + cb * b on a common grid, expressed with the smaller exponent.
SingularGridFn combine(double ca, const SingularGridFn& a, double cb, const SingularGridFn& b);

// Solves x + k*x = f by sequential time stepping; x has f's exponent.
// Throws NumericalError when the node defect exceeds tol.
SingularGridFn linear_vie_solve(const SingularGridFn& k, const SingularGridFn& f, double tol = 1e-9);
GridFn linear_vie_solve(const GridFn& k, const GridFn& f, double tol = 1e-9);

// max_n |x + k*x - f| over nodes n >= 1, convolution by the cell rule.
double vie_defect(const SingularGridFn& k, const SingularGridFn& f, const SingularGridFn& x);

struct ResolventTable {
  SingularGridFn kernel;
  SingularGridFn r;
  double residual = 0.0;
};

// r + r*k = k, i.e. the linear VIE with right-hand side k.
ResolventTable resolvent_second_kind(const SingularGridFn& k, double tol = 1e-9);
ResolventTable resolvent_second_kind(const GridFn& k, double tol = 1e-9);

}  // namespace vlx::kernels
