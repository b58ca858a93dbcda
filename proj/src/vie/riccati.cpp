#include <algorithm>
#include <cmath>
#include <sstream>

#include "vlx/error.hpp"
#include "vlx/kernels.hpp"
#include "vlx/specfun.hpp"
#include "vlx/vie.hpp"

namespace vlx::vie {

namespace {

double interpolate(const GridFn& g, double t) {
  if (t <= 0.0) return g[0];
  const double x = t / g.dt;
  // mapped nodes usually coincide with grid nodes up to rounding
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, r) && r <= static_cast<double>(g.steps()))
    return g[static_cast<std::size_t>(r)];
  const std::size_t k = std::min(static_cast<std::size_t>(x), g.steps() - 1);
  const double w = std::clamp(x - static_cast<double>(k), 0.0, 1.0);
  return (1.0 - w) * g[k] + w * g[k + 1];
}

}  // namespace

RiccatiProblem prop11_problem(const levy::RiccatiCoeffs& c, double epsilon, double alpha, double T,
                              std::size_t n_steps) {
  c.validate();
  if (!(c.p >= 0.0 && c.p <= 1.0)) throw DomainError("prop11: p must lie in [0,1]");
  if (!(T > 0.0)) throw DomainError("prop11: horizon must be positive");
  RiccatiProblem pb;
  pb.kernel = kernels::KernelSpec::power(alpha);
  pb.lambda = c.lambda - c.rho * c.p * c.nu;
  pb.epsilon = epsilon;
  pb.forcing = PiecewiseConstant::constant(0.5 * (c.p * c.p - c.p), T);
  pb.sigma = c.nu;
  pb.n_steps = n_steps;
  return pb;
}

SolutionPath prop11_phi(const levy::RiccatiCoeffs& c, double epsilon, double alpha, double T, std::size_t n_steps) {
  SolutionPath path = adams_solve(prop11_problem(c, epsilon, alpha, T, n_steps));
  for (double& v : path.grid.values) v *= epsilon;
  path.max_defect *= epsilon;
  return path;
}

double prop11_log_mgf(const levy::RiccatiCoeffs& c, double epsilon, double alpha, double t, std::size_t n_steps) {
  if (!(t >= 0.0)) throw DomainError("prop11_log_mgf: t must be non-negative");
  if (t == 0.0) return 0.0;
  const SolutionPath phi = prop11_phi(c, epsilon, alpha, t, n_steps);
  const std::size_t n = phi.grid.steps();
  const double frac = specfun::fractional_integral_at(1.0 - alpha, phi.grid, n);
  const double area = specfun::fractional_integral_at(1.0, phi.grid, n);
  return c.v0 * frac + c.lambda * c.theta / epsilon * area;
}

std::vector<ScalingRow> scaling_check(const levy::RiccatiCoeffs& c, double alpha, const std::vector<double>& eps_ladder,
                                      double T, std::size_t n_steps, double t_min) {
  for (std::size_t i = 1; i < eps_ladder.size(); ++i)
    if (!(eps_ladder[i] < eps_ladder[i - 1])) throw DomainError("scaling_check: eps ladder must decrease");
  const double u1 = levy::u1(c);
  std::vector<ScalingRow> rows;
  for (double eps : eps_ladder) {
    const SolutionPath phi = prop11_phi(c, eps, alpha, T, n_steps);
    const double stretch = std::pow(eps, -1.0 / alpha);
    const SolutionPath psi = prop11_phi(c, 1.0, alpha, T * stretch, n_steps);
    ScalingRow row;
    row.epsilon = eps;
    const GridFn& g = phi.grid;
    for (std::size_t k = 1; k <= g.steps(); ++k) {
      const double rhs = eps * interpolate(psi.grid, g.t(k) * stretch);
      row.max_rel_gap = std::max(row.max_rel_gap, std::abs(g[k] - rhs) / std::max(std::abs(g[k]), 1e-300));
      if (g.t(k) >= t_min) row.u1_gap = std::max(row.u1_gap, std::abs(g[k] / eps - u1));
    }
    rows.push_back(row);
  }
  return rows;
}

PiecewiseConstant fdd_forcing(const std::vector<double>& times, const std::vector<double>& u, double T) {
  if (times.empty() || times.size() != u.size()) throw DomainError("fdd_forcing: need matching times and u");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > (i == 0 ? 0.0 : times[i - 1]))) throw DomainError("fdd_forcing: times must increase from 0");
    if (!(u[i] <= 0.0)) throw DomainError("fdd_forcing: u must be non-positive");
  }
  if (T <= 0.0) T = times.back();
  if (T < times.back()) throw DomainError("fdd_forcing: horizon must not precede the last time");
  std::vector<double> breaks, values;
  if (T > times.back()) {
    breaks.push_back(0.0);
    values.push_back(0.0);
  }
  double tail = 0.0;
  std::vector<double> tails(u.size());
  for (std::size_t k = u.size(); k-- > 0;) tails[k] = tail += u[k];
  for (std::size_t k = times.size(); k-- > 0;) {
    breaks.push_back(k + 1 == times.size() && T == times.back() ? 0.0 : T - times[k]);
    values.push_back(tails[k]);
  }
  return PiecewiseConstant(std::move(breaks), std::move(values), T);
}

double fdd_log_mgf_eps(const RiccatiProblem& problem, const SolutionPath& path, const PiecewiseLinearCurve& xi0) {
  if (xi0.min_value() < 0.0) throw DomainError("fdd_log_mgf_eps: forward variance must be non-negative");
  const double T = problem.horizon();
  const auto& b = problem.forcing.breaks();
  const auto& v = problem.forcing.values();
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double hi = i + 1 < b.size() ? b[i + 1] : T;
    total += v[i] * xi0.integral(T - hi, T - b[i]);
  }
  const GridFn& g = path.grid;
  const double s2 = problem.sigma * problem.sigma;
  const bool jumps = problem.measure.kind() != levy::LevyMeasureSpec::Kind::None;
  auto integrand = [&](std::size_t k) {
    const double w = g[k];
    return (0.5 * s2 * w * w + (jumps ? levy::v1(problem.measure, w) : 0.0)) * xi0(T - g.t(k));
  };
  double prev = integrand(0);
  for (std::size_t k = 1; k <= g.steps(); ++k) {
    const double cur = integrand(k);
    total += 0.5 * g.dt * (prev + cur);
    prev = cur;
  }
  return total;
}

double fdd_log_mgf_eps(const RiccatiProblem& problem, const PiecewiseLinearCurve& xi0) {
  return fdd_log_mgf_eps(problem, adams_solve(problem), xi0);
}

PiecewiseLinearCurve xi0_eps_curve(double alpha, double lambda, double epsilon, double v0, double theta, double t_max,
                                   std::size_t n) {
  if (!(t_max > 0.0) || n < 1) throw DomainError("xi0_eps_curve: need t_max > 0 and n >= 1");
  if (!(v0 >= 0.0 && theta >= 0.0)) throw DomainError("xi0_eps_curve: V0 and theta must be non-negative");
  std::vector<double> t(n + 1), v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    t[k] = t_max * static_cast<double>(k) / static_cast<double>(n);
    v[k] = theta + (v0 - theta) * kernels::ml_density_tail(alpha, lambda / epsilon, t[k]);
  }
  return PiecewiseLinearCurve(std::move(t), std::move(v));
}

double hyper_rough_phi(double u, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("hyper_rough_phi: sigma must be positive");
  return -u * u / (1.0 + std::sqrt(1.0 + sigma * sigma * u * u));
}

RiccatiProblem hyper_rough_problem(double alpha, double u, double sigma, double T, std::size_t n_steps) {
  RiccatiProblem pb;
  pb.kernel = kernels::KernelSpec::power(alpha);
  pb.lambda = 0.0;
  pb.epsilon = 1.0;
  pb.forcing = PiecewiseConstant::constant(-0.5 * u * u, T);
  pb.sigma = sigma;
  pb.n_steps = n_steps;
  return pb;
}

}  // namespace vlx::vie
