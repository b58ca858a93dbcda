// Runs the acceptance criteria A1-A9 and prints one PASS/FAIL line for each.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "quadrature_oracles.hpp"
#include "vlx/kernels.hpp"
#include "vlx/levy.hpp"
#include "vlx/mc.hpp"
#include "vlx/vie.hpp"

using namespace vlx;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

const levy::LevyMeasureSpec kCgmy = levy::LevyMeasureSpec::cgmy(1.0, 3.0, 1.5);

levy::RiccatiCoeffs nig_coeffs(double p) {
  levy::RiccatiCoeffs c;
  c.p = p;
  c.rho = -0.3;
  c.nu = 0.4;
  c.lambda = 1.0;
  c.theta = 0.04;
  c.v0 = 0.04;
  return c;
}

vie::RiccatiProblem figure1(double eps) {
  vie::RiccatiProblem pb;
  pb.kernel = kernels::KernelSpec::power(0.7);
  pb.lambda = 1.0;
  pb.epsilon = eps;
  pb.sigma = 0.4;
  pb.measure = kCgmy;
  pb.forcing = PiecewiseConstant({0.0, 0.5}, {-1.0, -0.5}, 1.0);
  pb.n_steps = 2000;
  return pb;
}

const std::vector<double> kTimes{0.4, 0.9}, kU{-0.5, -0.3};
constexpr double kTheta = 0.25;

vie::RiccatiProblem fdd_problem(double eps) {
  vie::RiccatiProblem pb;
  pb.kernel = kernels::KernelSpec::power(1.0);
  pb.lambda = 1.0;
  pb.epsilon = eps;
  pb.sigma = 0.4;
  pb.measure = kCgmy;
  pb.forcing = vie::fdd_forcing(kTimes, kU);
  pb.n_steps = vie::aligned_steps(pb.forcing, 2000);
  return pb;
}

Outcome a1() {
  const auto rows = vie::scaling_check(nig_coeffs(0.5), 0.7, {1.0, 0.1, 0.01}, 1.0, 2000);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.max_rel_gap);
  return {worst <= 1e-3, "max-node relative gap " + fmt("%.2e", worst) + " over eps = 1, 0.1, 0.01 (limit 1e-3)"};
}

Outcome a2() {
  bool ok = true;
  std::ostringstream os;
  for (double p : {0.25, 0.5, 0.75}) {
    const auto c = nig_coeffs(p);
    const double limit = levy::nig_log_mgf(c, p, 1.0);
    double prev = INFINITY, gap = 0.0;
    bool monotone = true;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      gap = rel(vie::prop11_log_mgf(c, eps, 0.7, 1.0, 2000), limit);
      monotone = monotone && gap < prev;
      prev = gap;
    }
    ok = ok && monotone && gap <= 0.02;
    os << "p=" << p << ": " << fmt("%.2e", gap) << (monotone ? "" : " (not monotone)") << "; ";
  }
  return {ok, "relative gap to the NIG cgf at eps=1e-3: " + os.str() + "limit 2%"};
}

Outcome a3() {
  double prev = INFINITY;
  bool monotone = true;
  vie::LimitGap last;
  std::ostringstream os;
  for (double eps : {0.5, 0.1, 0.02, 0.01}) {
    const auto pb = figure1(eps);
    last = vie::limit_gap(pb, vie::adams_solve(pb));
    monotone = monotone && last.l1 < prev;
    prev = last.l1;
    os << fmt("%.4f", last.l1 / last.psi0_l1) << " ";
  }
  const double rel_gap = last.l1 / last.psi0_l1;
  return {monotone && rel_gap <= 0.05, "relative L1 gap along eps = 0.5, 0.1, 0.02, 0.01: " + os.str() +
                                           (monotone ? "(strictly decreasing)" : "(NOT decreasing)") + ", limit 0.05"};
}

Outcome a4() {
  std::vector<std::pair<std::string, vie::RiccatiProblem>> instances;
  for (double eps : {1.0, 0.1, 0.01}) instances.push_back({"scaling", vie::prop11_problem(nig_coeffs(0.5), eps, 0.7, 1.0, 2000)});
  for (double p : {0.25, 0.5, 0.75})
    for (double eps : {1e-1, 1e-2, 1e-3}) instances.push_back({"nig", vie::prop11_problem(nig_coeffs(p), eps, 0.7, 1.0, 2000)});
  for (double eps : {0.5, 0.1, 0.02, 0.01}) instances.push_back({"figure1", figure1(eps)});
  for (double eps : {1.0, 1e-3}) instances.push_back({"fdd", fdd_problem(eps)});
  for (double a : {0.3, 0.1, 0.05}) instances.push_back({"hyper-rough", vie::hyper_rough_problem(a, 1.0, 1.0, 1.0, 2000)});
  int failed = 0;
  double worst_lower = -INFINITY, worst_sign = -INFINITY, worst_uniform = -INFINITY;
  std::string first_failure;
  for (const auto& [name, pb] : instances) {
    const auto b = vie::check_bounds(pb, vie::adams_solve(pb));
    worst_lower = std::max(worst_lower, b.max_lower_violation);
    worst_sign = std::max(worst_sign, b.max_value);
    worst_uniform = std::max(worst_uniform, b.sup_norm - b.uniform_bound);
    if (!b.holds()) {
      if (!failed) first_failure = name + ": " + b.describe();
      ++failed;
    }
  }
  std::string detail = std::to_string(instances.size()) + " instances; max psi " + fmt("%.1e", worst_sign) +
                       ", max (kappa*f - psi) " + fmt("%.1e", worst_lower) + ", max (|psi| - |f|/lambda) " +
                       fmt("%.2e", worst_uniform);
  if (failed) detail += "; " + std::to_string(failed) + " failing, first " + first_failure;
  return {failed == 0, detail};
}

Outcome a5() {
  double worst_closed = 0.0;
  for (double s2 : {0.16, 1.0})
    for (double g : {0.0, 1.0, 2.5}) {
      const levy::SpectrallyNegativeTriple bm{g, s2, levy::LevyMeasureSpec::none()};
      for (double b : {0.5, 1.0, 3.0})
        for (double q : {0.01, 0.5, 1.0, 2.0, 10.0}) {
          const double exact = std::exp(-b * (-g + std::sqrt(g * g + 2.0 * s2 * q)) / s2);
          worst_closed = std::max(worst_closed, rel(levy::hitting_laplace(bm, b, q), exact));
        }
    }

  mc::McConfig cfg;
  cfg.seed = 20240611;
  cfg.n_paths = 100000;
  cfg.dt = 1e-4;
  cfg.horizon = 20.0;
  cfg.jump_trunc = 1e-2;
  const auto x = levy::mirror({-1.0, 0.16, kCgmy});
  const std::vector<double> bs{0.5, 1.0}, qs{0.5, 1.0, 2.0};
  const auto est = mc::first_passage_laplace_mc(x, bs, qs, cfg);
  bool mc_ok = true;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < bs.size(); ++i)
    for (std::size_t j = 0; j < qs.size(); ++j) {
      const auto& e = est[i][j];
      const double ratio = std::abs(e.value - levy::hitting_laplace(x, bs[i], qs[j])) / (3.0 * e.std_error + e.bias_bound);
      worst_ratio = std::max(worst_ratio, ratio);
      mc_ok = mc_ok && ratio <= 1.0;
    }
  return {worst_closed <= 1e-10 && mc_ok,
          "Brownian closed form max relative error " + fmt("%.1e", worst_closed) +
              "; CGMY Monte Carlo (1e5 paths, dt=1e-4) worst |error|/(3 SE + bias) = " + fmt("%.2f", worst_ratio)};
}

Outcome a6() {
  const auto xi = PiecewiseLinearCurve::flat(kTheta);
  const double vie_eps1 = vie::fdd_log_mgf_eps(fdd_problem(1.0), xi);
  mc::HestonJumpParams p;
  p.lambda = 1.0;
  p.theta = p.v0 = kTheta;
  p.sigma = 0.4;
  p.measure = kCgmy;
  mc::McConfig cfg;
  cfg.seed = 20240611;
  cfg.n_paths = 100000;
  cfg.dt = 1e-3;
  cfg.jump_trunc = 1e-2;
  const auto e = mc::heston_jump_euler_mgf(p, vie::fdd_forcing(kTimes, kU), cfg);
  const double z = std::abs(std::exp(vie_eps1) - e.value) / e.std_error;

  const double vie_small = vie::fdd_log_mgf_eps(fdd_problem(1e-3), xi);
  const double limit = levy::subordinator_fdd_log_mgf({-1.0, 0.16, kCgmy}, xi, kTimes, kU);
  const double gap = rel(vie_small, limit);
  return {z <= 3.0 && gap <= 0.02,
          "eps=1: VIE mgf " + fmt("%.6f", std::exp(vie_eps1)) + " vs Euler MC " + fmt("%.6f", e.value) + " = " +
              fmt("%.2f", z) + " SE (bias estimate " + fmt("%.1e", e.bias_bound) + "); eps=1e-3: relative gap " +
              fmt("%.2e", gap) + " to the subordinator log-mgf (limit 2%)"};
}

Outcome a7() {
  const double root = 1.0 - std::sqrt(2.0);  // sigma = u = 1
  double prev = INFINITY, gap = 0.0;
  bool monotone = true;
  std::ostringstream os;
  for (double a : {0.3, 0.1, 0.05}) {
    const auto pb = vie::hyper_rough_problem(a, 1.0, 1.0, 1.0, 2000);
    const auto path = vie::adams_solve(pb);
    gap = std::abs(path.grid.values.back() - root);
    monotone = monotone && gap < prev;
    prev = gap;
    os << fmt("%.4f", gap) << " ";
  }
  return {monotone && gap <= 5e-2, "gap to the smaller root at t=1 along alpha = 0.3, 0.1, 0.05: " + os.str() +
                                       (monotone ? "(monotone)" : "(NOT monotone)") + ", limit 5e-2"};
}

Outcome a8() {
  const double a = 0.7, lam = 1.0, eps = 0.1;
  const std::size_t n = 2000;
  const double dt = 1.0 / n;
  const auto k = kernels::sample_kernel(kernels::KernelSpec::power(a), dt, n, lam / eps);
  const auto tab = kernels::resolvent_second_kind(k);
  double fresh = 0.0;
  for (std::size_t m = 1; m <= n; m += (m < 20 ? 1 : 97)) {
    fresh = std::max(fresh, std::abs(tab.r.at(m) + oracle::fresh_convolution(tab.r, k, m) - k.at(m)));
  }

  const auto K = kernels::KernelSpec::power(a);
  const auto kappa = kernels::KernelSpec::mittag_leffler(a, lam, eps);
  double closed = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double t = 0.01 * std::pow(100.0, i / 40.0) * (i == 0 ? 1.0001 : 1.0);
    const double eb = kernels::kernel_eval(K, t) - kernels::convolve_exact(kappa, lam, K, 1.0, t);
    closed = std::max(closed, rel(eb, eps * kernels::kernel_eval(kappa, t)));
  }
  // the same identity through the discrete resolvent and a grid convolution
  const auto Kg = kernels::sample_kernel(K, dt, n);
  const auto eb_grid = kernels::combine(1.0, Kg, -1.0, kernels::convolve(tab.r, Kg));
  double grid = 0.0;
  for (std::size_t m = 1; m <= n; ++m)
    if (m * dt > 0.01) grid = std::max(grid, rel(eb_grid.at(m), eps * kernels::kernel_eval(kappa, m * dt)));

  const double defect = std::max(tab.residual, fresh);
  return {defect <= 1e-9 && closed <= 1e-6,
          "r + r*k - k defect " + fmt("%.1e", defect) + " (self " + fmt("%.1e", tab.residual) + ", fresh quadrature " +
              fmt("%.1e", fresh) + "); E_B vs eps kappa_eps on (0.01,1]: " + fmt("%.1e", closed) +
              " by exact convolution, " + fmt("%.1e", grid) + " on the 2000-step grid (reported)"};
}

Outcome a9() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-5.0, 0.0);
  const levy::LevyTriple z{-1.0, 0.16, kCgmy};
  double worst_root = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double f = unif(rng);
    worst_root = std::max(worst_root, std::abs(levy::psi0_solve(f, 1.0, 0.4, kCgmy) - levy::lambda_inverse(z, -f)));
  }
  double worst_v1 = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double w = -5.0 + 0.1 * i;
    if (w >= 0.0) continue;
    const double quad = oracle::cgmy_quadrature(1.0, 1.5, 0.5 * w * w, [w](double x) {
      return (std::expm1(w * x) - w * x) * std::exp(-3.0 * x);
    });
    worst_v1 = std::max(worst_v1, rel(levy::v1(kCgmy, w), quad));
  }
  const bool zero_ok = levy::v1(kCgmy, 0.0) == 0.0;
  return {worst_root <= 1e-10 && worst_v1 <= 1e-8 && zero_ok,
          "psi0_solve vs lambda_inverse max |diff| " + fmt("%.1e", worst_root) +
              " on 20 random forcings; CGMY V1 closed form vs quadrature max relative " + fmt("%.1e", worst_v1) +
              " on [-5, 0]"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    std::function<Outcome()> run;
    double max_seconds;  // runtime limit, 0 when none is set
  };
  const std::vector<Criterion> all{{"A1", a1, 10.0}, {"A2", a2, 30.0}, {"A3", a3, 60.0},
                                   {"A4", a4, 0.0},  {"A5", a5, 300.0}, {"A6", a6, 300.0},
                                   {"A7", a7, 0.0},  {"A8", a8, 0.0},   {"A9", a9, 0.0}};
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.max_seconds > 0.0) {
      timing += fmt(", limit %.0f s", c.max_seconds);
      if (secs > c.max_seconds) {
        o.pass = false;
        o.detail += "; runtime over limit";
      }
    }
    failures += !o.pass;
    std::printf("%s %s  %s [%s]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
