#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "vlx/error.hpp"
#include "vlx/specfun.hpp"
#include "vlx/vie.hpp"

namespace vlx::vie {

namespace {

// nonlinear part h(w) = -lambda w + sigma^2 w^2/2 + V1(w)
struct Drift {
  double lambda;
  double sigma2;
  const levy::LevyMeasureSpec& m;
  bool jumps;

  double value(double w) const { return -lambda * w + 0.5 * sigma2 * w * w + (jumps ? levy::v1(m, w) : 0.0); }
  double slope(double w) const { return -lambda + sigma2 * w + (jumps ? levy::v1_prime(m, w) : 0.0); }
};

// Root of eps x - R - c h(x) = 0; the map is increasing wherever h' <= 0.
double implicit_node(const Drift& h, double eps, double c, double R, double start, double t) {
  auto phi = [&](double x) { return eps * x - R - c * h.value(x); };
  double lo, hi;
  if (R <= 0.0) {
    lo = R / eps;
    hi = 0.0;
    if (lo == hi) return 0.0;
  } else {
    lo = 0.0;
    hi = R / eps;
    const double cap = std::min(1e6, 0.5 * h.m.exponential_limit());
    while (phi(hi) < 0.0) {
      hi *= 2.0;
      if (hi > cap) {
        std::ostringstream os;
        os << "adams_solve: instability, no bracket for the implicit node at t=" << t;
        throw NumericalError(os.str());
      }
    }
  }
  double x = std::clamp(start, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double g = phi(x);
    if (g == 0.0) return x;
    if (g < 0.0)
      lo = x;
    else
      hi = x;
    const double d = eps - c * h.slope(x);
    double next = x - g / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-16 * std::max(1.0, std::abs(x)))
      return next;
    x = next;
  }
  return x;
}

void check_finite(double x, double t) {
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << "adams_solve: instability, non-finite value at t=" << t;
    throw NumericalError(os.str());
  }
}

// (x)_+^a with 0^a = 0
double ppow(double x, double a) { return x > 0.0 ? std::pow(x, a) : 0.0; }

std::vector<std::size_t> break_nodes(const PiecewiseConstant& f, double dt) {
  std::vector<std::size_t> k;
  for (double b : f.breaks()) k.push_back(static_cast<std::size_t>(std::llround(b / dt)));
  return k;
}

// Product-trapezoid weights of kappa on a uniform grid, from the lag-cell
// moments A_m = int kappa and B_m = int kappa(u) (u - m dt)/dt over
// [m dt, (m+1) dt]. Node j at step n gets B_{n-j-1} + A_{n-j} - B_{n-j},
// node n gets A_0 - B_0 and node 0 gets B_{n-1}.
struct KappaWeights {
  std::vector<double> mass;  // int_0^{m dt} kappa
  std::vector<double> interior;
  std::vector<double> start;
  double diag = 0.0;

  double weight(std::size_t n, std::size_t j) const {
    if (j == n) return diag;
    if (j == 0) return start[n];
    return interior[n - j];
  }

  // lag-cell moments the weights were built from
  std::vector<double> A, B;

  void assemble(const std::vector<double>& a, const std::vector<double>& b) {
    A = a;
    B = b;
    const std::size_t n = A.size();
    diag = A[0] - B[0];
    interior.assign(n + 1, 0.0);
    start.assign(n + 1, 0.0);
    for (std::size_t m = 1; m < n; ++m) interior[m] = B[m - 1] + A[m] - B[m];
    for (std::size_t m = 1; m <= n; ++m) start[m] = B[m - 1];
  }
};

// closed form: int_0^x kappa = x^a/eps E_{a,a+1}(-(lam/eps) x^a) and its
// primitive x^{a+1}/eps E_{a,a+2}(-(lam/eps) x^a)
KappaWeights kappa_weights(double a, double lam, double eps, double dt, std::size_t n) {
  std::vector<double> F(n + 1, 0.0), F2(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    const double x = m * dt;
    const double xa = std::pow(x, a);
    if (lam == 0.0) {
      F[m] = xa / eps * specfun::rgamma(a + 1.0);
      F2[m] = x * xa / eps * specfun::rgamma(a + 2.0);
    } else {
      const double z = -lam / eps * xa;
      F[m] = xa / eps * specfun::mittag_leffler({a, a + 1.0}, z);
      F2[m] = x * xa / eps * specfun::mittag_leffler({a, a + 2.0}, z);
    }
  }
  std::vector<double> A(n), B(n);
  for (std::size_t m = 0; m < n; ++m) {
    A[m] = F[m + 1] - F[m];
    B[m] = F[m + 1] - (F2[m + 1] - F2[m]) / dt;
  }
  KappaWeights w;
  w.assemble(A, B);
  w.mass = std::move(F);
  return w;
}

struct Kappa {
  double a, lam, eps;
  double operator()(double u) const {
    const double pre = std::pow(u, a - 1.0) / eps;
    if (lam == 0.0) return pre * specfun::rgamma(a);
    return pre * specfun::mittag_leffler({a, a}, -lam / eps * std::pow(u, a));
  }
};

// 8-point Gauss-Legendre rule on (0, 1).
struct UnitGauss {
  std::vector<double> th, wt;
  UnitGauss() {
    using gl = boost::math::quadrature::gauss<double, 8>;
    for (std::size_t i = 0; i < gl::abscissa().size(); ++i)
      for (double sgn : {-1.0, 1.0}) {
        th.push_back(0.5 * (1.0 + sgn * gl::abscissa()[i]));
        wt.push_back(0.5 * gl::weights()[i]);
      }
  }
};

// Same weights from quadrature of kappa itself: tanh-sinh on the singular
// first cell, 8-point Gauss-Legendre elsewhere. kv receives kappa((m + th_i) dt)
// for m >= 1, row-major by m.
KappaWeights kappa_weights_quadrature(const Kappa& kappa, double dt, std::size_t n, const UnitGauss& rule,
                                      std::vector<double>& kv) {
  const std::size_t q = rule.th.size();
  std::vector<double> A(n), B(n);
  kv.assign(n * q, 0.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  A[0] = ts.integrate(kappa, 0.0, dt, 1e-14);
  B[0] = ts.integrate([&](double u) { return kappa(u) * u / dt; }, 0.0, dt, 1e-14);
  for (std::size_t m = 1; m < n; ++m) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      const double k = kappa((m + rule.th[i]) * dt);
      kv[m * q + i] = k;
      sa += rule.wt[i] * k;
      sb += rule.wt[i] * k * rule.th[i];
    }
    A[m] = dt * sa;
    B[m] = dt * sb;
  }
  KappaWeights w;
  w.assemble(A, B);
  return w;
}

// Right after a forcing break t_b > 0 the solution follows the linear response
// to the jump, a Mittag-Leffler layer of width eps^{1/alpha} that a linear
// interpolant of Gbar(psi) resolves poorly when eps is small. On the first
// cells after such a break the interpolant is taken linear in
// sigma(s) = int_0^{s - t_b} kappa_eff (squared after t = 0), with kappa_eff the
// resolvent for the decay rate lambda - Gbar'(psi(t_b)); q holds
// int_cell kappa(t_m - s) sigma(s) ds.
constexpr std::size_t kSingularCells = 4;

struct SingularCell {
  std::size_t cell = 0;       // grid cell [t_cell, t_cell+1]
  double s0 = 0.0, s1 = 0.0;  // sigma at its ends
  std::vector<double> q;      // indexed by node m > cell

  // change of the right-node weight at node m; the left node loses the same
  double delta(const KappaWeights& w, std::size_t m) const {
    const std::size_t lag = m - 1 - cell;
    const double right = (q[m] - s0 * w.A[lag]) / (s1 - s0);
    return right - (w.A[lag] - w.B[lag]);
  }
};

// Cells after the break at node kb, built once psi(t_b) is known.
void add_singular_cells(std::vector<SingularCell>& out, const Kappa& kappa, double lam_eff, double dt,
                        std::size_t n, std::size_t kb, std::size_t stop, const UnitGauss& rule,
                        const std::vector<double>& kv, bool squared) {
  const double a = kappa.a;
  const double eps = kappa.eps;
  auto sigma = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double xa = std::pow(x, a);
    const double r = lam_eff == 0.0 ? xa / eps * specfun::rgamma(a + 1.0)
                                    : xa / eps * specfun::mittag_leffler({a, a + 1.0}, -lam_eff / eps * xa);
    return squared ? r * r : r;
  };
  const std::size_t nq = rule.th.size();
  boost::math::quadrature::tanh_sinh<double> ts;
  for (std::size_t i = 0; i < kSingularCells && kb + i < stop; ++i) {
    SingularCell c;
    c.cell = kb + i;
    c.s0 = sigma(i * dt);
    c.s1 = sigma((i + 1) * dt);
    c.q.assign(n + 1, 0.0);
    // adjacent node: u = t_m - s in (0, dt), s - t_b = (i+1) dt - u
    c.q[c.cell + 1] = ts.integrate([&](double u) { return kappa(u) * sigma((i + 1) * dt - u); }, 0.0, dt, 1e-14);
    std::vector<double> sg(nq);
    // u = (lag + th) dt  <->  s - t_b = (i + 1 - th) dt
    for (std::size_t k = 0; k < nq; ++k) sg[k] = sigma((i + 1 - rule.th[k]) * dt);
    for (std::size_t m = c.cell + 2; m <= n; ++m) {
      const std::size_t lag = m - 1 - c.cell;
      double acc = 0.0;
      for (std::size_t k = 0; k < nq; ++k) acc += rule.wt[k] * kv[lag * nq + k] * sg[k];
      c.q[m] = dt * acc;
    }
    out.push_back(std::move(c));
  }
}

// Sum of the singular-cell corrections at node m, excluding the node-m weight,
// which is returned in diag_shift.
double singular_history(const std::vector<SingularCell>& cells, const KappaWeights& w, std::size_t m,
                        const std::vector<double>& g, double& diag_shift) {
  double s = 0.0;
  diag_shift = 0.0;
  for (const auto& c : cells) {
    if (c.cell >= m) continue;
    const double d = c.delta(w, m);
    if (c.cell + 1 == m) {
      diag_shift += d;
      s -= d * g[c.cell];
    } else {
      s += d * (g[c.cell + 1] - g[c.cell]);
    }
  }
  return s;
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Resolvent:
      return "resolvent-trapezoid";
    case Scheme::Implicit:
      return "implicit-trapezoid";
    case Scheme::Pece:
      return "pece";
  }
  return "unknown";
}

void RiccatiProblem::validate() const {
  std::ostringstream os;
  if (kernel.kind != kernels::KernelKind::Power)
    os << "RiccatiProblem: kernel must be the power kernel";
  else if (!(kernel.alpha > 0.0 && kernel.alpha <= 1.0))
    os << "RiccatiProblem: alpha must lie in (0,1], got " << kernel.alpha;
  else if (!(lambda >= 0.0) || !std::isfinite(lambda))
    os << "RiccatiProblem: lambda must be non-negative, got " << lambda;
  else if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    os << "RiccatiProblem: epsilon must be positive, got " << epsilon;
  else if (!(sigma >= 0.0) || !std::isfinite(sigma))
    os << "RiccatiProblem: sigma must be non-negative, got " << sigma;
  else if (forcing.max_value() > 0.0)
    os << "RiccatiProblem: forcing must be non-positive";
  else if (n_steps < 16)
    os << "RiccatiProblem: n_steps must be at least 16, got " << n_steps;
  else if (!(tol > 0.0))
    os << "RiccatiProblem: tol must be positive";
  if (!os.str().empty()) throw DomainError(os.str());
}

std::size_t aligned_steps(const PiecewiseConstant& f, std::size_t requested) {
  const double T = f.horizon();
  for (std::size_t n = requested; n < requested + 100000; ++n) {
    bool ok = true;
    for (double b : f.breaks()) {
      const double k = b / T * static_cast<double>(n);
      if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
        ok = false;
        break;
      }
    }
    if (ok) return n;
  }
  throw DomainError("aligned_steps: forcing breaks cannot be placed on grid nodes");
}

double forcing_integral(const PiecewiseConstant& f, double alpha, double t) {
  const auto& b = f.breaks();
  const auto& v = f.values();
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double hi = i + 1 < b.size() ? ppow(t - b[i + 1], alpha) : 0.0;
    s += v[i] * (ppow(t - b[i], alpha) - hi);
  }
  return s * specfun::rgamma(alpha + 1.0);
}

double linear_part(const RiccatiProblem& pb, double t) {
  const double a = pb.alpha();
  const double eps = pb.epsilon;
  const double lam = pb.lambda;
  auto mass = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double xa = std::pow(x, a);
    if (lam == 0.0) return xa / eps * specfun::rgamma(a + 1.0);
    return xa / eps * specfun::mittag_leffler({a, a + 1.0}, -lam / eps * xa);
  };
  const auto& b = pb.forcing.breaks();
  const auto& v = pb.forcing.values();
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double hi = i + 1 < b.size() ? mass(t - b[i + 1]) : 0.0;
    s += v[i] * (mass(t - b[i]) - hi);
  }
  return s;
}

namespace {

[[noreturn]] void defect_failure(const RiccatiProblem& problem, double defect, double t, std::size_t n) {
  std::ostringstream os;
  os << "adams_solve: defect " << defect << " at t=" << t << " exceeds tol " << problem.tol << " (scheme "
     << scheme_name(problem.scheme) << ", n_steps=" << n << "); refine the grid";
  throw NumericalError(os.str());
}

SolutionPath resolvent_solve(const RiccatiProblem& problem, std::size_t n) {
  const double dt = problem.horizon() / static_cast<double>(n);
  const double a = problem.alpha();
  const Drift gbar{0.0, problem.sigma * problem.sigma, problem.measure,
                   problem.measure.kind() != levy::LevyMeasureSpec::Kind::None};
  const KappaWeights w = kappa_weights(a, problem.lambda, problem.epsilon, dt, n);

  // exact kappa * f at the nodes
  const auto kb = break_nodes(problem.forcing, dt);
  const auto& fv = problem.forcing.values();
  std::vector<double> lin(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    double s = 0.0;
    for (std::size_t i = 0; i < kb.size() && kb[i] < m; ++i) {
      const double hi = i + 1 < kb.size() && kb[i + 1] < m ? w.mass[m - kb[i + 1]] : 0.0;
      s += fv[i] * (w.mass[m - kb[i]] - hi);
    }
    lin[m] = s;
  }

  const Kappa kappa{a, problem.lambda, problem.epsilon};
  const UnitGauss rule;
  std::vector<double> kv;
  const KappaWeights wq = kappa_weights_quadrature(kappa, dt, n, rule, kv);
  std::vector<SingularCell> cells;
  std::size_t next_break = 1;
  // at t = 0, Gbar'(0) = 0 and Gbar(psi) grows like the square of the linear response
  add_singular_cells(cells, kappa, problem.lambda, dt, n, 0, kb.size() > 1 ? kb[1] : n, rule, kv, true);

  GridFn psi(dt, std::vector<double>(n + 1, 0.0));
  std::vector<double> g(n + 1, 0.0);  // Gbar(psi), Gbar(0) = 0
  for (std::size_t m = 1; m <= n; ++m) {
    if (next_break < kb.size() && kb[next_break] == m - 1) {
      const std::size_t stop = next_break + 1 < kb.size() ? kb[next_break + 1] : n;
      const double lam_eff = -gbar.slope(psi[m - 1]) + problem.lambda;
      add_singular_cells(cells, kappa, lam_eff, dt, n, m - 1, stop, rule, kv, false);
      ++next_break;
    }
    double hist = 0.0;
    for (std::size_t j = 1; j < m; ++j) hist += w.interior[m - j] * g[j];
    double shift = 0.0;
    hist += singular_history(cells, w, m, g, shift);
    const double R = lin[m] + hist;
    const double x = implicit_node(gbar, 1.0, w.diag + shift, R, psi[m - 1], m * dt);
    check_finite(x, m * dt);
    psi[m] = x;
    g[m] = gbar.value(x);
    check_finite(g[m], m * dt);
  }

  double defect = 0.0;
  std::size_t worst = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    double s = lin[m];
    for (std::size_t j = 1; j <= m; ++j) s += wq.weight(m, j) * g[j];
    double shift = 0.0;
    s += singular_history(cells, wq, m, g, shift) + shift * g[m];
    const double r = std::abs(psi[m] - s);
    if (r > defect) {
      defect = r;
      worst = m;
    }
  }
  if (!(defect <= problem.tol)) defect_failure(problem, defect, worst * dt, n);
  return {std::move(psi), scheme_name(problem.scheme), defect, problem.kernel};
}

SolutionPath power_solve(const RiccatiProblem& problem, std::size_t n) {
  const double T = problem.horizon();
  const double dt = T / static_cast<double>(n);
  const double a = problem.alpha();
  const double eps = problem.epsilon;
  const Drift h{problem.lambda, problem.sigma * problem.sigma, problem.measure,
                problem.measure.kind() != levy::LevyMeasureSpec::Kind::None};

  // exact I^alpha f at the nodes, using integer offsets from the break nodes
  const auto kb = break_nodes(problem.forcing, dt);
  const auto& fv = problem.forcing.values();
  std::vector<double> forced(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) {
    double s = 0.0;
    for (std::size_t i = 0; i < kb.size(); ++i) {
      if (kb[i] >= m) break;
      const double lo = std::pow(static_cast<double>(m - kb[i]), a);
      const double hi = i + 1 < kb.size() && kb[i + 1] < m ? std::pow(static_cast<double>(m - kb[i + 1]), a) : 0.0;
      s += fv[i] * (lo - hi);
    }
    forced[m] = s * std::pow(dt, a) * specfun::rgamma(a + 1.0);
  }

  const specfun::FractionalTrapezoid ft(a, n);
  const double c = std::pow(dt, a) * specfun::rgamma(a + 2.0);
  const double cp = std::pow(dt, a) * specfun::rgamma(a + 1.0);
  GridFn psi(dt, std::vector<double>(n + 1, 0.0));
  std::vector<double> hv(n + 1, 0.0);

  for (std::size_t m = 1; m <= n; ++m) {
    const double t = m * dt;
    double hist = 0.0;
    for (std::size_t j = 0; j < m; ++j) hist += ft.corrector(m, j) * hv[j];
    const double R = forced[m] + c * hist;
    double x;
    if (problem.scheme == Scheme::Implicit) {
      x = implicit_node(h, eps, c, R, psi[m - 1], t);
    } else {
      double pred = 0.0;
      for (std::size_t j = 0; j < m; ++j) pred += ft.predictor(m, j) * hv[j];
      const double p = (forced[m] + cp * pred) / eps;
      check_finite(p, t);
      x = (R + c * h.value(p)) / eps;
      check_finite(x, t);
      // second sweep when the corrector equation is still far from satisfied
      if (std::abs(eps * x - R - c * h.value(x)) > problem.tol * eps) x = (R + c * h.value(x)) / eps;
    }
    check_finite(x, t);
    psi[m] = x;
    hv[m] = h.value(x);
    check_finite(hv[m], t);
  }

  // residual of the equation with the cell-quadrature weights
  const GridFn ih = specfun::fractional_integral(a, GridFn(dt, hv));
  double defect = 0.0;
  std::size_t worst = 0;
  for (std::size_t m = 1; m <= n; ++m) {
    const double r = std::abs(eps * psi[m] - forced[m] - ih[m]) / eps;
    if (r > defect) {
      defect = r;
      worst = m;
    }
  }
  if (!(defect <= problem.tol)) defect_failure(problem, defect, worst * dt, n);
  return {std::move(psi), scheme_name(problem.scheme), defect, problem.kernel};
}

}  // namespace

SolutionPath adams_solve(const RiccatiProblem& problem) {
  problem.validate();
  const std::size_t n = aligned_steps(problem.forcing, problem.n_steps);
  if (problem.scheme == Scheme::Resolvent) return resolvent_solve(problem, n);
  return power_solve(problem, n);
}

bool BoundsReport::holds(double tol, double sign_tol) const {
  return max_value <= sign_tol && max_lower_violation <= tol && sup_norm <= uniform_bound + tol;
}

std::string BoundsReport::describe() const {
  std::ostringstream os;
  os << "max psi " << max_value << ", lower-bound violation " << max_lower_violation << ", sup " << sup_norm
     << " vs " << uniform_bound;
  return os.str();
}

BoundsReport check_bounds(const RiccatiProblem& problem, const SolutionPath& path) {
  BoundsReport r;
  r.max_value = -std::numeric_limits<double>::infinity();
  r.max_lower_violation = -std::numeric_limits<double>::infinity();
  const GridFn& g = path.grid;
  for (std::size_t k = 0; k <= g.steps(); ++k) {
    r.max_value = std::max(r.max_value, g[k]);
    r.sup_norm = std::max(r.sup_norm, std::abs(g[k]));
    if (k > 0) r.max_lower_violation = std::max(r.max_lower_violation, linear_part(problem, g.t(k)) - g[k]);
  }
  if (problem.lambda > 0.0) r.uniform_bound = problem.forcing.sup_norm() / problem.lambda;
  return r;
}

std::vector<double> psi0_pieces(const RiccatiProblem& problem) {
  if (!(problem.lambda > 0.0)) throw DomainError("psi0_pieces: lambda must be positive");
  std::vector<double> out;
  for (double v : problem.forcing.values()) out.push_back(levy::psi0_solve(v, problem.lambda, problem.sigma, problem.measure));
  return out;
}

GridFn psi0_on_grid(const RiccatiProblem& problem, const GridFn& grid) {
  const auto p0 = psi0_pieces(problem);
  const auto kb = break_nodes(problem.forcing, grid.dt);
  GridFn out(grid.dt, std::vector<double>(grid.values.size()));
  std::size_t piece = 0;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    while (piece + 1 < kb.size() && kb[piece + 1] <= k) ++piece;
    out[k] = p0[piece];
  }
  return out;
}

LimitGap limit_gap(const RiccatiProblem& problem, const SolutionPath& path) {
  const auto p0 = psi0_pieces(problem);
  const GridFn& g = path.grid;
  const auto kb = break_nodes(problem.forcing, g.dt);
  LimitGap out;
  std::size_t piece = 0;
  for (std::size_t k = 0; k < g.steps(); ++k) {
    while (piece + 1 < kb.size() && kb[piece + 1] <= k) ++piece;
    const double d0 = std::abs(g[k] - p0[piece]);
    const double d1 = std::abs(g[k + 1] - p0[piece]);
    out.l1 += 0.5 * g.dt * (d0 + d1);
    out.linf = std::max({out.linf, d0, d1});
    out.psi0_l1 += g.dt * std::abs(p0[piece]);
  }
  return out;
}

}  // namespace vlx::vie
