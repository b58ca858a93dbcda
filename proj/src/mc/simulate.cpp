#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "vlx/error.hpp"
#include "vlx/mc.hpp"
#include "vlx/vie.hpp"

namespace vlx::mc {

namespace {

constexpr std::size_t kBlock = 256;
// expected jumps per step beyond which the step is considered exploded
constexpr double kJumpBudget = 50.0;

struct Neumaier {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// Per-path sums of the estimator, its square, its coarse-grid twin and the
// horizon-truncated part.
struct Moments {
  Neumaier f, f2, coarse, trunc;
};

// Runs fn(path, acc) over all paths in fixed blocks and reduces blocks in
// index order, so results do not depend on the worker count.
template <class Acc, class Fn>
std::vector<Acc> run_blocks(std::size_t n_paths, unsigned workers, const Acc& init, Fn fn) {
  const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<Acc> blocks(n_blocks, init);
  std::vector<std::exception_ptr> errors(n_blocks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        const std::size_t end = std::min(n_paths, (b + 1) * kBlock);
        for (std::size_t p = b * kBlock; p < end; ++p) fn(p, blocks[b]);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n_blocks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return blocks;
}

// Y_t = drift t + sigma W_t + sign (J_t - t int_delta x nu(dx)) with J the
// compound Poisson process of jumps >= delta, jump times by exponential clocks.
class LevyStepper {
 public:
  LevyStepper(double drift, double sigma2, double sign, const JumpTable& jt, double dt)
      : jt_(jt), sign_(sign), dt_(dt) {
    drift_dt_ = (drift - sign * jt.mean()) * dt;
    sd_ = std::sqrt((sigma2 + jt.small_variance()) * dt);
  }
  void reset(PathRng& rng) {
    t_ = 0.0;
    next_jump_ = jt_.rate() > 0.0 ? rng.exponential() / jt_.rate() : std::numeric_limits<double>::infinity();
  }
  double step(PathRng& rng) {
    double dx = drift_dt_ + (sd_ > 0.0 ? sd_ * rng.normal() : 0.0);
    t_ += dt_;
    while (next_jump_ <= t_) {
      dx += sign_ * jt_.sample(rng.uniform());
      next_jump_ += rng.exponential() / jt_.rate();
    }
    return dx;
  }

 private:
  const JumpTable& jt_;
  double sign_;
  double dt_;
  double drift_dt_ = 0.0;
  double sd_ = 0.0;
  double t_ = 0.0;
  double next_jump_ = 0.0;
};

std::size_t step_count(double horizon, double dt, bool even) {
  std::size_t n = static_cast<std::size_t>(std::ceil(horizon / dt * (1.0 - 1e-12)));
  n = std::max<std::size_t>(n, 1);
  if (even && n % 2) ++n;
  return n;
}

void check_jump_rate(const JumpTable& jt, double dt) {
  if (jt.rate() * dt > kJumpBudget)
    throw ConfigError("jump_trunc " + std::to_string(jt.delta()) + " gives " + std::to_string(jt.rate() * dt) +
                      " expected jumps per step; raise jump_trunc or lower dt");
}

Estimate finish(const Moments& m, std::size_t n, double bias_scale, double trunc_tol, const char* who) {
  Estimate e;
  e.n_paths = n;
  const double N = static_cast<double>(n);
  e.value = m.f.value() / N;
  const double var = std::max(0.0, (m.f2.value() / N - e.value * e.value) * N / (N - 1.0));
  e.std_error = std::sqrt(var / N);
  const double trunc = m.trunc.value() / N;
  if (trunc > trunc_tol)
    throw ConfigError(std::string(who) + ": horizon too short, truncated paths contribute up to " +
                      std::to_string(trunc));
  e.bias_bound = std::abs(e.value - m.coarse.value() / N) * bias_scale + trunc;
  return e;
}

Moments reduce(const std::vector<Moments>& blocks) {
  Moments out;
  for (const auto& b : blocks) {
    out.f.add(b.f.value());
    out.f2.add(b.f2.value());
    out.coarse.add(b.coarse.value());
    out.trunc.add(b.trunc.value());
  }
  return out;
}

// Grid crossing bias scales like sqrt(dt): bias(dt) = (coarse - fine)/(sqrt2 - 1).
const double kSqrtBiasScale = 1.0 / (std::sqrt(2.0) - 1.0);
constexpr double kHorizonTol = 1e-3;

}  // namespace

void McConfig::validate() const {
  if (n_paths < 1000) throw ConfigError("n_paths must be at least 1000");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive and finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
  if (dt > horizon / 100.0) throw ConfigError("dt must not exceed horizon/100");
  if (!(jump_trunc > 0.0) || !std::isfinite(jump_trunc)) throw ConfigError("jump_trunc must be positive and finite");
}

unsigned worker_count(const McConfig& cfg) {
  unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VLX_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

PathBatch simulate_levy(const levy::LevyTriple& z, const McConfig& cfg) {
  z.validate();
  cfg.validate();
  const JumpTable jt(z.measure, cfg.jump_trunc);
  const std::size_t n = step_count(cfg.horizon, cfg.dt, false);
  const double dt = cfg.horizon / static_cast<double>(n);
  check_jump_rate(jt, dt);
  if (static_cast<double>(cfg.n_paths) * static_cast<double>(n + 1) > 2e8)
    throw ConfigError("simulate_levy: n_paths x steps too large to store");

  PathBatch out;
  out.dt = dt;
  out.steps = n;
  out.n_paths = cfg.n_paths;
  out.values.assign(cfg.n_paths * (n + 1), 0.0);
  out.generator = "mt19937_64/seed_seq(seed,path) seed=" + std::to_string(cfg.seed) +
                  " jump_trunc=" + std::to_string(cfg.jump_trunc);
  const LevyStepper proto(z.drift, z.sigma2, 1.0, jt, dt);
  struct None {};
  run_blocks(cfg.n_paths, worker_count(cfg), None{}, [&](std::size_t p, None&) {
    PathRng rng(cfg.seed, p);
    LevyStepper s = proto;
    s.reset(rng);
    double* row = out.values.data() + p * (n + 1);
    for (std::size_t k = 1; k <= n; ++k) row[k] = row[k - 1] + s.step(rng);
  });
  return out;
}

std::vector<std::vector<Estimate>> first_passage_laplace_mc(const levy::SpectrallyNegativeTriple& x,
                                                            const std::vector<double>& b,
                                                            const std::vector<double>& q, const McConfig& cfg) {
  x.validate();
  cfg.validate();
  for (double v : b)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("first_passage_laplace_mc: barriers must be finite and >= 0");
  for (double v : q)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("first_passage_laplace_mc: q must be finite and >= 0");
  if (b.empty() || q.empty()) return {};

  const JumpTable jt(x.jumps, cfg.jump_trunc);
  const std::size_t n = step_count(cfg.horizon, cfg.dt, true);
  const double dt = cfg.horizon / static_cast<double>(n);
  check_jump_rate(jt, dt);

  std::vector<std::size_t> order(b.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return b[i] < b[j]; });
  const std::size_t nb = b.size(), nq = q.size();
  const double inf = std::numeric_limits<double>::infinity();

  const LevyStepper proto(x.gamma, x.sigma2, -1.0, jt, dt);
  const std::vector<Moments> init(nb * nq);
  auto blocks = run_blocks(cfg.n_paths, worker_count(cfg), init, [&](std::size_t p, std::vector<Moments>& acc) {
    PathRng rng(cfg.seed, p);
    LevyStepper s = proto;
    s.reset(rng);
    std::vector<double> tau_f(nb, inf), tau_c(nb, inf);
    std::size_t i_f = 0, i_c = 0;
    double pos = 0.0;
    auto sweep = [&](std::size_t& i, std::vector<double>& tau, double t) {
      while (i < nb && pos >= b[order[i]]) tau[order[i++]] = t;
    };
    sweep(i_f, tau_f, 0.0);
    sweep(i_c, tau_c, 0.0);
    for (std::size_t k = 1; k <= n && i_c < nb; ++k) {
      pos += s.step(rng);
      const double t = static_cast<double>(k) * dt;
      sweep(i_f, tau_f, t);
      if (k % 2 == 0) sweep(i_c, tau_c, t);
    }
    for (std::size_t i = 0; i < nb; ++i)
      for (std::size_t j = 0; j < nq; ++j) {
        Moments& m = acc[i * nq + j];
        const double v = std::isfinite(tau_f[i]) ? std::exp(-q[j] * tau_f[i]) : 0.0;
        m.f.add(v);
        m.f2.add(v * v);
        m.coarse.add(std::isfinite(tau_c[i]) ? std::exp(-q[j] * tau_c[i]) : 0.0);
        if (!std::isfinite(tau_f[i])) m.trunc.add(std::exp(-q[j] * cfg.horizon));
      }
  });

  std::vector<std::vector<Estimate>> out(nb, std::vector<Estimate>(nq));
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nq; ++j) {
      Moments m;
      for (const auto& blk : blocks) {
        m.f.add(blk[i * nq + j].f.value());
        m.f2.add(blk[i * nq + j].f2.value());
        m.coarse.add(blk[i * nq + j].coarse.value());
        m.trunc.add(blk[i * nq + j].trunc.value());
      }
      out[i][j] = finish(m, cfg.n_paths, kSqrtBiasScale, kHorizonTol, "first_passage_laplace_mc");
    }
  return out;
}

Estimate first_passage_laplace_mc(const levy::SpectrallyNegativeTriple& x, double b, double q, const McConfig& cfg) {
  if (b == 0.0) {
    x.validate();
    cfg.validate();
    if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("first_passage_laplace_mc: q must be finite and >= 0");
    return {1.0, 0.0, 0.0, cfg.n_paths};
  }
  return first_passage_laplace_mc(x, std::vector<double>{b}, std::vector<double>{q}, cfg)[0][0];
}

namespace {

std::vector<double> passage_barriers(const levy::LevyTriple& z, const PiecewiseLinearCurve& xi00,
                                     const std::vector<double>& times) {
  z.validate();
  if (!(z.drift < 0.0)) throw DomainError("subordinator_fdd_mc: drift must be negative");
  if (xi00.min_value() < 0.0) throw DomainError("subordinator_fdd_mc: xi00 must be non-negative");
  std::vector<double> a(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || (i && !(times[i] > times[i - 1])))
      throw DomainError("subordinator_fdd_mc: times must be positive and increasing");
    a[i] = z.lambda() * xi00.integral(0.0, times[i]);
  }
  return a;
}

// First grid times of Z below -a_i on the fine grid and on every other node.
struct Passage {
  std::vector<double> fine, coarse;
  bool complete = false;
};

Passage sweep_passages(LevyStepper s, PathRng& rng, const std::vector<double>& a, std::size_t n, double dt,
                       bool with_coarse) {
  const std::size_t m = a.size();
  const double inf = std::numeric_limits<double>::infinity();
  Passage out{std::vector<double>(m, inf), std::vector<double>(m, inf), false};
  s.reset(rng);
  std::size_t i_f = 0, i_c = with_coarse ? 0 : m;
  double pos = 0.0;
  auto sweep = [&](std::size_t& i, std::vector<double>& h, double t) {
    while (i < m && pos <= -a[i]) h[i++] = t;
  };
  sweep(i_f, out.fine, 0.0);
  if (with_coarse) sweep(i_c, out.coarse, 0.0);
  for (std::size_t k = 1; k <= n && (i_f < m || i_c < m); ++k) {
    pos += s.step(rng);
    const double t = static_cast<double>(k) * dt;
    sweep(i_f, out.fine, t);
    if (with_coarse && k % 2 == 0) sweep(i_c, out.coarse, t);
  }
  out.complete = i_f == m;
  return out;
}

}  // namespace

Estimate subordinator_fdd_mc(const levy::LevyTriple& z, const PiecewiseLinearCurve& xi00,
                             const std::vector<double>& times, const std::vector<double>& u, const McConfig& cfg) {
  if (times.size() != u.size() || times.empty()) throw DomainError("subordinator_fdd_mc: need matching non-empty times and u");
  for (double v : u)
    if (!(v <= 0.0) || !std::isfinite(v)) throw DomainError("subordinator_fdd_mc: u must be finite and non-positive");
  const auto a = passage_barriers(z, xi00, times);
  cfg.validate();
  if (std::all_of(u.begin(), u.end(), [](double v) { return v == 0.0; })) return {1.0, 0.0, 0.0, cfg.n_paths};

  const JumpTable jt(z.measure, cfg.jump_trunc);
  const std::size_t n = step_count(cfg.horizon, cfg.dt, true);
  const double dt = cfg.horizon / static_cast<double>(n);
  check_jump_rate(jt, dt);
  const LevyStepper proto(z.drift, z.sigma2, 1.0, jt, dt);

  auto blocks = run_blocks(cfg.n_paths, worker_count(cfg), Moments{}, [&](std::size_t p, Moments& acc) {
    PathRng rng(cfg.seed, p);
    const Passage h = sweep_passages(proto, rng, a, n, dt, true);
    // passage times not reached by the horizon are replaced by the horizon,
    // which over-states the contribution; that part is the truncation bias
    double lf = 0.0, lc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      lf += u[i] * std::min(h.fine[i], cfg.horizon);
      lc += u[i] * std::min(h.coarse[i], cfg.horizon);
    }
    const double v = std::exp(lf);
    acc.f.add(v);
    acc.f2.add(v * v);
    acc.coarse.add(std::exp(lc));
    if (!h.complete) acc.trunc.add(v);
  });
  return finish(reduce(blocks), cfg.n_paths, kSqrtBiasScale, kHorizonTol, "subordinator_fdd_mc");
}

std::vector<std::vector<double>> subordinator_samples(const levy::LevyTriple& z, const PiecewiseLinearCurve& xi00,
                                                      const std::vector<double>& times, const McConfig& cfg) {
  const auto a = passage_barriers(z, xi00, times);
  cfg.validate();
  const JumpTable jt(z.measure, cfg.jump_trunc);
  const std::size_t n = step_count(cfg.horizon, cfg.dt, false);
  const double dt = cfg.horizon / static_cast<double>(n);
  check_jump_rate(jt, dt);
  const LevyStepper proto(z.drift, z.sigma2, 1.0, jt, dt);
  std::vector<std::vector<double>> out(cfg.n_paths);
  struct None {};
  run_blocks(cfg.n_paths, worker_count(cfg), None{}, [&](std::size_t p, None&) {
    PathRng rng(cfg.seed, p);
    out[p] = sweep_passages(proto, rng, a, n, dt, false).fine;
  });
  return out;
}

void HestonJumpParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("HestonJumpParams: lambda must be >= 0");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("HestonJumpParams: theta must be >= 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("HestonJumpParams: sigma must be >= 0");
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw DomainError("HestonJumpParams: v0 must be >= 0");
}

namespace {

Moments heston_run(const HestonJumpParams& p, const JumpTable& jt, const PiecewiseConstant& f, std::size_t n,
                   std::uint64_t stream, const McConfig& cfg) {
  const double T = f.horizon();
  const double h = T / static_cast<double>(n);
  std::vector<double> fmid(n);
  for (std::size_t k = 0; k < n; ++k) fmid[k] = f(T - (static_cast<double>(k) + 0.5) * h);
  const double diff2 = p.sigma * p.sigma + jt.small_variance();
  auto blocks = run_blocks(cfg.n_paths, worker_count(cfg), Moments{}, [&](std::size_t path, Moments& acc) {
    PathRng rng(cfg.seed, path, stream);
    double v = p.v0;
    double area = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double vp = std::max(v, 0.0);
      const double mean_jumps = vp * jt.rate() * h;
      if (mean_jumps > kJumpBudget)
        throw ConfigError("heston_jump_euler_mgf: jump intensity exceeds the per-step budget (V = " +
                          std::to_string(vp) + ")");
      double dv = p.lambda * (p.theta - vp) * h - vp * jt.mean() * h + std::sqrt(diff2 * vp * h) * rng.normal();
      for (unsigned j = rng.poisson(mean_jumps); j > 0; --j) dv += jt.sample(rng.uniform());
      v += dv;
      area += fmid[k] * 0.5 * (vp + std::max(v, 0.0)) * h;
    }
    const double e = std::exp(area);
    acc.f.add(e);
    acc.f2.add(e * e);
  });
  return reduce(blocks);
}

}  // namespace

Estimate heston_jump_euler_mgf(const HestonJumpParams& p, const PiecewiseConstant& f, const McConfig& cfg) {
  p.validate();
  if (!(cfg.dt > 0.0) || cfg.dt > f.horizon() / 100.0) throw ConfigError("dt must lie in (0, T/100]");
  if (cfg.n_paths < 1000) throw ConfigError("n_paths must be at least 1000");
  if (f.sup_norm() == 0.0) return {1.0, 0.0, 0.0, cfg.n_paths};
  const JumpTable jt(p.measure, cfg.jump_trunc);

  // the coarse run uses every break-aligned grid of half the size
  const std::size_t n2 = vie::aligned_steps(
      f, static_cast<std::size_t>(std::ceil(f.horizon() / (2.0 * cfg.dt) * (1.0 - 1e-12))));
  const std::size_t n = 2 * n2;
  const Moments fine = heston_run(p, jt, f, n, 0, cfg);
  const Moments coarse = heston_run(p, jt, f, n2, 1, cfg);

  Estimate e;
  e.n_paths = cfg.n_paths;
  const double N = static_cast<double>(cfg.n_paths);
  e.value = fine.f.value() / N;
  e.std_error = std::sqrt(std::max(0.0, (fine.f2.value() / N - e.value * e.value) * N / (N - 1.0)) / N);
  // weak order one: bias(dt) ~ est(2dt) - est(dt)
  e.bias_bound = std::abs(coarse.f.value() / N - e.value);
  return e;
}

}  // namespace vlx::mc
