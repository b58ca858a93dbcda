#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vlx/curves.hpp"
#include "vlx/levy.hpp"

namespace vlx::mc {

struct McConfig {
  std::uint64_t seed = 20240611;
  std::size_t n_paths = 100000;
  double dt = 1e-3;
  // jumps below this size are replaced by a Brownian motion of equal variance
  double jump_trunc = 1e-3;
  double horizon = 20.0;
  // worker cap; 0 means hardware concurrency. VLX_THREADS lowers it further.
  unsigned threads = 0;
  void validate() const;
};

unsigned worker_count(const McConfig& cfg);

// Independent stream per (seed, path, stream); results never depend on which
// worker ran the path.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream = 0);
  double uniform() { return std::generate_canonical<double, 53>(eng_); }
  double normal() { return normal_(eng_); }
  double exponential() { return exponential_(eng_); }
  unsigned poisson(double mean) {
    if (mean <= 0.0) return 0;
    return poisson_(eng_, std::poisson_distribution<unsigned>::param_type(mean));
  }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
  std::exponential_distribution<double> exponential_;
  std::poisson_distribution<unsigned> poisson_;
};

// Jumps of size >= delta: total rate, first moment and an inverse-CDF table
// on geometric panels; jumps below delta enter through small_variance.
class JumpTable {
 public:
  JumpTable() = default;
  JumpTable(const levy::LevyMeasureSpec& m, double delta);

  double delta() const { return delta_; }
  double rate() const { return rate_; }          // nu([delta, inf))
  double mean() const { return mean_; }          // int_delta^inf x nu(dx)
  double small_variance() const { return var_; }  // int_0^delta x^2 nu(dx)
  double sample(double u) const;

 private:
  double delta_ = 0.0;
  double rate_ = 0.0;
  double mean_ = 0.0;
  double var_ = 0.0;
  std::vector<double> x_;
  std::vector<double> cdf_;
};

struct PathBatch {
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t n_paths = 0;
  std::vector<double> values;  // row-major, n_paths x (steps + 1)
  std::string generator;

  double at(std::size_t path, std::size_t k) const { return values[path * (steps + 1) + k]; }
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  // reported, not corrected: grid-monitoring / time-step bias estimate plus
  // the horizon truncation bound
  double bias_bound = 0.0;
  std::size_t n_paths = 0;
};

// Euler-grid paths of Z_t = drift t + sigma W_t + compensated jumps on [0, horizon].
PathBatch simulate_levy(const levy::LevyTriple& z, const McConfig& cfg);

// E[exp(-q tau_b)] for every (b, q) pair from one set of paths; result[i][j]
// belongs to b[i], q[j].
std::vector<std::vector<Estimate>> first_passage_laplace_mc(const levy::SpectrallyNegativeTriple& x,
                                                            const std::vector<double>& b,
                                                            const std::vector<double>& q, const McConfig& cfg);
Estimate first_passage_laplace_mc(const levy::SpectrallyNegativeTriple& x, double b, double q, const McConfig& cfg);

// E[exp(sum_i u_i X_{g(s_i)})], X_t = H_{-t} the first passage of Z below -t.
Estimate subordinator_fdd_mc(const levy::LevyTriple& z, const PiecewiseLinearCurve& xi00,
                             const std::vector<double>& times, const std::vector<double>& u, const McConfig& cfg);
// Sampled (X_{g(s_1)}, ..., X_{g(s_n)}) for the first n_paths paths.
std::vector<std::vector<double>> subordinator_samples(const levy::LevyTriple& z, const PiecewiseLinearCurve& xi00,
                                                      const std::vector<double>& times, const McConfig& cfg);

// dV = lambda(theta - V)dt + sigma sqrt(V) dW + dJ~, jumps with intensity V nu(dx).
struct HestonJumpParams {
  double lambda = 1.0;
  double theta = 0.25;
  double sigma = 0.4;
  double v0 = 0.25;
  levy::LevyMeasureSpec measure;
  void validate() const;
};

// E[exp(int_0^T f(T-s) V_s ds)] by full-truncation Euler; the bias bound is
// the gap to an independent run at twice the step.
Estimate heston_jump_euler_mgf(const HestonJumpParams& p, const PiecewiseConstant& f, const McConfig& cfg);

}  // namespace vlx::mc
