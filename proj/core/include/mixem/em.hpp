#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mixem/model.hpp"
#include "mixem/rng.hpp"

namespace mixem {

enum class Algorithm { Naive, Regularized, Stochastic };

std::string algorithm_name(Algorithm algorithm);
Algorithm algorithm_from_name(const std::string& name);

/// The distribution the stochastic variant draws its per-iteration
/// penalty weight from. Constant never touches the generator, so a
/// constant-schedule stochastic run replays a plain regularized one.
class LambdaSchedule {
 public:
  enum class Kind { LogUniform, Uniform, Constant };

  static LambdaSchedule log_uniform(double lo, double hi);
  static LambdaSchedule uniform(double lo, double hi);
  static LambdaSchedule constant(double value);

  double draw(Rng& rng) const;

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double value() const { return value_; }

 private:
  LambdaSchedule(Kind kind, double lo, double hi, double value)
      : kind_(kind), lo_(lo), hi_(hi), value_(value) {}

  Kind kind_;
  double lo_;
  double hi_;
  double value_;
};

struct FitConfig {
  Algorithm algorithm = Algorithm::Naive;
  /// Penalty coefficient M; Regularized only.
  double regularization = 0.0;
  /// Penalty-weight distribution; Stochastic only.
  LambdaSchedule schedule = LambdaSchedule::log_uniform(1e-2, 1.0);
  int max_iters = 3000;
  /// Stop once max_k ||mu_k' - mu_k|| < param_tol; 0 disables early
  /// stopping (fixed-iteration mode).
  double param_tol = 1e-8;
  /// Seeds the schedule stream; Stochastic only.
  std::uint64_t seed = 0;
};

struct FitTraceRow {
  int iter;  // 1-based
  double loglik;
  double objective;  // loglik - (lambda/2) ||sum_k mu_k||^2 at this row's lambda
  double moment_residual;
  double max_step;
  double lambda;  // penalty weight used this iteration (0 for naive)
};

struct FitResult {
  Eigen::MatrixXd means;
  std::vector<FitTraceRow> trace;
  bool converged = false;
  int iterations_used = 0;
  std::vector<double> lambda_draws;  // Stochastic only; one per iteration
  bool degenerate = false;  // some component went empty and was frozen
};

/// One naive EM step (Gaussian, unit variance, equal weights).
/// Identical to regularized_em_step with M = 0, same operation order.
Eigen::MatrixXd naive_em_step(const Eigen::MatrixXd& means,
                              const SampleSet& samples,
                              bool* degenerate = nullptr);

/// One moment-regularized step:
/// mu_k' = (E[x w_k] + M K mu_k - M sum_j mu_j) / (M K + E[w_k]),
/// expectations being sample averages with responsibilities from the
/// input means (all components read the same anchor).
Eigen::MatrixXd regularized_em_step(const Eigen::MatrixXd& means,
                                    const SampleSet& samples, double M,
                                    bool* degenerate = nullptr);

/// Sample log-likelihood minus (M/2) ||sum_k mu_k||^2.
double regularized_objective(const Eigen::MatrixXd& means,
                             const SampleSet& samples, double M);

/// The minorizing surrogate g_hat(means, anchor): tight at the anchor,
/// everywhere below the regularized objective, and maximized exactly by
/// regularized_em_step(anchor, ...).
double surrogate(const Eigen::MatrixXd& means, const Eigen::MatrixXd& anchor,
                 const SampleSet& samples, double M);

FitResult fit(const Eigen::MatrixXd& init_means, const SampleSet& samples,
              const FitConfig& config);

}  // namespace mixem
