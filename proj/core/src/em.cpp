#include "mixem/em.hpp"

#include <cmath>
#include <stdexcept>

#include "mixem/errors.hpp"
#include "mixem/mixture.hpp"

namespace mixem {

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Naive:
      return "naive";
    case Algorithm::Regularized:
      return "regularized";
    case Algorithm::Stochastic:
      return "stochastic";
  }
  throw std::invalid_argument("algorithm_name: unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "naive") return Algorithm::Naive;
  if (name == "regularized") return Algorithm::Regularized;
  if (name == "stochastic") return Algorithm::Stochastic;
  throw std::invalid_argument("unknown algorithm: " + name);
}

LambdaSchedule LambdaSchedule::log_uniform(double lo, double hi) {
  if (!(lo > 0.0) || !(lo < hi) || !std::isfinite(hi)) {
    throw std::invalid_argument("log_uniform: requires 0 < lo < hi < inf");
  }
  return {Kind::LogUniform, lo, hi, 0.0};
}

LambdaSchedule LambdaSchedule::uniform(double lo, double hi) {
  if (!(lo >= 0.0) || !(lo < hi) || !std::isfinite(hi)) {
    throw std::invalid_argument("uniform: requires 0 <= lo < hi < inf");
  }
  return {Kind::Uniform, lo, hi, 0.0};
}

LambdaSchedule LambdaSchedule::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("constant: requires value >= 0");
  }
  return {Kind::Constant, value, value, value};
}

double LambdaSchedule::draw(Rng& rng) const {
  switch (kind_) {
    case Kind::LogUniform: {
      const double u = rng.next_double();
      return std::exp(std::log(lo_) + u * (std::log(hi_) - std::log(lo_)));
    }
    case Kind::Uniform:
      return lo_ + rng.next_double() * (hi_ - lo_);
    case Kind::Constant:
      return value_;
  }
  throw std::invalid_argument("LambdaSchedule::draw: unknown kind");
}

namespace {

constexpr std::uint64_t kScheduleStreamTag = 0x666974;  // fit

void check_fit_inputs(const Eigen::MatrixXd& means, const SampleSet& samples) {
  if (samples.n() < 1) {
    throw std::invalid_argument("EM: empty sample set");
  }
  if (means.rows() < 1 || means.cols() != samples.data.cols()) {
    throw std::invalid_argument("EM: means/samples dimension mismatch");
  }
}

struct EPass {
  Eigen::MatrixXd resp;  // n x K
  double loglik;
};

EPass e_pass(const Eigen::MatrixXd& means, const Eigen::MatrixXd& data) {
  const MixtureModel model(Family::Gaussian, means);
  Eigen::MatrixXd lp = component_log_densities(model, data);
  const Eigen::VectorXd lse = log_sum_exp_rows(lp);
  const double loglik =
      lse.mean() - std::log(static_cast<double>(means.rows()));
  lp.colwise() -= lse;
  return {lp.array().exp().matrix(), loglik};
}

Eigen::MatrixXd m_step(const Eigen::MatrixXd& resp, const Eigen::MatrixXd& data,
                       const Eigen::MatrixXd& means, double M,
                       bool* degenerate) {
  const auto n = static_cast<double>(data.rows());
  const int K = static_cast<int>(means.rows());
  const Eigen::VectorXd wbar = resp.colwise().mean();
  const Eigen::MatrixXd xw = data.transpose() * resp / n;  // d x K
  const Eigen::RowVectorXd mean_sum = means.colwise().sum();
  Eigen::MatrixXd out(K, means.cols());
  for (int k = 0; k < K; ++k) {
    const double den = M * K + wbar(k);
    if (den < 1e-300) {
      if (M == 0.0) {
        // Empty component under plain EM: freeze it rather than divide.
        out.row(k) = means.row(k);
        if (degenerate) *degenerate = true;
        continue;
      }
      throw numerical_error("EM step: vanishing denominator for component " +
                                std::to_string(k),
                            den);
    }
    out.row(k) =
        (xw.col(k).transpose() + M * K * means.row(k) - M * mean_sum) / den;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd regularized_em_step(const Eigen::MatrixXd& means,
                                    const SampleSet& samples, double M,
                                    bool* degenerate) {
  check_fit_inputs(means, samples);
  if (!(M >= 0.0) || !std::isfinite(M)) {
    throw std::invalid_argument("regularized_em_step: M must be >= 0");
  }
  const EPass ep = e_pass(means, samples.data);
  return m_step(ep.resp, samples.data, means, M, degenerate);
}

Eigen::MatrixXd naive_em_step(const Eigen::MatrixXd& means,
                              const SampleSet& samples, bool* degenerate) {
  return regularized_em_step(means, samples, 0.0, degenerate);
}

double regularized_objective(const Eigen::MatrixXd& means,
                             const SampleSet& samples, double M) {
  check_fit_inputs(means, samples);
  if (!(M >= 0.0) || !std::isfinite(M)) {
    throw std::invalid_argument("regularized_objective: M must be >= 0");
  }
  const MixtureModel model(Family::Gaussian, means);
  const double penalty = means.colwise().sum().squaredNorm();
  return log_likelihood(model, samples) - 0.5 * M * penalty;
}

double surrogate(const Eigen::MatrixXd& means, const Eigen::MatrixXd& anchor,
                 const SampleSet& samples, double M) {
  check_fit_inputs(anchor, samples);
  if (means.rows() != anchor.rows() || means.cols() != anchor.cols()) {
    throw std::invalid_argument("surrogate: means/anchor shape mismatch");
  }
  if (!(M >= 0.0) || !std::isfinite(M)) {
    throw std::invalid_argument("surrogate: M must be >= 0");
  }
  const auto n = static_cast<double>(samples.data.rows());
  const int K = static_cast<int>(anchor.rows());
  const EPass ep = e_pass(anchor, samples.data);
  const Eigen::MatrixXd xw = samples.data.transpose() * ep.resp / n;
  const Eigen::VectorXd wbar = ep.resp.colwise().mean();

  // E[sum_k w_k log(f(x;mu_k)/f(x;mu_k^a))] expanded for the unit
  // Gaussian: <E[w_k x], mu_k - mu_k^a> - E[w_k](|mu_k|^2 - |mu_k^a|^2)/2.
  double term1 = 0.0;
  double prox = 0.0;
  for (int k = 0; k < K; ++k) {
    const Eigen::RowVectorXd diff = means.row(k) - anchor.row(k);
    term1 += diff.dot(xw.col(k).transpose()) -
             0.5 * wbar(k) *
                 (means.row(k).squaredNorm() - anchor.row(k).squaredNorm());
    prox += diff.squaredNorm();
  }
  const Eigen::RowVectorXd sum_diff =
      means.colwise().sum() - anchor.colwise().sum();
  const double cross = sum_diff.dot(anchor.colwise().sum());
  return term1 - 0.5 * M * K * prox - M * cross +
         regularized_objective(anchor, samples, M);
}

FitResult fit(const Eigen::MatrixXd& init_means, const SampleSet& samples,
              const FitConfig& config) {
  check_fit_inputs(init_means, samples);
  if (config.max_iters < 1) {
    throw std::invalid_argument("fit: max_iters must be >= 1");
  }
  if (!(config.param_tol >= 0.0)) {
    throw std::invalid_argument("fit: param_tol must be >= 0");
  }
  if (config.algorithm == Algorithm::Regularized &&
      (!(config.regularization >= 0.0) ||
       !std::isfinite(config.regularization))) {
    throw std::invalid_argument("fit: regularization must be >= 0");
  }

  Rng schedule_rng(Rng::derive(config.seed, {kScheduleStreamTag}));
  FitResult res;
  Eigen::MatrixXd means = init_means;
  EPass ep = e_pass(means, samples.data);
  res.trace.reserve(static_cast<std::size_t>(config.max_iters));

  for (int t = 1; t <= config.max_iters; ++t) {
    double lam = 0.0;
    switch (config.algorithm) {
      case Algorithm::Naive:
        break;
      case Algorithm::Regularized:
        lam = config.regularization;
        break;
      case Algorithm::Stochastic:
        lam = config.schedule.draw(schedule_rng);
        res.lambda_draws.push_back(lam);
        break;
    }
    bool deg = false;
    const Eigen::MatrixXd next =
        m_step(ep.resp, samples.data, means, lam, &deg);
    res.degenerate = res.degenerate || deg;
    const double max_step = (next - means).rowwise().norm().maxCoeff();
    means = next;
    ep = e_pass(means, samples.data);
    const double sq_residual = means.colwise().sum().squaredNorm();
    res.trace.push_back({t, ep.loglik, ep.loglik - 0.5 * lam * sq_residual,
                         std::sqrt(sq_residual), max_step, lam});
    if (max_step < config.param_tol) {
      res.converged = true;
      break;
    }
  }
  res.means = std::move(means);
  res.iterations_used = static_cast<int>(res.trace.size());
  return res;
}

}  // namespace mixem
