#include "mixem/mixture.hpp"

#include <cmath>
#include <stdexcept>

#include "mixem/rng.hpp"

namespace mixem {

namespace {

void check_dim(const MixtureModel& model, Eigen::Index d, const char* op) {
  if (d != model.d()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch");
  }
}

}  // namespace

Eigen::MatrixXd component_log_densities(const MixtureModel& model,
                                        const Eigen::MatrixXd& data) {
  check_dim(model, data.cols(), "component_log_densities");
  const auto n = data.rows();
  const int K = model.K();
  const int d = model.d();
  const double s = model.scale();
  Eigen::MatrixXd out(n, K);
  if (model.family() == Family::Gaussian) {
    // log f = -d/2 log(2 pi s^2) - (|x|^2 - 2 x.mu + |mu|^2) / (2 s^2)
    const double inv2s2 = 1.0 / (2.0 * s * s);
    const double norm_const = -0.5 * d * std::log(2.0 * M_PI * s * s);
    out.noalias() = data * model.means().transpose() * (2.0 * inv2s2);
    const Eigen::VectorXd xsq = data.rowwise().squaredNorm();
    const Eigen::VectorXd msq = model.means().rowwise().squaredNorm();
    out.colwise() -= xsq * inv2s2;
    out.rowwise() -= (msq * inv2s2).transpose();
    out.array() += norm_const;
  } else {
    // Product of per-coordinate Laplacians:
    // log f = -d log(2 b) - |x - mu|_1 / b
    const double norm_const = -d * std::log(2.0 * s);
    for (int k = 0; k < K; ++k) {
      out.col(k) =
          -(data.rowwise() - model.means().row(k)).cwiseAbs().rowwise().sum() /
          s;
    }
    out.array() += norm_const;
  }
  return out;
}

Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd shift = m.rowwise().maxCoeff();
  return shift.array() +
         (m.colwise() - shift).array().exp().rowwise().sum().log();
}

double log_density(const MixtureModel& model, const Eigen::VectorXd& x) {
  check_dim(model, x.size(), "log_density");
  const Eigen::MatrixXd lp = component_log_densities(model, x.transpose());
  return log_sum_exp_rows(lp)(0) - std::log(static_cast<double>(model.K()));
}

double density(const MixtureModel& model, const Eigen::VectorXd& x) {
  return std::exp(log_density(model, x));
}

double log_likelihood(const MixtureModel& model, const SampleSet& samples) {
  if (samples.n() < 1) {
    throw std::invalid_argument("log_likelihood: empty sample set");
  }
  check_dim(model, samples.data.cols(), "log_likelihood");
  const Eigen::MatrixXd lp = component_log_densities(model, samples.data);
  return log_sum_exp_rows(lp).mean() -
         std::log(static_cast<double>(model.K()));
}

Eigen::VectorXd responsibilities(const MixtureModel& model,
                                 const Eigen::VectorXd& x) {
  check_dim(model, x.size(), "responsibilities");
  return responsibility_matrix(model, x.transpose()).row(0).transpose();
}

Eigen::MatrixXd responsibility_matrix(const MixtureModel& model,
                                      const Eigen::MatrixXd& data) {
  Eigen::MatrixXd lp = component_log_densities(model, data);
  const Eigen::VectorXd lse = log_sum_exp_rows(lp);
  lp.colwise() -= lse;
  return lp.array().exp();
}

SampleSet sample(const MixtureModel& model, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample: n must be >= 0");
  const int K = model.K();
  const int d = model.d();
  Rng rng(seed);
  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i) {
    const int k = rng.next_index(K);
    for (int j = 0; j < d; ++j) {
      const double noise = model.family() == Family::Gaussian
                               ? rng.next_normal()
                               : rng.next_laplace();
      data(i, j) = model.means()(k, j) + model.scale() * noise;
    }
  }
  return SampleSet{std::move(data), seed, false};
}

CenteredSamples center_samples(const SampleSet& samples) {
  if (samples.n() < 1) {
    throw std::invalid_argument("center_samples: empty sample set");
  }
  const Eigen::RowVectorXd shift = samples.data.colwise().mean();
  SampleSet out;
  out.data = samples.data.rowwise() - shift;
  out.seed = samples.seed;
  out.centered = true;
  return CenteredSamples{std::move(out), shift};
}

}  // namespace mixem
