#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mixem/model.hpp"

namespace mixem {

/// n x K matrix of per-component log densities log f(x_i; mu_k).
/// The workhorse behind density, log_likelihood, responsibilities and
/// the EM E-pass; everything downstream stays in log space.
Eigen::MatrixXd component_log_densities(const MixtureModel& model,
                                        const Eigen::MatrixXd& data);

/// Row-wise log(sum(exp(.))) with the usual max shift.
Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& m);

double log_density(const MixtureModel& model, const Eigen::VectorXd& x);
double density(const MixtureModel& model, const Eigen::VectorXd& x);

/// Mean per-sample log density, (1/n) sum_i log P(x_i).
double log_likelihood(const MixtureModel& model, const SampleSet& samples);

/// Posterior component probabilities for one point; sums to 1.
Eigen::VectorXd responsibilities(const MixtureModel& model,
                                 const Eigen::VectorXd& x);

/// n x K responsibility matrix for a whole batch.
Eigen::MatrixXd responsibility_matrix(const MixtureModel& model,
                                      const Eigen::MatrixXd& data);

/// Draws n points: component index uniform over {1..K}, then one draw
/// from that component. Deterministic in (model shape, n, seed).
SampleSet sample(const MixtureModel& model, int n, std::uint64_t seed);

struct CenteredSamples {
  SampleSet samples;
  Eigen::RowVectorXd shift;  // the subtracted column means
};

CenteredSamples center_samples(const SampleSet& samples);

}  // namespace mixem
