#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mixem {

/// Optimal component matching between an estimate and the truth.
/// permutation[k] is the estimated row paired with truth row k.
struct MatchReport {
  std::vector<int> permutation;
  Eigen::VectorXd per_component_distance;
  double max_distance = 0.0;
  double total_sq_distance = 0.0;
  double moment_residual = 0.0;  // of the estimated means
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian
/// method, O(n^3)); returns assignment[row] = column. Cost ties are
/// broken arbitrarily here; see match_components for the tie rule.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Matches rows of estimated to rows of truth minimizing the total
/// squared Euclidean distance; among cost ties, the lexicographically
/// smallest permutation wins.
MatchReport match_components(const Eigen::MatrixXd& estimated,
                             const Eigen::MatrixXd& truth);

/// ||sum_k mu_k||_2, the first-moment residual.
double moment_residual(const Eigen::MatrixXd& means);

/// True when the matched max per-component distance is <= threshold.
bool is_success(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& truth,
                double threshold);

}  // namespace mixem
