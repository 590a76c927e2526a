#include "mixem/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double assignment_cost(const Eigen::MatrixXd& cost,
                       const std::vector<int>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    total += cost(static_cast<Eigen::Index>(i), assignment[i]);
  }
  return total;
}

// Lexicographically smallest permutation among the optimal ones: fix
// columns row by row, accepting the smallest column whose forced cost
// plus the optimum of the remaining subproblem still meets the optimum.
std::vector<int> lex_min_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const std::vector<int> base = solve_assignment(cost);
  const double best = assignment_cost(cost, base);
  const double tie_eps = 1e-12 * (1.0 + std::abs(best));

  std::vector<int> avail(n);
  for (int j = 0; j < n; ++j) avail[j] = j;
  std::vector<int> perm(n, -1);
  double fixed = 0.0;

  for (int r = 0; r < n; ++r) {
    int chosen = -1;
    double chosen_total = kInf;
    for (std::size_t ci = 0; ci < avail.size(); ++ci) {
      const int c = avail[ci];
      double rest = 0.0;
      const int m = n - r - 1;
      if (m > 0) {
        Eigen::MatrixXd sub(m, m);
        int sj = 0;
        for (std::size_t cj = 0; cj < avail.size(); ++cj) {
          if (cj == ci) continue;
          for (int sr = 0; sr < m; ++sr) {
            sub(sr, sj) = cost(r + 1 + sr, avail[cj]);
          }
          ++sj;
        }
        rest = assignment_cost(sub, solve_assignment(sub));
      }
      const double total = fixed + cost(r, c) + rest;
      if (total <= best + tie_eps) {
        chosen = c;
        break;
      }
      if (total < chosen_total) {
        chosen_total = total;
        chosen = c;  // fallback against estimator drift; normally unused
      }
    }
    fixed += cost(r, chosen);
    perm[r] = chosen;
    avail.erase(std::find(avail.begin(), avail.end(), chosen));
  }
  return perm;
}

}  // namespace

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols() || cost.rows() < 1) {
    throw std::invalid_argument("solve_assignment: cost must be square");
  }
  const int n = static_cast<int>(cost.rows());

  // Potentials formulation; p[j] is the row matched to column j,
  // 1-based with a virtual 0 row/column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

MatchReport match_components(const Eigen::MatrixXd& estimated,
                             const Eigen::MatrixXd& truth) {
  if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols()) {
    throw std::invalid_argument("match_components: shape mismatch");
  }
  if (truth.rows() < 1) {
    throw std::invalid_argument("match_components: need K >= 1");
  }
  const int K = static_cast<int>(truth.rows());
  Eigen::MatrixXd cost(K, K);
  for (int k = 0; k < K; ++k) {
    cost.row(k) =
        (estimated.rowwise() - truth.row(k)).rowwise().squaredNorm().transpose();
  }

  MatchReport report;
  report.permutation = lex_min_assignment(cost);
  report.per_component_distance.resize(K);
  for (int k = 0; k < K; ++k) {
    report.per_component_distance(k) =
        (estimated.row(report.permutation[k]) - truth.row(k)).norm();
  }
  report.max_distance = report.per_component_distance.maxCoeff();
  report.total_sq_distance = report.per_component_distance.squaredNorm();
  report.moment_residual = moment_residual(estimated);
  return report;
}

double moment_residual(const Eigen::MatrixXd& means) {
  if (means.rows() < 1) {
    throw std::invalid_argument("moment_residual: need K >= 1");
  }
  return means.colwise().sum().norm();
}

bool is_success(const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& truth,
                double threshold) {
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("is_success: threshold must be positive");
  }
  return match_components(estimated, truth).max_distance <= threshold;
}

}  // namespace mixem
