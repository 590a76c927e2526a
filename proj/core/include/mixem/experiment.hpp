#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mixem/em.hpp"
#include "mixem/model.hpp"

namespace mixem {

enum class InitKind { GaussianPrior, FromData, GroundTruth };

std::string init_kind_name(InitKind kind);
InitKind init_kind_from_name(const std::string& name);

/// Full protocol of a random-restart study. The algorithm field is a
/// template: its max_iters is superseded by the spec-level max_iters
/// and its seed by the per-trial derived stream.
struct ExperimentSpec {
  std::vector<int> K_values{3};
  std::vector<int> d_values{1};
  int n_samples = 30000;
  int n_inits = 1000;
  int max_iters = 3000;
  FitConfig algorithm{};
  double success_threshold = 0.5;
  std::uint64_t master_seed = 0;
  int n_instances = 1;
  bool center_data = true;
  InitKind init_kind = InitKind::GaussianPrior;
};

struct TrialResult {
  int K = 0;
  int d = 0;
  int instance_index = 0;
  int init_index = 0;
  bool success = false;
  double final_max_distance = 0.0;
  double final_loglik = 0.0;
  double moment_residual = 0.0;
  int iterations_used = 0;
  double wall_time = 0.0;  // seconds
};

struct SuccessRow {
  int K = 0;
  int d = 0;
  std::string algorithm;
  int n_instances = 0;
  int n_inits = 0;
  int n_trials = 0;
  int n_success = 0;
  double success_rate = 0.0;
};

struct SuccessTable {
  std::vector<SuccessRow> rows;
  std::string spec_hash;
  bool truncated = false;
  std::vector<TrialResult> trials;  // canonical (cell, instance, init) order
};

struct ExperimentOptions {
  int threads = 1;
  std::function<void(std::size_t done, std::size_t total)> progress;
  const std::atomic<bool>* cancel = nullptr;
};

/// Ground-truth model for one cell: K means drawn i.i.d. N(0, 5 I),
/// unit-variance Gaussian components.
MixtureModel generate_instance(int K, int d, std::uint64_t seed);

/// Random initial means, i.i.d. N(0, 5 I).
Eigen::MatrixXd generate_initialization(int K, int d, std::uint64_t seed);

/// One instance's immutable inputs, shared read-only by its trials.
struct PreparedInstance {
  MixtureModel model;        // truth, in the original data frame
  SampleSet samples;         // centered when spec.center_data
  Eigen::RowVectorXd shift;  // zero when centering is off
  int instance_index = 0;
};

PreparedInstance prepare_instance(int K, int d, int instance_index,
                                  const ExperimentSpec& spec);

/// Runs one initialization against a prepared instance. Deterministic
/// in (spec, instance, init_index) up to the wall_time field.
TrialResult run_trial(const PreparedInstance& instance, int init_index,
                      const ExperimentSpec& spec);

/// The full study. Trials run on a worker pool; results land in
/// preassigned slots, so the table is identical for any thread count.
SuccessTable run_experiment(const ExperimentSpec& spec,
                            const ExperimentOptions& options = {});

}  // namespace mixem
