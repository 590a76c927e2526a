#include "mixem/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mixem/io.hpp"
#include "mixem/matching.hpp"
#include "mixem/mixture.hpp"
#include "mixem/rng.hpp"

namespace mixem {

namespace {

// Stream tags keeping the per-purpose RNG streams disjoint under one
// master seed.
constexpr std::uint64_t kInstanceTag = 0x696e7374;  // inst
constexpr std::uint64_t kSamplesTag = 0x73616d70;   // samp
constexpr std::uint64_t kInitTag = 0x696e6974;      // init
constexpr std::uint64_t kFitTag = 0x666974;         // fit

void validate_spec(const ExperimentSpec& spec) {
  if (spec.K_values.empty() || spec.d_values.empty()) {
    throw std::invalid_argument("experiment: K_values and d_values required");
  }
  for (const int K : spec.K_values) {
    if (K < 1) throw std::invalid_argument("experiment: K must be >= 1");
  }
  for (const int d : spec.d_values) {
    if (d < 1) throw std::invalid_argument("experiment: d must be >= 1");
  }
  if (spec.n_samples < 1 || spec.n_inits < 1 || spec.max_iters < 1 ||
      spec.n_instances < 1) {
    throw std::invalid_argument("experiment: counts must be >= 1");
  }
  if (!(spec.success_threshold > 0.0)) {
    throw std::invalid_argument(
        "experiment: success_threshold must be positive");
  }
}

Eigen::MatrixXd draw_prior_means(int K, int d, Rng& rng) {
  const double sd = std::sqrt(5.0);
  Eigen::MatrixXd means(K, d);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < d; ++j) {
      means(k, j) = sd * rng.next_normal();
    }
  }
  return means;
}

}  // namespace

std::string init_kind_name(InitKind kind) {
  switch (kind) {
    case InitKind::GaussianPrior:
      return "gaussian-prior";
    case InitKind::FromData:
      return "from-data";
    case InitKind::GroundTruth:
      return "ground-truth";
  }
  throw std::invalid_argument("init_kind_name: unknown kind");
}

InitKind init_kind_from_name(const std::string& name) {
  if (name == "gaussian-prior") return InitKind::GaussianPrior;
  if (name == "from-data") return InitKind::FromData;
  if (name == "ground-truth") return InitKind::GroundTruth;
  throw std::invalid_argument("unknown init kind: " + name);
}

MixtureModel generate_instance(int K, int d, std::uint64_t seed) {
  if (K < 1 || d < 1) {
    throw std::invalid_argument("generate_instance: K, d must be >= 1");
  }
  Rng rng(Rng::derive(seed, {kInstanceTag}));
  return MixtureModel(Family::Gaussian, draw_prior_means(K, d, rng), 1.0);
}

Eigen::MatrixXd generate_initialization(int K, int d, std::uint64_t seed) {
  if (K < 1 || d < 1) {
    throw std::invalid_argument("generate_initialization: K, d must be >= 1");
  }
  Rng rng(Rng::derive(seed, {kInitTag}));
  return draw_prior_means(K, d, rng);
}

PreparedInstance prepare_instance(int K, int d, int instance_index,
                                  const ExperimentSpec& spec) {
  const auto Ku = static_cast<std::uint64_t>(K);
  const auto du = static_cast<std::uint64_t>(d);
  const auto iu = static_cast<std::uint64_t>(instance_index);
  MixtureModel model = generate_instance(
      K, d, Rng::derive(spec.master_seed, {kInstanceTag, Ku, du, iu}));
  SampleSet raw =
      sample(model, spec.n_samples,
             Rng::derive(spec.master_seed, {kSamplesTag, Ku, du, iu}));
  if (spec.center_data) {
    CenteredSamples cs = center_samples(raw);
    return {std::move(model), std::move(cs.samples), std::move(cs.shift),
            instance_index};
  }
  return {std::move(model), std::move(raw), Eigen::RowVectorXd::Zero(d),
          instance_index};
}

TrialResult run_trial(const PreparedInstance& instance, int init_index,
                      const ExperimentSpec& spec) {
  const int K = instance.model.K();
  const int d = instance.model.d();
  const auto Ku = static_cast<std::uint64_t>(K);
  const auto du = static_cast<std::uint64_t>(d);
  const auto iu = static_cast<std::uint64_t>(instance.instance_index);
  const auto ju = static_cast<std::uint64_t>(init_index);

  Eigen::MatrixXd init;
  switch (spec.init_kind) {
    case InitKind::GaussianPrior:
      init = generate_initialization(
          K, d, Rng::derive(spec.master_seed, {kInitTag, Ku, du, iu, ju}));
      break;
    case InitKind::FromData: {
      if (instance.samples.n() < K) {
        throw std::invalid_argument(
            "run_trial: from-data init needs at least K samples");
      }
      Rng rng(Rng::derive(spec.master_seed, {kInitTag, Ku, du, iu, ju}));
      init.resize(K, d);
      std::vector<int> picked;
      for (int k = 0; k < K; ++k) {
        int row = rng.next_index(instance.samples.n());
        while (std::find(picked.begin(), picked.end(), row) != picked.end()) {
          row = rng.next_index(instance.samples.n());
        }
        picked.push_back(row);
        init.row(k) = instance.samples.data.row(row);
      }
      break;
    }
    case InitKind::GroundTruth:
      init = instance.model.means().rowwise() - instance.shift;
      break;
  }

  FitConfig config = spec.algorithm;
  config.max_iters = spec.max_iters;
  config.seed = Rng::derive(spec.master_seed, {kFitTag, Ku, du, iu, ju});

  const auto t0 = std::chrono::steady_clock::now();
  const FitResult fr = fit(init, instance.samples, config);
  const auto t1 = std::chrono::steady_clock::now();

  const Eigen::MatrixXd estimated = fr.means.rowwise() + instance.shift;
  const MatchReport report =
      match_components(estimated, instance.model.means());

  TrialResult trial;
  trial.K = K;
  trial.d = d;
  trial.instance_index = instance.instance_index;
  trial.init_index = init_index;
  trial.final_max_distance = report.max_distance;
  trial.success = report.max_distance <= spec.success_threshold;
  trial.final_loglik = fr.trace.back().loglik;
  trial.moment_residual = fr.trace.back().moment_residual;
  trial.iterations_used = fr.iterations_used;
  trial.wall_time = std::chrono::duration<double>(t1 - t0).count();
  return trial;
}

SuccessTable run_experiment(const ExperimentSpec& spec,
                            const ExperimentOptions& options) {
  validate_spec(spec);

  struct Cell {
    int K, d;
  };
  std::vector<Cell> cells;
  for (const int K : spec.K_values) {
    for (const int d : spec.d_values) {
      cells.push_back({K, d});
    }
  }

  std::vector<PreparedInstance> instances;
  instances.reserve(cells.size() * static_cast<std::size_t>(spec.n_instances));
  for (const Cell& cell : cells) {
    for (int i = 0; i < spec.n_instances; ++i) {
      instances.push_back(prepare_instance(cell.K, cell.d, i, spec));
    }
  }

  struct Job {
    const PreparedInstance* instance;
    int init_index;
  };
  std::vector<Job> jobs;
  jobs.reserve(instances.size() * static_cast<std::size_t>(spec.n_inits));
  for (const PreparedInstance& inst : instances) {
    for (int j = 0; j < spec.n_inits; ++j) {
      jobs.push_back({&inst, j});
    }
  }

  const std::size_t total = jobs.size();
  std::vector<TrialResult> results(total);
  std::vector<char> completed(total, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex report_mutex;

  const auto worker = [&]() {
    for (;;) {
      if (failed.load() ||
          (options.cancel && options.cancel->load())) {
        return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        results[i] = run_trial(*jobs[i].instance, jobs[i].init_index, spec);
        completed[i] = 1;
      } catch (...) {
        std::lock_guard<std::mutex> lock(report_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (options.progress) {
        std::lock_guard<std::mutex> lock(report_mutex);
        options.progress(d, total);
      }
    }
  };

  const int threads = std::max(1, options.threads);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads - 1));
  for (int t = 1; t < threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  SuccessTable table;
  table.spec_hash = spec_digest(spec);
  table.truncated = done.load() < total;
  table.trials.reserve(done.load());
  for (std::size_t i = 0; i < total; ++i) {
    if (completed[i]) table.trials.push_back(results[i]);
  }

  for (const Cell& cell : cells) {
    SuccessRow row;
    row.K = cell.K;
    row.d = cell.d;
    row.algorithm = algorithm_name(spec.algorithm.algorithm);
    row.n_instances = spec.n_instances;
    row.n_inits = spec.n_inits;
    for (const TrialResult& trial : table.trials) {
      if (trial.K != cell.K || trial.d != cell.d) continue;
      ++row.n_trials;
      if (trial.success) ++row.n_success;
    }
    row.success_rate =
        row.n_trials > 0
            ? static_cast<double>(row.n_success) / row.n_trials
            : 0.0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mixem
