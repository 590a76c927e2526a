#include <atomic>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixem/em.hpp"
#include "mixem/errors.hpp"
#include "mixem/experiment.hpp"
#include "mixem/io.hpp"
#include "mixem/mixture.hpp"
#include "mixem/population.hpp"
#include "mixem/verify.hpp"

namespace {

// 0 ok, 1 usage, 2 validation, 3 numerical, 4 verification failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

Eigen::MatrixXd parse_means(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::string row_buf;
  std::istringstream rows_in(text);
  while (std::getline(rows_in, row_buf, ';')) {
    std::vector<double> row;
    std::istringstream cols_in(row_buf);
    std::string cell;
    while (std::getline(cols_in, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        throw std::invalid_argument("--means: malformed number '" + cell +
                                    "'");
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("--means: no values");
  const auto d = rows.front().size();
  Eigen::MatrixXd means(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != d) {
      throw std::invalid_argument("--means: ragged rows");
    }
    for (std::size_t j = 0; j < d; ++j) {
      means(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          rows[k][j];
    }
  }
  return means;
}

mixem::LambdaSchedule parse_lambda_dist(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument(
        "--lambda-dist: expected kind:args, e.g. loguniform:0.01,1");
  }
  const std::string kind = text.substr(0, colon);
  const std::string args = text.substr(colon + 1);
  const auto comma = args.find(',');
  if (kind == "constant") {
    return mixem::LambdaSchedule::constant(std::stod(args));
  }
  if (comma == std::string::npos) {
    throw std::invalid_argument("--lambda-dist: " + kind +
                                " needs lo,hi bounds");
  }
  const double lo = std::stod(args.substr(0, comma));
  const double hi = std::stod(args.substr(comma + 1));
  if (kind == "loguniform") return mixem::LambdaSchedule::log_uniform(lo, hi);
  if (kind == "uniform") return mixem::LambdaSchedule::uniform(lo, hi);
  throw std::invalid_argument("--lambda-dist: unknown kind '" + kind + "'");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir + ": " +
                             ec.message());
  }
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// ---------------------------------------------------------------- sample --

struct SampleArgs {
  std::string family = "gaussian";
  int K = 0;
  int d = 0;
  std::string means;
  double scale = 1.0;
  int n = 0;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_sample(const SampleArgs& args) {
  const Eigen::MatrixXd means = parse_means(args.means);
  if (args.K > 0 && args.K != means.rows()) {
    throw std::invalid_argument("--k disagrees with the parsed --means rows");
  }
  if (args.d > 0 && args.d != means.cols()) {
    throw std::invalid_argument("--d disagrees with the parsed --means cols");
  }
  const mixem::MixtureModel model(mixem::family_from_name(args.family), means,
                                  args.scale);
  if (model.family() == mixem::Family::Laplacian && model.d() > 1) {
    std::cerr << "warning: multivariate Laplacian uses the per-coordinate "
                 "product form (experimental extension)\n";
  }
  if (args.n < 0) throw std::invalid_argument("--n must be >= 0");

  nlohmann::json config{{"family", args.family},
                        {"means", args.means},
                        {"scale", args.scale},
                        {"n", args.n},
                        {"seed", args.seed}};
  const std::string hash = mixem::digest_hex(config);

  const mixem::SampleSet samples = mixem::sample(model, args.n, args.seed);
  ensure_dir(args.out);
  nlohmann::json model_json = mixem::model_to_json(model);
  model_json["spec_hash"] = hash;
  model_json["seed"] = args.seed;
  mixem::write_text_file(join(args.out, "model.json"),
                         model_json.dump(2) + "\n");
  mixem::write_text_file(join(args.out, "samples.csv"),
                         mixem::samples_to_csv(samples, hash));
  std::cout << "wrote " << samples.n() << " samples to " << args.out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- fit ----

struct FitArgs {
  std::string samples_path;
  std::string algorithm = "naive";
  double M = 0.0;
  std::string lambda_dist = "loguniform:0.01,1";
  std::uint64_t seed = 0;
  std::string init;
  std::string init_file;
  int max_iters = 3000;
  double param_tol = 1e-8;
  bool center = false;
  std::string out = ".";
};

int cmd_fit(const FitArgs& args) {
  mixem::SampleSet samples =
      mixem::samples_from_csv(mixem::read_text_file(args.samples_path));

  Eigen::MatrixXd init;
  if (!args.init.empty()) {
    init = parse_means(args.init);
  } else if (!args.init_file.empty()) {
    const auto j = nlohmann::json::parse(mixem::read_text_file(args.init_file));
    init = mixem::model_from_json(j).means();
  } else {
    throw std::invalid_argument("fit: provide --init or --init-file");
  }

  mixem::FitConfig config;
  config.algorithm = mixem::algorithm_from_name(args.algorithm);
  config.regularization = args.M;
  config.schedule = parse_lambda_dist(args.lambda_dist);
  config.max_iters = args.max_iters;
  config.param_tol = args.param_tol;
  config.seed = args.seed;

  nlohmann::json cfg{{"samples", args.samples_path},
                     {"algorithm", args.algorithm},
                     {"M", args.M},
                     {"lambda_dist", args.lambda_dist},
                     {"seed", args.seed},
                     {"max_iters", args.max_iters},
                     {"param_tol", args.param_tol},
                     {"center", args.center}};
  const std::string hash = mixem::digest_hex(cfg);

  Eigen::RowVectorXd shift = Eigen::RowVectorXd::Zero(samples.d());
  if (args.center) {
    mixem::CenteredSamples cs = mixem::center_samples(samples);
    samples = std::move(cs.samples);
    shift = std::move(cs.shift);
  }

  mixem::FitResult result = mixem::fit(init, samples, config);
  if (args.center) result.means.rowwise() += shift;

  ensure_dir(args.out);
  nlohmann::json out_json =
      mixem::fit_result_to_json(result, args.seed, hash);
  out_json["centered"] = args.center;
  mixem::write_text_file(join(args.out, "means.json"),
                         out_json.dump(2) + "\n");
  mixem::write_text_file(join(args.out, "trace.csv"),
                         mixem::fit_trace_to_csv(result, hash));
  std::cout << (result.converged ? "converged" : "iteration budget exhausted")
            << " after " << result.iterations_used << " iterations\n";
  return kExitOk;
}

// --------------------------------------------------------- population-k2 --

struct PopulationArgs {
  double mu_star = 0.0;
  double lambda0 = 0.0;
  int max_iters = 200;
  double tol = 1e-10;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double tail_halfwidth = 40.0;
  bool allow_saddle = false;
  std::string out = ".";
};

int cmd_population_k2(const PopulationArgs& args) {
  if ((args.mu_star == 0.0 || args.lambda0 == 0.0) && !args.allow_saddle) {
    throw std::invalid_argument(
        "lambda = 0 and mu* = 0 are fixed points of the EM map (the saddle "
        "at 0 never moves); pass --allow-saddle to iterate there anyway");
  }
  mixem::QuadratureSettings settings;
  settings.abs_tol = args.abs_tol;
  settings.rel_tol = args.rel_tol;
  settings.tail_halfwidth = args.tail_halfwidth;

  nlohmann::json cfg{{"mu_star", args.mu_star},   {"lambda0", args.lambda0},
                     {"max_iters", args.max_iters}, {"tol", args.tol},
                     {"abs_tol", args.abs_tol},   {"rel_tol", args.rel_tol},
                     {"tail_halfwidth", args.tail_halfwidth}};
  const std::string hash = mixem::digest_hex(cfg);

  const mixem::PopulationTrajectory traj = mixem::run_population_em(
      args.lambda0, args.mu_star, args.max_iters, args.tol, settings);

  ensure_dir(args.out);
  mixem::write_text_file(join(args.out, "trajectory.csv"),
                         mixem::trajectory_to_csv(traj, hash));
  mixem::write_text_file(join(args.out, "population.json"),
                         mixem::trajectory_to_json(traj, hash).dump(2) + "\n");
  std::cout << (traj.converged ? "converged" : "not converged") << " in "
            << traj.ratios.size() << " steps; kappa = " << traj.kappa << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ experiment --

struct ExperimentArgs {
  std::string spec_path;
  std::vector<std::string> overrides;
  int threads = 0;
  bool trial_log = false;
  std::string out = ".";
};

void apply_override(nlohmann::json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("--set: expected key=value, got '" + kv + "'");
  }
  std::string key = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  for (char& c : key) {
    if (c == '.') c = '/';
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;  // bare strings, e.g. algorithm.kind=naive
  }
  j[nlohmann::json::json_pointer("/" + key)] = parsed;
}

int cmd_experiment(const ExperimentArgs& args) {
  nlohmann::json spec_json =
      nlohmann::json::parse(mixem::read_text_file(args.spec_path));
  for (const std::string& kv : args.overrides) {
    apply_override(spec_json, kv);
  }
  const mixem::ExperimentSpec spec = mixem::spec_from_json(spec_json);
  const std::string hash = mixem::spec_digest(spec);

  mixem::ExperimentOptions options;
  options.threads = args.threads > 0
                        ? args.threads
                        : static_cast<int>(std::max(
                              1u, std::thread::hardware_concurrency()));
  options.cancel = &g_interrupted;
  std::size_t last_percent = 101;
  options.progress = [&](std::size_t done, std::size_t total) {
    const std::size_t percent = 100 * done / total;
    if (percent != last_percent) {
      last_percent = percent;
      std::cerr << "\r" << done << "/" << total << " trials (" << percent
                << "%)" << std::flush;
      if (done == total) std::cerr << "\n";
    }
  };

  std::signal(SIGINT, handle_sigint);
  const mixem::SuccessTable table = mixem::run_experiment(spec, options);
  std::signal(SIGINT, SIG_DFL);
  if (table.truncated) std::cerr << "\ninterrupted; flushing partial results\n";

  ensure_dir(args.out);
  mixem::write_text_file(join(args.out, "table.csv"),
                         mixem::success_table_to_csv(table));
  nlohmann::json resolved = mixem::spec_to_json(spec);
  resolved["spec_hash"] = hash;
  resolved["truncated"] = table.truncated;
  mixem::write_text_file(join(args.out, "spec.json"),
                         resolved.dump(2) + "\n");
  if (args.trial_log) {
    mixem::write_text_file(join(args.out, "trials.csv"),
                           mixem::trial_log_to_csv(table));
  }
  std::cout << mixem::success_table_to_csv(table);
  return table.truncated ? 130 : kExitOk;
}

// ---------------------------------------------------------------- verify --

int cmd_verify(const std::string& level) {
  const mixem::VerifyLevel lvl =
      level == "full" ? mixem::VerifyLevel::Full : mixem::VerifyLevel::Fast;
  const mixem::VerifyReport report =
      mixem::run_verification(lvl, &std::cout);
  if (report.all_passed()) {
    std::cout << "all " << report.checks.size() << " checks passed\n";
    return kExitOk;
  }
  std::size_t failed = 0;
  for (const auto& check : report.checks) {
    if (!check.passed) ++failed;
  }
  std::cout << failed << " of " << report.checks.size() << " checks failed\n";
  return kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EM for equal-weight mixture models: sampling, fitting, "
               "population-level contraction analysis, and random-restart "
               "success-rate studies"};
  app.require_subcommand(1);

  SampleArgs sample_args;
  auto* sample_cmd =
      app.add_subcommand("sample", "draw samples from a mixture model");
  sample_cmd->add_option("--family", sample_args.family,
                         "gaussian or laplacian");
  sample_cmd->add_option("--k", sample_args.K, "component count (checked "
                         "against --means)");
  sample_cmd->add_option("--d", sample_args.d,
                         "dimension (checked against --means)");
  sample_cmd->add_option("--means", sample_args.means,
                         "mean rows, e.g. \"-1;1\" or \"0,0;1,2\"")
      ->required();
  sample_cmd->add_option("--scale", sample_args.scale, "component scale");
  sample_cmd->add_option("--n", sample_args.n, "number of samples")
      ->required();
  sample_cmd->add_option("--seed", sample_args.seed, "rng seed");
  sample_cmd->add_option("--out", sample_args.out, "output directory");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "run EM on a sample file");
  fit_cmd->add_option("--samples", fit_args.samples_path, "samples csv")
      ->required();
  fit_cmd->add_option("--algorithm", fit_args.algorithm,
                      "naive, regularized or stochastic")
      ->required();
  fit_cmd->add_option("--M", fit_args.M, "regularization coefficient");
  fit_cmd->add_option("--lambda-dist", fit_args.lambda_dist,
                      "stochastic penalty distribution, kind:args");
  fit_cmd->add_option("--seed", fit_args.seed, "stochastic schedule seed");
  fit_cmd->add_option("--init", fit_args.init, "initial means, row syntax");
  fit_cmd->add_option("--init-file", fit_args.init_file,
                      "json file with a means array");
  fit_cmd->add_option("--max-iters", fit_args.max_iters, "iteration cap");
  fit_cmd->add_option("--param-tol", fit_args.param_tol,
                      "early-stop step tolerance (0 disables)");
  fit_cmd->add_flag("--center", fit_args.center, "center the data first");
  fit_cmd->add_option("--out", fit_args.out, "output directory");

  PopulationArgs pop_args;
  auto* pop_cmd = app.add_subcommand(
      "population-k2",
      "population EM for the symmetric two-component Laplacian mixture");
  pop_cmd->add_option("--mu-star", pop_args.mu_star, "ground truth mu*")
      ->required();
  pop_cmd->add_option("--lambda0", pop_args.lambda0, "initial lambda")
      ->required();
  pop_cmd->add_option("--max-iters", pop_args.max_iters, "iteration cap");
  pop_cmd->add_option("--tol", pop_args.tol, "convergence tolerance");
  pop_cmd->add_option("--abs-tol", pop_args.abs_tol, "quadrature abs tol");
  pop_cmd->add_option("--rel-tol", pop_args.rel_tol, "quadrature rel tol");
  pop_cmd->add_option("--tail-halfwidth", pop_args.tail_halfwidth,
                      "integration window half-width");
  pop_cmd->add_flag("--allow-saddle", pop_args.allow_saddle,
                    "iterate even from the saddle fixed point at 0");
  pop_cmd->add_option("--out", pop_args.out, "output directory");

  ExperimentArgs exp_args;
  auto* exp_cmd =
      app.add_subcommand("experiment", "run a random-restart study");
  exp_cmd->add_option("--spec", exp_args.spec_path, "experiment spec json")
      ->required();
  exp_cmd->add_option("--set", exp_args.overrides,
                      "override a spec key, e.g. --set n_inits=50 or "
                      "--set algorithm.kind=naive");
  exp_cmd->add_option("--threads", exp_args.threads,
                      "worker threads (default: hardware)");
  exp_cmd->add_flag("--trial-log", exp_args.trial_log,
                    "also write per-trial rows");
  exp_cmd->add_option("--out", exp_args.out, "output directory");

  std::string verify_level = "fast";
  auto* verify_cmd =
      app.add_subcommand("verify", "run the built-in invariant suites");
  verify_cmd->add_option("level", verify_level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sample_cmd) return cmd_sample(sample_args);
    if (*fit_cmd) return cmd_fit(fit_args);
    if (*pop_cmd) return cmd_population_k2(pop_args);
    if (*exp_cmd) return cmd_experiment(exp_args);
    if (*verify_cmd) return cmd_verify(verify_level);
  } catch (const mixem::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
