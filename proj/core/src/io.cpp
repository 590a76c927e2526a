#include "mixem/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixem {

namespace {

std::string hash_comment(const std::string& spec_hash) {
  return "# spec_hash=" + spec_hash + "\n";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str()) {
    throw std::invalid_argument("csv: malformed number '" + token + "'");
  }
  return v;
}

nlohmann::json lambda_dist_to_json(const LambdaSchedule& schedule) {
  nlohmann::json j;
  switch (schedule.kind()) {
    case LambdaSchedule::Kind::LogUniform:
      j["kind"] = "loguniform";
      j["lo"] = schedule.lo();
      j["hi"] = schedule.hi();
      break;
    case LambdaSchedule::Kind::Uniform:
      j["kind"] = "uniform";
      j["lo"] = schedule.lo();
      j["hi"] = schedule.hi();
      break;
    case LambdaSchedule::Kind::Constant:
      j["kind"] = "constant";
      j["value"] = schedule.value();
      break;
  }
  return j;
}

LambdaSchedule lambda_dist_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "kind" && key != "lo" && key != "hi" && key != "value") {
      throw std::invalid_argument("lambda_dist: unknown key '" + key + "'");
    }
  }
  if (kind == "loguniform") {
    return LambdaSchedule::log_uniform(j.at("lo").get<double>(),
                                       j.at("hi").get<double>());
  }
  if (kind == "uniform") {
    return LambdaSchedule::uniform(j.at("lo").get<double>(),
                                   j.at("hi").get<double>());
  }
  if (kind == "constant") {
    return LambdaSchedule::constant(j.at("value").get<double>());
  }
  throw std::invalid_argument("lambda_dist: unknown kind '" + kind + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(const nlohmann::json& j) {
  const std::uint64_t h = fnv1a64(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json model_to_json(const MixtureModel& model) {
  nlohmann::json means = nlohmann::json::array();
  for (int k = 0; k < model.K(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < model.d(); ++j) row.push_back(model.means()(k, j));
    means.push_back(std::move(row));
  }
  return {{"family", family_name(model.family())},
          {"scale", model.scale()},
          {"means", std::move(means)}};
}

MixtureModel model_from_json(const nlohmann::json& j) {
  const Family family = family_from_name(j.at("family").get<std::string>());
  const double scale = j.value("scale", 1.0);
  const auto& rows = j.at("means");
  if (!rows.is_array() || rows.empty()) {
    throw std::invalid_argument("model json: means must be a non-empty array");
  }
  const auto K = static_cast<int>(rows.size());
  const auto d = static_cast<int>(rows.front().size());
  Eigen::MatrixXd means(K, d);
  for (int k = 0; k < K; ++k) {
    if (static_cast<int>(rows[k].size()) != d) {
      throw std::invalid_argument("model json: ragged means");
    }
    for (int c = 0; c < d; ++c) means(k, c) = rows[k][c].get<double>();
  }
  return MixtureModel(family, std::move(means), scale);
}

std::string samples_to_csv(const SampleSet& samples,
                           const std::string& spec_hash) {
  std::string out = hash_comment(spec_hash);
  for (int j = 0; j < samples.d(); ++j) {
    out += (j ? ",x" : "x") + std::to_string(j + 1);
  }
  out += '\n';
  for (int i = 0; i < samples.n(); ++i) {
    for (int j = 0; j < samples.d(); ++j) {
      if (j) out += ',';
      out += format_double(samples.data(i, j));
    }
    out += '\n';
  }
  return out;
}

SampleSet samples_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int d = -1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const std::vector<std::string> parts = split(line, ',');
    if (d < 0) {
      if (parts.empty() || parts.front() != "x1") {
        throw std::invalid_argument("samples csv: expected header x1,...,xd");
      }
      d = static_cast<int>(parts.size());
      continue;
    }
    if (static_cast<int>(parts.size()) != d) {
      throw std::invalid_argument("samples csv: ragged row");
    }
    for (const std::string& p : parts) values.push_back(parse_double(p));
  }
  if (d < 0) throw std::invalid_argument("samples csv: missing header");
  SampleSet samples;
  const auto n = static_cast<Eigen::Index>(values.size() / d);
  samples.data.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) samples.data(i, j) = values[i * d + j];
  }
  return samples;
}

std::string trajectory_to_csv(const PopulationTrajectory& trajectory,
                              const std::string& spec_hash) {
  std::string out = hash_comment(spec_hash);
  out += "t,lambda,abs_err,ratio\n";
  for (std::size_t t = 0; t < trajectory.iterates.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += format_double(trajectory.iterates[t]);
    out += ',';
    out += format_double(std::abs(trajectory.iterates[t] - trajectory.mu_star));
    out += ',';
    out += t == 0 ? "nan" : format_double(trajectory.ratios[t - 1]);
    out += '\n';
  }
  return out;
}

nlohmann::json trajectory_to_json(const PopulationTrajectory& trajectory,
                                  const std::string& spec_hash) {
  return {{"mu_star", trajectory.mu_star},
          {"lambda0", trajectory.lambda0},
          {"kappa1", trajectory.kappa1},
          {"kappa2", trajectory.kappa2},
          {"kappa", trajectory.kappa},
          {"converged", trajectory.converged},
          {"iterations", trajectory.ratios.size()},
          {"spec_hash", spec_hash}};
}

std::string fit_trace_to_csv(const FitResult& result,
                             const std::string& spec_hash) {
  std::string out = hash_comment(spec_hash);
  out += "iter,loglik,objective,moment_residual,max_step,lambda\n";
  for (const FitTraceRow& row : result.trace) {
    out += std::to_string(row.iter);
    out += ',';
    out += format_double(row.loglik);
    out += ',';
    out += format_double(row.objective);
    out += ',';
    out += format_double(row.moment_residual);
    out += ',';
    out += format_double(row.max_step);
    out += ',';
    out += format_double(row.lambda);
    out += '\n';
  }
  return out;
}

nlohmann::json fit_result_to_json(const FitResult& result, std::uint64_t seed,
                                  const std::string& spec_hash) {
  nlohmann::json means = nlohmann::json::array();
  for (Eigen::Index k = 0; k < result.means.rows(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < result.means.cols(); ++j) {
      row.push_back(result.means(k, j));
    }
    means.push_back(std::move(row));
  }
  nlohmann::json j{{"means", std::move(means)},
                   {"converged", result.converged},
                   {"iterations_used", result.iterations_used},
                   {"seed", seed},
                   {"degenerate", result.degenerate},
                   {"spec_hash", spec_hash}};
  if (!result.lambda_draws.empty()) j["lambda_draws"] = result.lambda_draws;
  return j;
}

nlohmann::json match_report_to_json(const MatchReport& report) {
  std::vector<double> distances(report.per_component_distance.data(),
                                report.per_component_distance.data() +
                                    report.per_component_distance.size());
  return {{"permutation", report.permutation},
          {"distances", distances},
          {"max_distance", report.max_distance},
          {"total_sq_distance", report.total_sq_distance},
          {"moment_residual", report.moment_residual}};
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json algorithm{
      {"kind", algorithm_name(spec.algorithm.algorithm)},
      {"M", spec.algorithm.regularization},
      {"lambda_dist", lambda_dist_to_json(spec.algorithm.schedule)},
      {"param_tol", spec.algorithm.param_tol}};
  return {{"K_values", spec.K_values},
          {"d_values", spec.d_values},
          {"n_samples", spec.n_samples},
          {"n_inits", spec.n_inits},
          {"max_iters", spec.max_iters},
          {"algorithm", std::move(algorithm)},
          {"success_threshold", spec.success_threshold},
          {"master_seed", spec.master_seed},
          {"n_instances", spec.n_instances},
          {"center_data", spec.center_data},
          {"init", init_kind_name(spec.init_kind)}};
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  static const char* known[] = {
      "K_values",    "d_values",          "n_samples",   "n_inits",
      "max_iters",   "algorithm",         "success_threshold",
      "master_seed", "n_instances",       "center_data", "init"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* name : known) ok = ok || key == name;
    if (!ok) {
      throw std::invalid_argument("experiment spec: unknown key '" + key +
                                  "'");
    }
  }
  ExperimentSpec spec;
  spec.K_values = j.at("K_values").get<std::vector<int>>();
  spec.d_values = j.at("d_values").get<std::vector<int>>();
  spec.n_samples = j.value("n_samples", spec.n_samples);
  spec.n_inits = j.value("n_inits", spec.n_inits);
  spec.max_iters = j.value("max_iters", spec.max_iters);
  spec.success_threshold =
      j.value("success_threshold", spec.success_threshold);
  spec.master_seed = j.value("master_seed", spec.master_seed);
  spec.n_instances = j.value("n_instances", spec.n_instances);
  spec.center_data = j.value("center_data", spec.center_data);
  if (j.contains("init")) {
    spec.init_kind = init_kind_from_name(j.at("init").get<std::string>());
  }
  const auto& a = j.at("algorithm");
  for (const auto& [key, value] : a.items()) {
    (void)value;
    if (key != "kind" && key != "M" && key != "lambda_dist" &&
        key != "param_tol") {
      throw std::invalid_argument("algorithm: unknown key '" + key + "'");
    }
  }
  spec.algorithm.algorithm =
      algorithm_from_name(a.at("kind").get<std::string>());
  spec.algorithm.regularization = a.value("M", 0.0);
  if (a.contains("lambda_dist")) {
    spec.algorithm.schedule = lambda_dist_from_json(a.at("lambda_dist"));
  }
  spec.algorithm.param_tol = a.value("param_tol", spec.algorithm.param_tol);
  spec.algorithm.max_iters = spec.max_iters;
  return spec;
}

std::string spec_digest(const ExperimentSpec& spec) {
  return digest_hex(spec_to_json(spec));
}

std::string success_table_to_csv(const SuccessTable& table) {
  std::string out = hash_comment(table.spec_hash);
  if (table.truncated) out += "# truncated=true\n";
  out += "K,d,algorithm,n_instances,n_inits,n_trials,n_success,success_rate\n";
  for (const SuccessRow& row : table.rows) {
    out += std::to_string(row.K) + ',' + std::to_string(row.d) + ',' +
           row.algorithm + ',' + std::to_string(row.n_instances) + ',' +
           std::to_string(row.n_inits) + ',' + std::to_string(row.n_trials) +
           ',' + std::to_string(row.n_success) + ',' +
           format_double(row.success_rate) + '\n';
  }
  return out;
}

std::string trial_log_to_csv(const SuccessTable& table) {
  std::string out = hash_comment(table.spec_hash);
  if (table.truncated) out += "# truncated=true\n";
  out +=
      "K,d,instance,init,success,final_max_distance,final_loglik,"
      "moment_residual,iterations_used,wall_time\n";
  for (const TrialResult& t : table.trials) {
    out += std::to_string(t.K) + ',' + std::to_string(t.d) + ',' +
           std::to_string(t.instance_index) + ',' +
           std::to_string(t.init_index) + ',' + (t.success ? "1" : "0") +
           ',' + format_double(t.final_max_distance) + ',' +
           format_double(t.final_loglik) + ',' +
           format_double(t.moment_residual) + ',' +
           std::to_string(t.iterations_used) + ',' +
           format_double(t.wall_time) + '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace mixem
