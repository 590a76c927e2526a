#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mixem/em.hpp"
#include "mixem/experiment.hpp"
#include "mixem/matching.hpp"
#include "mixem/model.hpp"
#include "mixem/population.hpp"

namespace mixem {

/// Shortest decimal that round-trips (printf %.17g).
std::string format_double(double value);

std::uint64_t fnv1a64(std::string_view bytes);

/// 16-hex-char FNV-1a digest of a JSON value's canonical dump
/// (nlohmann keeps object keys sorted, so the dump is stable).
std::string digest_hex(const nlohmann::json& j);

nlohmann::json model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const nlohmann::json& j);

/// CSV with a `# spec_hash=` provenance comment, then `x1,...,xd`.
std::string samples_to_csv(const SampleSet& samples,
                           const std::string& spec_hash);
SampleSet samples_from_csv(const std::string& text);

std::string trajectory_to_csv(const PopulationTrajectory& trajectory,
                              const std::string& spec_hash);
nlohmann::json trajectory_to_json(const PopulationTrajectory& trajectory,
                                  const std::string& spec_hash);

std::string fit_trace_to_csv(const FitResult& result,
                             const std::string& spec_hash);
nlohmann::json fit_result_to_json(const FitResult& result, std::uint64_t seed,
                                  const std::string& spec_hash);

nlohmann::json match_report_to_json(const MatchReport& report);

nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);
std::string spec_digest(const ExperimentSpec& spec);

std::string success_table_to_csv(const SuccessTable& table);
std::string trial_log_to_csv(const SuccessTable& table);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mixem
