#pragma once

// Config-driven experiment runner behind the `iqtd` command-line tool.
//
// A config is a JSON object. Required keys: model ("iqtd" | "death"),
// coefficients, weight_s, trunc_n, tolerance. Unknown keys are rejected.
// See README.md for the full key list and the artifact layout.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace iqtd::experiment {

inline constexpr std::array<std::string_view, 7> kExperiments = {
    "simulate", "eigen", "periodic", "density", "stability", "dsw-check", "hypotheses"};

/// Every invariant violation in the config, without executing anything.
/// When `experiment` is given it must agree with the config's own
/// "experiment" key, if present. Empty result means runnable.
std::vector<std::string> validate(const nlohmann::json& config,
                                  std::optional<std::string_view> experiment = std::nullopt);

/// Replaces the seed of every uniform coefficient source.
nlohmann::json with_seed(nlohmann::json config, std::uint64_t seed);

struct RunOutcome {
  int exit_code = 0;
  /// summary.json contents on success, error.json contents otherwise.
  nlohmann::json document;
};

/// Exit codes: 0 ran to completion (see "pass" in the summary), 2 invalid
/// config, 3 runtime rejection (capacity, inadmissible period, bad input).
RunOutcome run(const nlohmann::json& config, std::optional<std::string_view> experiment,
               const std::filesystem::path& out_dir);

/// Shortest-round-trip-safe decimal form with 17 significant digits.
std::string format_number(double x);

}  // namespace iqtd::experiment
