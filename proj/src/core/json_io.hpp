#pragma once

#include <string>

#include "core/harness.hpp"
#include "core/problem.hpp"

namespace mpct {

/// Parses the problem JSON schema: {"A", "B", "Ts", "N", "Q", "R", "T", "S",
/// "x_lb", "x_ub", "u_lb", "u_ub", "eps_x", "eps_u", "rho_base",
/// "rho_large"}. Matrices are row-major lists of lists; scalars are accepted
/// wherever the corresponding dimension is 1. eps and rho fields are
/// optional (defaults 1e-6, 5, 1000).
std::pair<MpctProblem, PenaltySpec> problem_from_json(const std::string& json_text);
std::pair<MpctProblem, PenaltySpec> problem_from_file(const std::string& path);

/// Parses an experiment configuration. "problem" is either an inline problem
/// object or a path resolved relative to the config file's directory.
ExperimentConfig experiment_from_json(const std::string& json_text, const std::string& base_dir);
ExperimentConfig experiment_from_file(const std::string& path);

std::string stats_to_json(const IterationStats& stats);

} // namespace mpct
