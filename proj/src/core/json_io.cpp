#include "core/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace mpct {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::parse, "malformed JSON in " + what);
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double as_number(const json& j, const std::string& name) {
  if (!j.is_number()) fail(ErrorCode::parse, name + ": expected a number");
  return j.get<double>();
}

Eigen::VectorXd as_vector(const json& j, Eigen::Index len, const std::string& name) {
  if (j.is_number() && len == 1) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) fail(ErrorCode::parse, name + ": expected an array");
  if (static_cast<Eigen::Index>(j.size()) != len)
    fail(ErrorCode::parse, name + ": expected length " + std::to_string(len));
  Eigen::VectorXd v(len);
  for (Eigen::Index i = 0; i < len; ++i) v[i] = as_number(j[i], name);
  return v;
}

// Row-major matrix; a scalar is accepted for 1x1 and a flat array for a
// single-column matrix.
Eigen::MatrixXd as_matrix(const json& j, Eigen::Index rows, Eigen::Index cols,
                          const std::string& name) {
  if (j.is_number() && rows == 1 && cols == 1)
    return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) fail(ErrorCode::parse, name + ": expected a matrix");
  if (!j[0].is_array()) {
    if (cols != 1) fail(ErrorCode::parse, name + ": expected " + std::to_string(cols) + " columns");
    return as_vector(j, rows, name);
  }
  if (static_cast<Eigen::Index>(j.size()) != rows)
    fail(ErrorCode::parse, name + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(ErrorCode::parse, name + ": row " + std::to_string(r) + " has wrong length");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = as_number(row[c], name);
  }
  return M;
}

const json& require(const json& j, const std::string& key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::parse, what + ": missing field \"" + key + "\"");
  return *it;
}

std::pair<MpctProblem, PenaltySpec> problem_from_parsed(const json& j) {
  if (!j.is_object()) fail(ErrorCode::parse, "problem: expected a JSON object");

  const json& jA = require(j, "A", "problem");
  if (!jA.is_array() || jA.empty()) fail(ErrorCode::parse, "problem: A must be a matrix");
  const Eigen::Index n = static_cast<Eigen::Index>(jA.size());

  const json& jB = require(j, "B", "problem");
  Eigen::Index m = 1;
  if (jB.is_array() && !jB.empty() && jB[0].is_array())
    m = static_cast<Eigen::Index>(jB[0].size());

  MpctProblem prob;
  prob.model.A = as_matrix(jA, n, n, "A");
  prob.model.B = as_matrix(jB, n, m, "B");
  prob.model.Ts = as_number(require(j, "Ts", "problem"), "Ts");
  prob.model.x_lb = as_vector(require(j, "x_lb", "problem"), n, "x_lb");
  prob.model.x_ub = as_vector(require(j, "x_ub", "problem"), n, "x_ub");
  prob.model.u_lb = as_vector(require(j, "u_lb", "problem"), m, "u_lb");
  prob.model.u_ub = as_vector(require(j, "u_ub", "problem"), m, "u_ub");

  const json& jN = require(j, "N", "problem");
  if (!jN.is_number_integer()) fail(ErrorCode::parse, "N: expected an integer");
  prob.N = jN.get<int>();

  prob.Q = as_matrix(require(j, "Q", "problem"), n, n, "Q");
  prob.R = as_matrix(require(j, "R", "problem"), m, m, "R");
  prob.T = as_matrix(require(j, "T", "problem"), n, n, "T");
  prob.S = as_matrix(require(j, "S", "problem"), m, m, "S");

  prob.eps_x = j.contains("eps_x") ? as_vector(j["eps_x"], n, "eps_x")
                                   : Eigen::VectorXd::Constant(n, 1e-6);
  prob.eps_u = j.contains("eps_u") ? as_vector(j["eps_u"], m, "eps_u")
                                   : Eigen::VectorXd::Constant(m, 1e-6);

  PenaltySpec pen;
  if (j.contains("rho_base")) pen.rho_base = as_number(j["rho_base"], "rho_base");
  if (j.contains("rho_large")) pen.rho_large = as_number(j["rho_large"], "rho_large");

  prob.validate();
  pen.validate();
  return {std::move(prob), pen};
}

PendulumParams plant_params_from_parsed(const json& j) {
  PendulumParams p;
  if (j.contains("m_r")) p.m_r = as_number(j["m_r"], "plant.m_r");
  if (j.contains("M")) p.M = as_number(j["M"], "plant.M");
  if (j.contains("R")) p.R = as_number(j["R"], "plant.R");
  if (j.contains("L")) p.L = as_number(j["L"], "plant.L");
  if (j.contains("g")) p.g = as_number(j["g"], "plant.g");
  if (j.contains("phi0")) p.phi0 = as_number(j["phi0"], "plant.phi0");
  return p;
}

} // namespace

std::pair<MpctProblem, PenaltySpec> problem_from_json(const std::string& json_text) {
  return problem_from_parsed(parse_json(json_text, "problem"));
}

std::pair<MpctProblem, PenaltySpec> problem_from_file(const std::string& path) {
  return problem_from_json(read_file(path));
}

ExperimentConfig experiment_from_json(const std::string& json_text, const std::string& base_dir) {
  const json j = parse_json(json_text, "experiment config");
  if (!j.is_object()) fail(ErrorCode::parse, "experiment config: expected a JSON object");

  ExperimentConfig cfg;

  const json& jp = require(j, "problem", "experiment config");
  if (jp.is_string()) {
    std::filesystem::path p(jp.get<std::string>());
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    std::tie(cfg.problem, cfg.pen) = problem_from_file(p.string());
  } else {
    std::tie(cfg.problem, cfg.pen) = problem_from_parsed(jp);
  }

  cfg.duration = as_number(require(j, "duration_s", "experiment config"), "duration_s");

  if (j.contains("plant")) {
    const json& pl = j["plant"];
    cfg.plant.params = plant_params_from_parsed(pl);
    if (pl.contains("kind")) {
      const std::string kind = pl["kind"].get<std::string>();
      if (kind == "linear")
        cfg.plant.linear = true;
      else if (kind == "nonlinear")
        cfg.plant.linear = false;
      else
        fail(ErrorCode::parse, "plant.kind: expected \"linear\" or \"nonlinear\"");
    }
    if (pl.contains("substeps")) cfg.plant.substeps = pl["substeps"].get<int>();
  }

  if (j.contains("x0")) cfg.x0 = as_vector(j["x0"], 3, "x0");

  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (s.contains("tol")) cfg.solver.tol = as_number(s["tol"], "solver.tol");
    if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<int>();
    if (s.contains("warm_start")) cfg.solver.warm_start = s["warm_start"].get<bool>();
  }

  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("disturbances")) {
    for (const json& d : j["disturbances"])
      cfg.disturbances.push_back(
          {as_number(require(d, "t", "disturbance"), "disturbance.t"),
           as_number(require(d, "dv", "disturbance"), "disturbance.dv")});
  }

  // Optional seeded push generator: pushes of magnitude |dv| with random sign
  // every `period` seconds starting at `start`.
  if (j.contains("random_pushes")) {
    const json& rp = j["random_pushes"];
    const int count = require(rp, "count", "random_pushes").get<int>();
    const double start = as_number(require(rp, "start", "random_pushes"), "random_pushes.start");
    const double period = as_number(require(rp, "period", "random_pushes"), "random_pushes.period");
    const double magnitude =
        as_number(require(rp, "magnitude", "random_pushes"), "random_pushes.magnitude");
    std::mt19937_64 rng(cfg.seed);
    std::bernoulli_distribution sign(0.5);
    for (int i = 0; i < count; ++i)
      cfg.disturbances.push_back({start + i * period, sign(rng) ? magnitude : -magnitude});
    std::sort(cfg.disturbances.begin(), cfg.disturbances.end(),
              [](const auto& a, const auto& b) { return a.t < b.t; });
  }

  if (j.contains("references")) {
    for (const json& r : j["references"]) {
      ReferenceEvent ev;
      ev.t = as_number(require(r, "t", "reference"), "reference.t");
      ev.x_ref = as_vector(require(r, "x_ref", "reference"), cfg.problem.n(), "reference.x_ref");
      ev.u_ref = as_vector(require(r, "u_ref", "reference"), cfg.problem.m(), "reference.u_ref");
      cfg.references.push_back(std::move(ev));
    }
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig experiment_from_file(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return experiment_from_json(read_file(path), base);
}

std::string stats_to_json(const IterationStats& stats) {
  json j;
  j["iters"] = {{"max", stats.iters.max},
                {"min", stats.iters.min},
                {"median", stats.iters.median},
                {"mean", stats.iters.mean}};
  j["time_s"] = {{"max", stats.time_s.max},
                 {"min", stats.time_s.min},
                 {"median", stats.time_s.median},
                 {"mean", stats.time_s.mean}};
  return j.dump(2) + "\n";
}

} // namespace mpct
