// Command-line front end for the mpct shared library. Talks to the solver
// exclusively through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpct/mpct.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

int exit_code_for(int status) {
  switch (status) {
    case MPCT_OK: return kExitOk;
    case MPCT_ERR_INVALID_ARG:
    case MPCT_ERR_PARSE:
    case MPCT_ERR_IO: return kExitConfig;
    default: return kExitSolver;
  }
}

int report(const std::string& what, int status) {
  std::cerr << what << ": " << mpct_strerror(status) << "\n";
  return exit_code_for(status);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string buf = text;
  for (char& c : buf)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream ss(buf);
  double v;
  while (ss >> v) out.push_back(v);
  return out;
}

json matrix_json(const double* data, int rows, int cols) {
  json rows_json = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back(data[r * cols + c]);
    rows_json.push_back(row);
  }
  return rows_json;
}

int run_lin(const std::string& params_path, double ts_override) {
  std::ifstream f(params_path);
  if (!f) {
    std::cerr << "cannot open params file: " << params_path << "\n";
    return kExitConfig;
  }
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) {
    std::cerr << "malformed JSON in " << params_path << "\n";
    return kExitConfig;
  }

  mpct_pendulum_params params;
  mpct_pendulum_params_default(&params);
  if (j.contains("m_r")) params.m_r = j["m_r"].get<double>();
  if (j.contains("M")) params.M = j["M"].get<double>();
  if (j.contains("R")) params.R = j["R"].get<double>();
  if (j.contains("L")) params.L = j["L"].get<double>();
  if (j.contains("g")) params.g = j["g"].get<double>();
  if (j.contains("phi0")) params.phi0 = j["phi0"].get<double>();

  double Ts = j.value("Ts", 0.02);
  if (ts_override > 0.0) Ts = ts_override;

  double x_op[3] = {0.0, 0.0, 0.0};
  double u_op = 0.0;
  if (j.contains("operating_point")) {
    const json& op = j["operating_point"];
    if (op.contains("x")) {
      const auto x = op["x"].get<std::vector<double>>();
      if (x.size() != 3) {
        std::cerr << "operating_point.x must have 3 entries\n";
        return kExitConfig;
      }
      std::copy(x.begin(), x.end(), x_op);
    }
    if (op.contains("u")) u_op = op["u"].get<double>();
  }

  double Ac[9], Bc[3];
  int rc = mpct_pendulum_linearize(&params, x_op, u_op, Ac, Bc);
  if (rc != MPCT_OK) return report("linearize", rc);

  double A[9], B[3];
  rc = mpct_discretize_zoh(Ac, Bc, 3, 1, Ts, A, B);
  if (rc != MPCT_OK) return report("discretize", rc);

  json out;
  out["Ts"] = Ts;
  out["Ac"] = matrix_json(Ac, 3, 3);
  out["Bc"] = matrix_json(Bc, 3, 1);
  out["A"] = matrix_json(A, 3, 3);
  out["B"] = matrix_json(B, 3, 1);
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int run_solve(const std::string& problem_path, const std::string& state_text,
              const std::string& xref_text, const std::string& uref_text, double tol,
              int max_iters) {
  mpct_problem* prob = nullptr;
  int rc = mpct_problem_from_file(problem_path.c_str(), &prob);
  if (rc != MPCT_OK) return report("load problem", rc);

  int n = 0, m = 0, N = 0;
  mpct_problem_dims(prob, &n, &m, &N);

  const std::vector<double> x = parse_list(state_text);
  std::vector<double> xref = parse_list(xref_text);
  std::vector<double> uref = parse_list(uref_text);
  if (xref.empty()) xref.assign(n, 0.0);
  if (uref.empty()) uref.assign(m, 0.0);
  if (static_cast<int>(x.size()) != n || static_cast<int>(xref.size()) != n ||
      static_cast<int>(uref.size()) != m) {
    std::cerr << "expected " << n << " state entries, " << n << " xref entries and " << m
              << " uref entries\n";
    mpct_problem_free(prob);
    return kExitConfig;
  }

  mpct_solver* solver = nullptr;
  rc = mpct_solver_create(prob, &solver);
  if (rc != MPCT_OK) {
    mpct_problem_free(prob);
    return report("create solver", rc);
  }

  mpct_solve_options opts;
  mpct_solve_options_default(&opts);
  opts.tol = tol;
  opts.max_iters = max_iters;
  opts.warm_start = 0;

  std::vector<double> u0(m, 0.0);
  mpct_solve_info info;
  rc = mpct_solver_solve(solver, x.data(), xref.data(), uref.data(), &opts, u0.data(), &info);

  int code = kExitOk;
  if (rc != MPCT_OK) {
    code = report("solve", rc);
  } else {
    std::vector<double> xs(n, 0.0), us(m, 0.0);
    mpct_solver_artificial_reference(solver, xs.data(), us.data());
    json out;
    out["u0"] = u0;
    out["iters"] = info.iters;
    out["status"] = info.status == MPCT_STATUS_CONVERGED ? "converged" : "max_iters_reached";
    out["residual_inf"] = info.residual_inf;
    out["x_s"] = xs;
    out["u_s"] = us;
    std::cout << out.dump(2) << "\n";
  }

  mpct_solver_free(solver);
  mpct_problem_free(prob);
  return code;
}

int run_sim(const std::string& config_path, const std::string& out_dir) {
  std::vector<char> buf(1 << 16);
  size_t needed = 0;
  int rc = mpct_run_experiment(config_path.c_str(), out_dir.c_str(), buf.data(), buf.size(),
                               &needed);
  if (rc == MPCT_ERR_BUFFER_TOO_SMALL) {
    buf.resize(needed);
    rc = mpct_run_experiment(config_path.c_str(), out_dir.c_str(), buf.data(), buf.size(),
                             &needed);
  }
  if (rc != MPCT_OK) return report("sim", rc);
  std::cout << buf.data();
  return kExitOk;
}

int run_validate(const std::string& problem_path) {
  std::vector<char> buf(1 << 16);
  size_t needed = 0;
  int rc = mpct_validate_file(problem_path.c_str(), buf.data(), buf.size(), &needed);
  if (rc == MPCT_ERR_BUFFER_TOO_SMALL) {
    buf.resize(needed);
    rc = mpct_validate_file(problem_path.c_str(), buf.data(), buf.size(), &needed);
  }
  if (rc == MPCT_OK || rc == MPCT_ERR_ASSUMPTION) {
    std::cout << buf.data();
    return rc == MPCT_OK ? kExitOk : kExitSolver;
  }
  return report("validate", rc);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPC-for-tracking solver and closed-loop simulation harness"};
  app.require_subcommand(1);

  std::string params_path, problem_path, config_path, out_dir;
  std::string state_text, xref_text, uref_text;
  double tol = 1e-3, ts_override = 0.0;
  int max_iters = 4000;

  auto* lin = app.add_subcommand("lin", "Linearize the pendulum and emit the discrete model");
  lin->add_option("--params", params_path, "pendulum parameters JSON")->required();
  lin->add_option("--Ts", ts_override, "sample time override [s]");

  auto* solve = app.add_subcommand("solve", "Run a single solve and print the result as JSON");
  solve->add_option("--problem", problem_path, "problem JSON file")->required();
  solve->add_option("--state", state_text, "current state, comma separated")->required();
  solve->add_option("--xref", xref_text, "state reference, comma separated");
  solve->add_option("--uref", uref_text, "input reference, comma separated");
  solve->add_option("--tol", tol, "exit tolerance");
  solve->add_option("--max-iters", max_iters, "iteration cap");

  auto* sim = app.add_subcommand("sim", "Run a closed-loop experiment");
  sim->add_option("--config", config_path, "experiment config JSON")->required();
  sim->add_option("--out", out_dir, "output directory")->required();

  auto* validate = app.add_subcommand("validate", "Structural checks on a problem file");
  validate->add_option("--problem", problem_path, "problem JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }

  if (lin->parsed()) return run_lin(params_path, ts_override);
  if (solve->parsed()) return run_solve(problem_path, state_text, xref_text, uref_text, tol,
                                        max_iters);
  if (sim->parsed()) return run_sim(config_path, out_dir);
  return run_validate(problem_path);
}
