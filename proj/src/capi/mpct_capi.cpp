#include "mpct/mpct.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "core/harness.hpp"
#include "core/json_io.hpp"
#include "core/lti.hpp"
#include "core/problem.hpp"
#include "core/solver.hpp"

struct mpct_problem {
  mpct::MpctProblem prob;
  mpct::PenaltySpec pen;
  std::shared_ptr<const mpct::OfflineData> off;
};

struct mpct_solver {
  std::shared_ptr<const mpct::OfflineData> off;
  mpct::SolverState state;
};

namespace {

int translate(const mpct::Error& e) {
  using mpct::ErrorCode;
  switch (e.code()) {
    case ErrorCode::invalid_argument: return MPCT_ERR_INVALID_ARG;
    case ErrorCode::parse: return MPCT_ERR_PARSE;
    case ErrorCode::singular: return MPCT_ERR_SINGULAR;
    case ErrorCode::numeric: return MPCT_ERR_NUMERIC;
    case ErrorCode::assumption_violation: return MPCT_ERR_ASSUMPTION;
    case ErrorCode::conditioning: return MPCT_ERR_CONDITIONING;
    case ErrorCode::divergence: return MPCT_ERR_DIVERGENCE;
    case ErrorCode::io: return MPCT_ERR_IO;
  }
  return MPCT_ERR_UNKNOWN;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const mpct::Error& e) {
    return translate(e);
  } catch (const std::bad_alloc&) {
    return MPCT_ERR_UNKNOWN;
  } catch (const std::exception&) {
    return MPCT_ERR_UNKNOWN;
  }
}

int fill_buffer(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) return cap == 0 ? MPCT_OK : MPCT_ERR_INVALID_ARG;
  if (cap < s.size() + 1) return MPCT_ERR_BUFFER_TOO_SMALL;
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  return MPCT_OK;
}

int make_problem(std::pair<mpct::MpctProblem, mpct::PenaltySpec> parsed, mpct_problem** out) {
  auto handle = std::make_unique<mpct_problem>();
  handle->prob = std::move(parsed.first);
  handle->pen = parsed.second;
  handle->off = mpct::build_offline(handle->prob, handle->pen);
  *out = handle.release();
  return MPCT_OK;
}

std::string report_to_json(const mpct::ValidationReport& r) {
  nlohmann::json j;
  j["ok"] = r.ok();
  j["dims"] = {{"n", r.n}, {"m", r.m}, {"N", r.N}, {"equality_rows", r.rows}};
  j["rank_C1"] = r.rank_c1;
  j["rank_C1_expected"] = r.rank_c1_expected;
  j["rank_C2"] = r.rank_c2;
  j["rank_C2_expected"] = r.rank_c2_expected;
  j["rank_E"] = r.rank_e;
  j["rank_E_expected"] = r.rank_e_expected;
  j["C1tPC1_diagonal"] = r.c1_product_diagonal;
  j["C2tPC2_diagonal"] = r.c2_product_diagonal;
  j["C3tPC3_diagonal"] = r.c3_product_diagonal;
  j["W_block_tridiagonal"] = r.w_block_tridiagonal;
  j["W_positive_definite"] = r.w_positive_definite;
  j["offline_build_ok"] = r.offline_ok;
  if (!r.offline_ok) j["offline_build_error"] = r.offline_error;
  return j.dump(2) + "\n";
}

} // namespace

extern "C" {

const char* mpct_version(void) { return "0.1.0"; }

const char* mpct_strerror(int code) {
  switch (code) {
    case MPCT_OK: return "ok";
    case MPCT_ERR_INVALID_ARG: return "invalid argument";
    case MPCT_ERR_PARSE: return "parse error";
    case MPCT_ERR_SINGULAR: return "singular system";
    case MPCT_ERR_NUMERIC: return "non-finite result";
    case MPCT_ERR_ASSUMPTION: return "splitting rank assumption violated";
    case MPCT_ERR_CONDITIONING: return "factorization failed";
    case MPCT_ERR_DIVERGENCE: return "solver diverged";
    case MPCT_ERR_IO: return "i/o error";
    case MPCT_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    default: return "unknown error";
  }
}

void mpct_solve_options_default(mpct_solve_options* opts) {
  if (!opts) return;
  const mpct::SolveOptions d;
  opts->tol = d.tol;
  opts->max_iters = d.max_iters;
  opts->warm_start = d.warm_start ? 1 : 0;
}

void mpct_pendulum_params_default(mpct_pendulum_params* params) {
  if (!params) return;
  const mpct::PendulumParams d;
  params->m_r = d.m_r;
  params->M = d.M;
  params->R = d.R;
  params->L = d.L;
  params->g = d.g;
  params->phi0 = d.phi0;
}

int mpct_problem_from_json(const char* json_text, mpct_problem** out) {
  if (!json_text || !out) return MPCT_ERR_INVALID_ARG;
  *out = nullptr;
  return guarded([&]() -> int { return make_problem(mpct::problem_from_json(json_text), out); });
}

int mpct_problem_from_file(const char* path, mpct_problem** out) {
  if (!path || !out) return MPCT_ERR_INVALID_ARG;
  *out = nullptr;
  return guarded([&]() -> int { return make_problem(mpct::problem_from_file(path), out); });
}

void mpct_problem_free(mpct_problem* prob) { delete prob; }

int mpct_problem_dims(const mpct_problem* prob, int* n, int* m, int* horizon) {
  if (!prob) return MPCT_ERR_INVALID_ARG;
  if (n) *n = prob->prob.n();
  if (m) *m = prob->prob.m();
  if (horizon) *horizon = prob->prob.N;
  return MPCT_OK;
}

int mpct_validate_file(const char* path, char* report_json, size_t cap, size_t* needed) {
  if (!path) return MPCT_ERR_INVALID_ARG;
  return guarded([&]() -> int {
    auto [prob, pen] = mpct::problem_from_file(path);
    const mpct::ValidationReport rep = mpct::validate_problem(prob, pen);
    const int rc = fill_buffer(report_to_json(rep), report_json, cap, needed);
    if (rc != MPCT_OK) return rc;
    return rep.ok() ? MPCT_OK : MPCT_ERR_ASSUMPTION;
  });
}

int mpct_solver_create(const mpct_problem* prob, mpct_solver** out) {
  if (!prob || !out) return MPCT_ERR_INVALID_ARG;
  *out = nullptr;
  return guarded([&]() -> int {
    auto handle = std::make_unique<mpct_solver>();
    handle->off = prob->off;
    handle->state = mpct::make_cold_state(*handle->off);
    *out = handle.release();
    return MPCT_OK;
  });
}

void mpct_solver_free(mpct_solver* solver) { delete solver; }

int mpct_solver_reset(mpct_solver* solver) {
  if (!solver) return MPCT_ERR_INVALID_ARG;
  return guarded([&]() -> int {
    solver->state = mpct::make_cold_state(*solver->off);
    return MPCT_OK;
  });
}

int mpct_solver_solve(mpct_solver* solver, const double* x, const double* x_ref,
                      const double* u_ref, const mpct_solve_options* opts, double* u0,
                      mpct_solve_info* info) {
  if (!solver || !x || !x_ref || !u_ref || !u0) return MPCT_ERR_INVALID_ARG;
  return guarded([&]() -> int {
    const int n = solver->off->n;
    const int m = solver->off->m;

    mpct::SolveOptions options;
    if (opts) {
      options.tol = opts->tol;
      options.max_iters = opts->max_iters;
      options.warm_start = opts->warm_start != 0;
    }

    const Eigen::Map<const Eigen::VectorXd> xv(x, n), xr(x_ref, n), ur(u_ref, m);
    const mpct::Solution sol =
        mpct::solve(*solver->off, xv, xr, ur, solver->state, options);

    Eigen::Map<Eigen::VectorXd>(u0, m) = sol.u0;
    if (info) {
      info->iters = sol.iters;
      info->status = sol.status == mpct::SolveStatus::converged ? MPCT_STATUS_CONVERGED
                                                                : MPCT_STATUS_MAX_ITERS;
      info->residual_inf = sol.residual_inf;
    }
    return MPCT_OK;
  });
}

int mpct_solver_artificial_reference(const mpct_solver* solver, double* x_s, double* u_s) {
  if (!solver || !x_s || !u_s) return MPCT_ERR_INVALID_ARG;
  const int n = solver->off->n;
  const int m = solver->off->m;
  Eigen::Map<Eigen::VectorXd>(x_s, n) = solver->state.z2.head(n);
  Eigen::Map<Eigen::VectorXd>(u_s, m) = solver->state.z2.tail(m);
  return MPCT_OK;
}

int mpct_pendulum_linearize(const mpct_pendulum_params* params, const double x_op[3], double u_op,
                            double Ac[9], double Bc[3]) {
  if (!params || !x_op || !Ac || !Bc) return MPCT_ERR_INVALID_ARG;
  return guarded([&]() -> int {
    mpct::PendulumParams p;
    p.m_r = params->m_r;
    p.M = params->M;
    p.R = params->R;
    p.L = params->L;
    p.g = params->g;
    p.phi0 = params->phi0;
    const mpct::ContinuousModel cm =
        mpct::linearize_pendulum(p, Eigen::Vector3d(x_op[0], x_op[1], x_op[2]), u_op);
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> ac_map(Ac);
    Eigen::Map<Eigen::Vector3d> bc_map(Bc);
    ac_map = cm.Ac;
    bc_map = cm.Bc;
    return MPCT_OK;
  });
}

int mpct_discretize_zoh(const double* Ac, const double* Bc, int n, int m, double Ts, double* A,
                        double* B) {
  if (!Ac || !Bc || !A || !B || n < 1 || m < 1) return MPCT_ERR_INVALID_ARG;
  return guarded([&]() -> int {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    mpct::ContinuousModel cm;
    cm.Ac = Eigen::Map<const RowMajor>(Ac, n, n);
    cm.Bc = Eigen::Map<const RowMajor>(Bc, n, m);
    const mpct::LtiModel model = mpct::discretize_zoh(cm, Ts);
    Eigen::Map<RowMajor> a_map(A, n, n);
    Eigen::Map<RowMajor> b_map(B, n, m);
    a_map = model.A;
    b_map = model.B;
    return MPCT_OK;
  });
}

int mpct_run_experiment(const char* config_path, const char* out_dir, char* stats_json, size_t cap,
                        size_t* needed) {
  if (!config_path || !out_dir) return MPCT_ERR_INVALID_ARG;
  return guarded([&]() -> int {
    const mpct::ExperimentConfig cfg = mpct::experiment_from_file(config_path);
    const mpct::TrajectoryLog log = mpct::run_closed_loop(cfg);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) mpct::fail(mpct::ErrorCode::io, "cannot create output directory: " + std::string(out_dir));

    const std::filesystem::path dir(out_dir);
    mpct::write_text_file((dir / "trajectory.csv").string(), mpct::trajectory_to_csv(log));

    std::string stats_text = "{}\n";
    if (!log.steps.empty())
      stats_text = mpct::stats_to_json(mpct::compute_stats(log));
    mpct::write_text_file((dir / "stats.json").string(), stats_text);

    if (log.aborted) return MPCT_ERR_DIVERGENCE;
    return fill_buffer(stats_text, stats_json, cap, needed);
  });
}

} /* extern "C" */
