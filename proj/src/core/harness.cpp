#include "core/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>

namespace mpct {

void ExperimentConfig::validate() const {
  problem.validate();
  pen.validate();
  plant.validate();
  solver.validate();
  if (!(duration > 0.0)) fail(ErrorCode::invalid_argument, "experiment: duration must be positive");
  const double periods = duration / problem.model.Ts;
  if (std::abs(periods - std::round(periods)) > 1e-9 * std::max(1.0, periods))
    fail(ErrorCode::invalid_argument, "experiment: duration must be a multiple of Ts");
  auto by_time = [](const auto& a, const auto& b) { return a.t <= b.t; };
  if (!std::is_sorted(disturbances.begin(), disturbances.end(), by_time))
    fail(ErrorCode::invalid_argument, "experiment: disturbance schedule must be time-sorted");
  if (!std::is_sorted(references.begin(), references.end(), by_time))
    fail(ErrorCode::invalid_argument, "experiment: reference schedule must be time-sorted");
  for (const auto& ev : references) {
    if (ev.x_ref.size() != problem.n() || ev.u_ref.size() != problem.m())
      fail(ErrorCode::invalid_argument, "experiment: reference dimensions mismatch the problem");
  }
  if (problem.n() != 3 || problem.m() != 1)
    fail(ErrorCode::invalid_argument, "experiment: harness drives the 3-state pendulum plant");
}

TrajectoryLog run_closed_loop(const ExperimentConfig& cfg) {
  cfg.validate();

  const auto off = build_offline(cfg.problem, cfg.pen);
  SolverState solver_state = make_cold_state(*off);

  const double Ts = cfg.problem.model.Ts;
  const long periods = std::lround(cfg.duration / Ts);
  const double sub_dt = Ts / cfg.plant.substeps;

  PlantState plant = PlantState::from_vec(cfg.x0);
  Eigen::VectorXd x_ref = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd u_ref = Eigen::VectorXd::Zero(1);

  std::size_t next_ref = 0;
  std::size_t next_push = 0;

  TrajectoryLog log;
  log.steps.reserve(periods);

  for (long k = 0; k < periods; ++k) {
    const double t = k * Ts;

    while (next_ref < cfg.references.size() && cfg.references[next_ref].t <= t + 1e-12) {
      x_ref = cfg.references[next_ref].x_ref;
      u_ref = cfg.references[next_ref].u_ref;
      ++next_ref;
    }
    while (next_push < cfg.disturbances.size() && cfg.disturbances[next_push].t <= t + 1e-12) {
      plant = apply_impulse(plant, cfg.disturbances[next_push].dv);
      ++next_push;
    }

    StepRecord rec;
    rec.t = t;
    rec.state = plant;
    rec.x_ref = x_ref;
    rec.u_ref = u_ref[0];

    Solution sol;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      sol = solve(*off, plant.vec(), x_ref, u_ref, solver_state, cfg.solver);
      const auto t1 = std::chrono::steady_clock::now();
      rec.solve_time_s = std::chrono::duration<double>(t1 - t0).count();
    } catch (const Error& e) {
      log.aborted = true;
      log.error = e.what();
      log.steps.push_back(rec);
      return log;
    }

    rec.u = sol.u0[0];
    rec.iters = sol.iters;
    rec.residual_inf = sol.residual_inf;
    rec.status = sol.status;
    log.steps.push_back(rec);

    try {
      if (cfg.plant.linear) {
        const Eigen::Vector3d next = cfg.problem.model.A * plant.vec() + cfg.problem.model.B * sol.u0;
        plant = PlantState::from_vec(next);
      } else {
        for (int s = 0; s < cfg.plant.substeps; ++s)
          plant = rk4_step(plant, sol.u0[0], sub_dt, cfg.plant.params);
      }
    } catch (const Error& e) {
      log.aborted = true;
      log.error = e.what();
      return log;
    }
    if (!plant.vec().allFinite()) {
      log.aborted = true;
      log.error = "plant state became non-finite";
      return log;
    }
  }

  return log;
}

namespace {

StatsSummary summarize(std::vector<double> values) {
  StatsSummary s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.median = values[(values.size() - 1) / 2];
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

} // namespace

IterationStats compute_stats(const TrajectoryLog& log) {
  if (log.steps.empty()) fail(ErrorCode::invalid_argument, "compute_stats: empty log");
  std::vector<double> iters, times;
  iters.reserve(log.steps.size());
  times.reserve(log.steps.size());
  for (const auto& rec : log.steps) {
    iters.push_back(static_cast<double>(rec.iters));
    times.push_back(rec.solve_time_s);
  }
  return {summarize(std::move(iters)), summarize(std::move(times))};
}

std::string trajectory_to_csv(const TrajectoryLog& log) {
  std::string out =
      "t,phi,phi_dot,theta_dot,u,iters,residual_inf,status,solve_time_s,"
      "xref_phi,xref_phi_dot,xref_theta_dot,u_ref\n";
  for (const auto& rec : log.steps) {
    append_number(out, rec.t);
    out.push_back(',');
    append_number(out, rec.state.phi);
    out.push_back(',');
    append_number(out, rec.state.phi_dot);
    out.push_back(',');
    append_number(out, rec.state.theta_dot);
    out.push_back(',');
    append_number(out, rec.u);
    out.push_back(',');
    out.append(std::to_string(rec.iters));
    out.push_back(',');
    append_number(out, rec.residual_inf);
    out.push_back(',');
    out.append(rec.status == SolveStatus::converged ? "converged" : "max_iters_reached");
    out.push_back(',');
    append_number(out, rec.solve_time_s);
    for (int j = 0; j < 3; ++j) {
      out.push_back(',');
      append_number(out, rec.x_ref.size() == 3 ? rec.x_ref[j] : 0.0);
    }
    out.push_back(',');
    append_number(out, rec.u_ref);
    out.push_back('\n');
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open for writing: " + path);
  f << content;
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

} // namespace mpct
