#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/pendulum.hpp"
#include "core/problem.hpp"
#include "core/solver.hpp"

namespace mpct {

/// Simulation truth model: the nonlinear pendulum integrated with RK4
/// substeps, or the prediction model itself ("linear") for mismatch-free
/// runs.
struct PlantSpec {
  PendulumParams params;
  bool linear = false;
  int substeps = 20; // RK4 substeps per control period

  void validate() const {
    params.validate();
    if (substeps < 1) fail(ErrorCode::invalid_argument, "plant: substeps must be >= 1");
  }
};

struct DisturbanceEvent {
  double t = 0.0;
  double dv = 0.0; // phi_dot impulse [rad/s]
};

struct ReferenceEvent {
  double t = 0.0;
  Eigen::VectorXd x_ref;
  Eigen::VectorXd u_ref;
};

struct ExperimentConfig {
  MpctProblem problem;
  PenaltySpec pen;
  PlantSpec plant;
  double duration = 0.0;
  Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
  std::vector<DisturbanceEvent> disturbances;
  std::vector<ReferenceEvent> references;
  SolveOptions solver;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One record per control period: what the controller saw and produced.
struct StepRecord {
  double t = 0.0;
  PlantState state;
  double u = 0.0;
  Eigen::VectorXd x_ref;
  double u_ref = 0.0;
  int iters = 0;
  double residual_inf = 0.0;
  SolveStatus status = SolveStatus::converged;
  double solve_time_s = 0.0;
};

struct TrajectoryLog {
  std::vector<StepRecord> steps;
  bool aborted = false;
  std::string error;
};

struct StatsSummary {
  double max = 0.0, min = 0.0, median = 0.0, mean = 0.0;
};

struct IterationStats {
  StatsSummary iters;
  StatsSummary time_s;
};

/// Runs the receding-horizon loop: exact-state feedback, one solve per
/// period, plant propagation under the applied input, scheduled impulses.
/// Solver divergence or a plant singularity stops the run and returns the
/// partial log with `aborted` set.
TrajectoryLog run_closed_loop(const ExperimentConfig& cfg);

/// Max / min / median / mean of iteration counts and solve times. The median
/// of an even count is the lower-middle value.
IterationStats compute_stats(const TrajectoryLog& log);

/// CSV columns: t,phi,phi_dot,theta_dot,u,iters,residual_inf,status,
/// solve_time_s,xref_phi,xref_phi_dot,xref_theta_dot,u_ref.
/// Numbers are written in shortest round-trip form so identical runs produce
/// identical bytes.
std::string trajectory_to_csv(const TrajectoryLog& log);
void write_text_file(const std::string& path, const std::string& content);

} // namespace mpct
