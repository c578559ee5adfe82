#include <doctest.h>

#include <random>

#include "core/solver.hpp"
#include "support/dense_iteration.hpp"
#include "support/test_utils.hpp"

using namespace mpct;
using mpct::testing::pendulum_problem;
using mpct::testing::random_problem;

TEST_CASE("origin with zero references converges in one iteration to zero") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  SolverState state = make_cold_state(*off);

  SolveOptions opts;
  opts.tol = 1e-3;
  opts.warm_start = false;
  const Solution sol = solve(*off, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                             Eigen::VectorXd::Zero(1), state, opts);

  CHECK(sol.iters == 1);
  CHECK(sol.status == SolveStatus::converged);
  CHECK(sol.residual_inf == 0.0);
  CHECK(sol.u0.isZero(0.0));
  CHECK(sol.z1.isZero(0.0));
  CHECK(sol.z2.isZero(0.0));
  CHECK(sol.z3.isZero(0.0));
  CHECK(sol.lambda.isZero(0.0));
}

TEST_CASE("iterates satisfy the box and subspace constraints at every iteration") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  const DenseParts d = assemble_dense(prob, PenaltySpec{});

  SolverState state = make_cold_state(*off);
  const Eigen::Vector3d x(0.3, -0.5, 2.0);
  const Eigen::Vector3d x_ref(0.0, 0.0, 5.0);
  const Eigen::VectorXd u_ref = Eigen::VectorXd::Zero(1);

  for (int k = 0; k < 60; ++k) {
    eadmm_step(*off, x, x_ref, u_ref, state);

    CHECK((state.z1.array() >= off->lb1.array()).all());
    CHECK((state.z1.array() <= off->ub1.array()).all());

    const double scale2 = 1.0 + state.z2.lpNorm<Eigen::Infinity>();
    CHECK((d.E * state.z2).lpNorm<Eigen::Infinity>() <= 1e-10 * scale2);

    const double scale3 = 1.0 + state.z3.lpNorm<Eigen::Infinity>();
    CHECK((d.G * state.z3).lpNorm<Eigen::Infinity>() <= 1e-10 * scale3);
  }
}

TEST_CASE("one index-wise iteration equals one dense-assembled iteration") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3, m = 1 + trial % 2, N = 2 + trial % 4;
    const MpctProblem prob = random_problem(rng, n, m, N, trial % 2 == 0);
    const PenaltySpec pen{3.0, 500.0};
    const auto off = build_offline(prob, pen);
    const DenseParts d = assemble_dense(prob, pen);

    Eigen::VectorXd x(n), x_ref(n), u_ref(m);
    for (int i = 0; i < n; ++i) x[i] = 0.4 * normal(rng);
    for (int i = 0; i < n; ++i) x_ref[i] = 0.4 * normal(rng);
    for (int i = 0; i < m; ++i) u_ref[i] = 0.4 * normal(rng);

    // Common nonzero starting point.
    SolverState state = make_cold_state(*off);
    for (Eigen::Index i = 0; i < state.z2.size(); ++i) state.z2[i] = 0.3 * normal(rng);
    for (Eigen::Index i = 0; i < state.z3.size(); ++i) state.z3[i] = 0.3 * normal(rng);
    for (Eigen::Index i = 0; i < state.lambda.size(); ++i) state.lambda[i] = 0.3 * normal(rng);

    Eigen::VectorXd z1d = state.z1, z2d = state.z2, z3d = state.z3, ld = state.lambda;
    const Eigen::VectorXd b = assemble_b(off->layout, x);
    Eigen::VectorXd h2_ref(n + m);
    h2_ref.head(n) = prob.T * x_ref;
    h2_ref.tail(m) = prob.S * u_ref;

    eadmm_step(*off, x, x_ref, u_ref, state);
    testing::dense_iteration(d, h2_ref, b, z1d, z2d, z3d, ld);

    CHECK((state.z1 - z1d).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((state.z2 - z2d).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((state.z3 - z3d).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((state.lambda - ld).lpNorm<Eigen::Infinity>() <= 1e-11);
  }
}

TEST_CASE("exit status is sound: converged means all three norms pass independently") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  SolverState state = make_cold_state(*off);

  SolveOptions opts;
  opts.tol = 1e-3;
  opts.max_iters = 4000;
  opts.warm_start = false;
  const Eigen::Vector3d x(0.2, 0.0, -1.0);
  const Solution sol = solve(*off, x, Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1), state,
                             opts);
  REQUIRE(sol.status == SolveStatus::converged);

  const ResidualNorms norms = residual_norms(state, *off, x);
  CHECK(norms.primal_inf <= opts.tol);
  CHECK(norms.dz2_inf <= opts.tol);
  CHECK(norms.dz3_inf <= opts.tol);
  CHECK(sol.residual_inf == norms.primal_inf);
}

TEST_CASE("residual norms of an untouched state reflect only the initial block") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  const SolverState state = make_cold_state(*off);

  const ResidualNorms at_origin = residual_norms(state, *off, Eigen::Vector3d::Zero());
  CHECK(at_origin.primal_inf == 0.0);
  CHECK(at_origin.dz2_inf == 0.0);
  CHECK(at_origin.dz3_inf == 0.0);

  const ResidualNorms off_origin = residual_norms(state, *off, Eigen::Vector3d(0.1, 0.0, 0.0));
  CHECK(off_origin.primal_inf == 0.1);
  CHECK(off_origin.dz2_inf == 0.0);
}

TEST_CASE("warm re-solve of the same instance exits in one iteration") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  SolverState state = make_cold_state(*off);

  SolveOptions opts;
  opts.tol = 1e-3;
  opts.warm_start = true;
  const Eigen::Vector3d x(0.15, -0.3, 0.5);
  const Solution first = solve(*off, x, Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1), state,
                               opts);
  REQUIRE(first.status == SolveStatus::converged);
  REQUIRE(first.iters > 1);

  const Solution again = solve(*off, x, Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1), state,
                               opts);
  CHECK(again.status == SolveStatus::converged);
  CHECK(again.iters == 1);
}

TEST_CASE("warm starting never loses to cold starting over a reference sequence") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});

  // A receding sequence of nearby states, as the closed loop produces.
  std::vector<Eigen::Vector3d> xs;
  for (int k = 0; k < 20; ++k)
    xs.emplace_back(0.2 * std::exp(-0.15 * k), -0.1 * std::exp(-0.15 * k), 3.0);
  const Eigen::Vector3d x_ref(0.0, 0.0, 3.0);
  const Eigen::VectorXd u_ref = Eigen::VectorXd::Zero(1);

  SolveOptions warm_opts;
  warm_opts.tol = 1e-3;
  warm_opts.warm_start = true;
  SolveOptions cold_opts = warm_opts;
  cold_opts.warm_start = false;

  SolverState warm_state = make_cold_state(*off);
  SolverState cold_state = make_cold_state(*off);
  long warm_total = 0, cold_total = 0;
  for (const auto& x : xs) {
    warm_total += solve(*off, x, x_ref, u_ref, warm_state, warm_opts).iters;
    cold_total += solve(*off, x, x_ref, u_ref, cold_state, cold_opts).iters;
  }
  CHECK(warm_total <= cold_total);
}

TEST_CASE("disabling warm start reproduces a fresh cold solve exactly") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});

  SolveOptions opts;
  opts.tol = 1e-4;
  opts.warm_start = false;

  const Eigen::Vector3d x(0.1, 0.2, -4.0);
  SolverState fresh = make_cold_state(*off);
  const Solution a = solve(*off, x, Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1), fresh,
                           opts);

  SolverState reused = make_cold_state(*off);
  solve(*off, Eigen::Vector3d(0.4, 0.0, 10.0), Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1),
        reused, opts); // dirty the state
  const Solution b = solve(*off, x, Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1), reused,
                           opts);

  CHECK(a.iters == b.iters);
  CHECK(a.u0 == b.u0);
  CHECK(a.z1 == b.z1);
  CHECK(a.z2 == b.z2);
  CHECK(a.z3 == b.z3);
  CHECK(a.lambda == b.lambda);
}

TEST_CASE("identical inputs produce bitwise-identical iterate sequences") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  const Eigen::Vector3d x(0.05, 1.0, -2.0);
  const Eigen::Vector3d x_ref(0.0, 0.0, 1.0);
  const Eigen::VectorXd u_ref = Eigen::VectorXd::Zero(1);

  SolverState s1 = make_cold_state(*off);
  SolverState s2 = make_cold_state(*off);
  for (int k = 0; k < 25; ++k) {
    eadmm_step(*off, x, x_ref, u_ref, s1);
    eadmm_step(*off, x, x_ref, u_ref, s2);
    REQUIRE(s1.z1 == s2.z1);
    REQUIRE(s1.z2 == s2.z2);
    REQUIRE(s1.z3 == s2.z3);
    REQUIRE(s1.lambda == s2.lambda);
  }
}

TEST_CASE("u0 respects the input box even at loose tolerances") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  SolverState state = make_cold_state(*off);

  SolveOptions opts;
  opts.tol = 0.5; // deliberately sloppy
  opts.warm_start = false;
  const Solution sol = solve(*off, Eigen::Vector3d(1.2, 3.0, 30.0), Eigen::Vector3d::Zero(),
                             Eigen::VectorXd::Zero(1), state, opts);
  CHECK(sol.u0[0] >= -80.0);
  CHECK(sol.u0[0] <= 80.0);
}

TEST_CASE("non-finite data is reported as divergence with the iteration index") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  SolverState state = make_cold_state(*off);

  SolveOptions opts;
  opts.warm_start = false;
  try {
    solve(*off, Eigen::Vector3d(1e308, 0.0, 0.0), Eigen::Vector3d::Zero(),
          Eigen::VectorXd::Zero(1), state, opts);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::divergence);
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("dimension mismatches are contract errors") {
  const MpctProblem prob = pendulum_problem();
  const auto off = build_offline(prob, PenaltySpec{});
  SolverState state = make_cold_state(*off);
  SolveOptions opts;

  CHECK_THROWS_AS(solve(*off, Eigen::Vector2d::Zero(), Eigen::Vector3d::Zero(),
                        Eigen::VectorXd::Zero(1), state, opts),
                  Error);
  CHECK_THROWS_AS(solve(*off, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                        Eigen::VectorXd::Zero(2), state, opts),
                  Error);

  SolveOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(solve(*off, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                        Eigen::VectorXd::Zero(1), state, bad),
                  Error);
}
