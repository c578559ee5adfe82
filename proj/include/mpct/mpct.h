/*
 * mpct - model predictive control for tracking, solved with a three-block
 * ADMM splitting.
 *
 * C interface of the shared library. Handles are opaque; every function
 * returns a status code (MPCT_OK on success). A problem handle is immutable
 * once created and may be shared by any number of solver handles, including
 * across threads. A solver handle carries warm-start state and must be used
 * from one thread at a time.
 */

#ifndef MPCT_H
#define MPCT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MPCT_API __attribute__((visibility("default")))

typedef struct mpct_problem mpct_problem;
typedef struct mpct_solver mpct_solver;

enum {
  MPCT_OK = 0,
  MPCT_ERR_INVALID_ARG = 1,
  MPCT_ERR_PARSE = 2,
  MPCT_ERR_SINGULAR = 3,
  MPCT_ERR_NUMERIC = 4,
  MPCT_ERR_ASSUMPTION = 5,   /* splitting rank conditions violated */
  MPCT_ERR_CONDITIONING = 6, /* an offline factorization failed */
  MPCT_ERR_DIVERGENCE = 7,   /* solver iterates became non-finite */
  MPCT_ERR_IO = 8,
  MPCT_ERR_BUFFER_TOO_SMALL = 9,
  MPCT_ERR_UNKNOWN = 10
};

enum {
  MPCT_STATUS_CONVERGED = 0,
  MPCT_STATUS_MAX_ITERS = 1
};

typedef struct mpct_solve_options {
  double tol;      /* exit tolerance, > 0 */
  int max_iters;   /* iteration safeguard, >= 1 */
  int warm_start;  /* nonzero: reuse the previous solve's iterates */
} mpct_solve_options;

typedef struct mpct_solve_info {
  int iters;
  int status;          /* MPCT_STATUS_* */
  double residual_inf; /* inf-norm of the coupling residual at exit */
} mpct_solve_info;

typedef struct mpct_pendulum_params {
  double m_r;  /* wheel mass [kg] */
  double M;    /* body mass [kg] */
  double R;    /* wheel radius [m] */
  double L;    /* axis-to-CoM distance [m] */
  double g;    /* gravitational acceleration [m/s^2] */
  double phi0; /* CoM offset angle [rad] */
} mpct_pendulum_params;

MPCT_API const char* mpct_version(void);
MPCT_API const char* mpct_strerror(int code);

/* Defaults: tol 1e-3, max_iters 4000, warm_start on. */
MPCT_API void mpct_solve_options_default(mpct_solve_options* opts);
/* The case-study robot parameters with phi0 = 0. */
MPCT_API void mpct_pendulum_params_default(mpct_pendulum_params* params);

/*
 * Problem lifecycle. The JSON schema is documented in the README; creation
 * parses, validates and runs the offline phase (penalty vector, bounds and
 * the constant factorizations).
 */
MPCT_API int mpct_problem_from_json(const char* json_text, mpct_problem** out);
MPCT_API int mpct_problem_from_file(const char* path, mpct_problem** out);
MPCT_API void mpct_problem_free(mpct_problem* prob);
MPCT_API int mpct_problem_dims(const mpct_problem* prob, int* n, int* m, int* horizon);

/*
 * Structural validation report (JSON) for a problem file: splitting rank
 * checks, diagonality of the penalized products, positive definiteness of
 * the dual-system blocks. Works on files that fail those checks, which is
 * the point. Required buffer size is returned through `needed` when the
 * buffer is too small.
 */
MPCT_API int mpct_validate_file(const char* path, char* report_json, size_t cap, size_t* needed);

/* Solver lifecycle. The solver keeps a reference to the problem data. */
MPCT_API int mpct_solver_create(const mpct_problem* prob, mpct_solver** out);
MPCT_API void mpct_solver_free(mpct_solver* solver);
/* Clears warm-start state back to a cold start. */
MPCT_API int mpct_solver_reset(mpct_solver* solver);

/*
 * One receding-horizon solve. x and x_ref have length n, u_ref and u0 length
 * m. u0 receives the first input of the optimized trajectory; it respects
 * the input box for any tolerance. opts may be NULL for defaults; info may
 * be NULL.
 */
MPCT_API int mpct_solver_solve(mpct_solver* solver, const double* x, const double* x_ref,
                               const double* u_ref, const mpct_solve_options* opts, double* u0,
                               mpct_solve_info* info);

/* Artificial reference (x_s, u_s) of the most recent solve. */
MPCT_API int mpct_solver_artificial_reference(const mpct_solver* solver, double* x_s, double* u_s);

/*
 * Pendulum model helpers: Jacobians of the nonlinear dynamics at an
 * operating point (state (phi, phi_dot, theta_dot), input theta_ddot), and
 * zero-order-hold discretization of a continuous model. Matrices are dense
 * row-major.
 */
MPCT_API int mpct_pendulum_linearize(const mpct_pendulum_params* params, const double x_op[3],
                                     double u_op, double Ac[9], double Bc[3]);
MPCT_API int mpct_discretize_zoh(const double* Ac, const double* Bc, int n, int m, double Ts,
                                 double* A, double* B);

/*
 * Closed-loop experiment: reads the config JSON, runs the receding-horizon
 * simulation, writes trajectory.csv and stats.json into out_dir and
 * optionally copies the stats JSON into the caller's buffer. On solver or
 * plant failure the partial trajectory is still written and
 * MPCT_ERR_DIVERGENCE is returned.
 */
MPCT_API int mpct_run_experiment(const char* config_path, const char* out_dir, char* stats_json,
                                 size_t cap, size_t* needed);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MPCT_H */
