#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tailopt/nlp.hpp"
#include "tailopt/transcription.hpp"

namespace tailopt {

struct SolverConfig {
  double feas_tol = 1e-6;
  double opt_tol = 1e-6;
  int max_iterations = 3000;  // total accepted Newton steps
  int max_inner = 100;        // per augmented-Lagrangian subproblem
  int max_outer = 60;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_linesearch = 40;
  double reg_floor = 1e-10;
  double rho0 = 10.0;
  double rho_growth = 10.0;
  double rho_max = 1e10;
  bool verbose = false;
  std::string log_path;  // per-iteration CSV when non-empty

  void validate() const;
};

struct SolveResult {
  Eigen::VectorXd z;  // best feasible iterate when one exists, else the last
  double objective = 0.0;
  SolveStatus status = SolveStatus::kInfeasible;
  int iterations = 0;
  double constraint_violation = 0.0;
  double kkt_residual = 0.0;
  bool feasible = false;
};

/// Augmented-Lagrangian solve with box-projected damped Gauss-Newton inner
/// iterations. Deterministic; merit decreases monotonically across accepted
/// steps of each subproblem. Throws Error on non-finite user functions at
/// the initial point.
SolveResult solve(const Nlp& nlp, const Eigen::VectorXd& init,
                  const SolverConfig& config = SolverConfig());

/// The five standard starts: zeros, straight line in state space, and three
/// seeded random points within the variable bounds.
struct InitStrategy {
  enum class Kind { kZeros, kStraightLine, kRandom };
  Kind kind = Kind::kZeros;
  std::uint64_t seed = 0;

  std::string name() const;
};

std::vector<InitStrategy> standard_strategies(std::uint64_t seed);
Eigen::VectorXd make_initial_point(const TranscribedNlp& nlp, const InitStrategy& strategy);
std::vector<Eigen::VectorXd> init_strategies(const TranscribedNlp& nlp, std::uint64_t seed);

struct StartOutcome {
  std::string strategy;
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  double violation = 0.0;
  bool feasible = false;
  int iterations = 0;
  std::string error;  // non-empty when the start aborted
};

struct MultistartSolution {
  Solution solution;
  std::vector<StartOutcome> outcomes;
  int best_index = -1;
};

/// Runs the five standard starts (plus an optional extra warm start, e.g.
/// the uniform-length solution in variable mode) and returns the feasible
/// solution with the minimum objective. Throws Error with per-start
/// diagnostics when every start fails.
MultistartSolution multistart_solve(const TranscribedNlp& nlp, std::uint64_t seed,
                                    const SolverConfig& config = SolverConfig(),
                                    const Eigen::VectorXd* warm_start = nullptr);

}  // namespace tailopt
