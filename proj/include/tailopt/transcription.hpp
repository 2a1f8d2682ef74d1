#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tailopt/collision.hpp"
#include "tailopt/model.hpp"
#include "tailopt/nlp.hpp"
#include "tailopt/trajgen.hpp"

namespace tailopt {

/// Uniform collocation grid on [t0, tf]. Knot times are computed as exact
/// fractions of the horizon so t_N == tf bit-for-bit.
struct Grid {
  double t0 = 0.0;
  double tf = 0.5;
  int n_intervals = 125;

  double dt() const { return (tf - t0) / n_intervals; }
  double knot_time(int k) const { return t0 + (tf - t0) * k / n_intervals; }
  double mid_time(int k) const {
    return t0 + (tf - t0) * (2 * k + 1) / (2.0 * n_intervals);
  }
  /// Sample s = 0..2N alternates knots and midpoints.
  double sample_time(int s) const {
    return t0 + (tf - t0) * s / (2.0 * n_intervals);
  }

  /// dt = 0.004 s over the 0.5 s horizon.
  static Grid paper() { return Grid{0.0, 0.5, 125}; }
  /// Closest integer interval count to the requested step.
  static Grid from_step(double tf, double dt_target);
};

enum class Mode { kUniform, kVariable };

/// Optimized trajectory: knot states, knot+midpoint controls, and (in
/// variable mode) vertebral lengths.
struct Solution {
  Grid grid;
  int n_q = 0;
  int n_u = 0;
  Eigen::MatrixXd knot_states;  // (N+1) x 2 n_q
  Eigen::MatrixXd controls;     // (2N+1) x n_u, sample s at grid.sample_time(s)
  Eigen::VectorXd lengths;      // n_links in variable mode, empty otherwise
  double objective = 0.0;
  SolveStatus status = SolveStatus::kInfeasible;
  int iterations = 0;
  double constraint_violation = 0.0;
};

/// Dynamics hook for the transcription: fills xdot = f(x, u, L) and, when
/// want_derivs, the partials. Returns false if the evaluation is invalid
/// (e.g. a representation singularity).
struct PointDynamics {
  Eigen::VectorXd f;
  Eigen::MatrixXd df_dx;
  Eigen::MatrixXd df_du;
  Eigen::MatrixXd df_dl;  // n_x x n_lengths, used in variable mode
};
using DynamicsFn =
    std::function<bool(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& lengths, bool want_derivs,
                       PointDynamics& out)>;

/// Hermite-Simpson direct collocation of the tail tracking problem.
///
/// Decision vector, interleaved by time for a banded Jacobian:
///   [x_0, u_0, umid_0, x_1, u_1, umid_1, ..., x_{N-1}, u_{N-1}, umid_{N-1},
///    x_N, u_N, (L)]
/// Equalities: per-interval Hermite-Simpson defects, then the length-sum row
/// in variable mode. Inequalities: control-rate differences, the effort ball
/// at knots and midpoints, collision at knots, then length lower bounds.
/// State/control boxes are variable bounds; x_0 is pinned to the initial
/// state through its bounds.
class TranscribedNlp : public Nlp {
 public:
  /// Physical tracking problem.
  TranscribedNlp(const ModelSpec& model, const FourierTarget& target, const Grid& grid,
                 Mode mode);

  /// Bare transcription over custom dynamics (defect constraints and the x0
  /// pin only; zero objective). Used to validate the scheme on analytically
  /// integrable surrogates.
  TranscribedNlp(int dim_x, int dim_u, const Grid& grid, DynamicsFn dynamics,
                 const Eigen::VectorXd& x0);

  // Nlp interface.
  int num_vars() const override { return n_vars_; }
  int num_eq() const override { return n_eq_; }
  int num_ineq() const override { return n_ineq_; }
  const Eigen::VectorXd& lower_bounds() const override { return lb_; }
  const Eigen::VectorXd& upper_bounds() const override { return ub_; }
  bool eval(const Eigen::VectorXd& z, double& f, Eigen::VectorXd& c_eq,
            Eigen::VectorXd& c_ineq) const override;
  bool eval_derivs(const Eigen::VectorXd& z, double& f, Eigen::VectorXd& grad_f,
                   Eigen::VectorXd& c_eq, Eigen::VectorXd& c_ineq,
                   Eigen::SparseMatrix<double>& jac_eq,
                   Eigen::SparseMatrix<double>& jac_ineq) const override;
  void objective_hessian(const Eigen::VectorXd& z,
                         Eigen::SparseMatrix<double>& hess) const override;

  // Named evaluation entry points.
  double eval_objective(const Eigen::VectorXd& z) const;
  void eval_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c_eq,
                        Eigen::VectorXd& c_ineq) const;
  void eval_jacobians(const Eigen::VectorXd& z, Eigen::VectorXd& grad_f,
                      Eigen::SparseMatrix<double>& jac_eq,
                      Eigen::SparseMatrix<double>& jac_ineq) const;

  /// Names the first non-finite constraint/objective entry at z, or returns
  /// an empty string if everything is finite.
  std::string diagnose_nonfinite(const Eigen::VectorXd& z) const;

  // Layout.
  int dim_x() const { return nx_; }
  int dim_u() const { return nu_; }
  int num_lengths() const { return nl_; }
  int num_knots() const { return grid_.n_intervals + 1; }
  int num_samples() const { return 2 * grid_.n_intervals + 1; }
  int x_index(int k) const;
  int u_index(int sample) const;
  int length_index() const;
  const Grid& grid() const { return grid_; }
  Mode mode() const { return mode_; }
  const ModelSpec* model() const { return model_ ? &*model_ : nullptr; }
  const FourierTarget* target() const { return target_ ? &*target_ : nullptr; }

  Eigen::VectorXd pack(const Eigen::MatrixXd& knot_states, const Eigen::MatrixXd& controls,
                       const Eigen::VectorXd& lengths) const;
  void unpack(const Eigen::VectorXd& z, Eigen::MatrixXd& knot_states,
              Eigen::MatrixXd& controls, Eigen::VectorXd& lengths) const;
  Solution make_solution(const Eigen::VectorXd& z, SolveStatus status, int iterations,
                         double violation) const;

 private:
  void finish_setup(const Eigen::VectorXd& x0);
  bool point_dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& lengths, bool want_derivs,
                      PointDynamics& out) const;
  bool eval_impl(const Eigen::VectorXd& z, bool want_derivs, double& f,
                 Eigen::VectorXd* grad_f, Eigen::VectorXd& c_eq, Eigen::VectorXd& c_ineq,
                 Eigen::SparseMatrix<double>* jac_eq,
                 Eigen::SparseMatrix<double>* jac_ineq) const;
  void objective_terms(const Eigen::VectorXd& z, double* value,
                       Eigen::VectorXd* grad) const;

  std::optional<ModelSpec> model_;
  std::optional<FourierTarget> target_;
  Grid grid_;
  Mode mode_ = Mode::kUniform;
  DynamicsFn dynamics_;
  SphereLayout layout_;
  bool has_objective_ = false;
  bool has_path_constraints_ = false;

  int n_q_ = 0;
  int nx_ = 0;
  int nu_ = 0;
  int nl_ = 0;
  int n_vars_ = 0;
  int n_eq_ = 0;
  int n_ineq_ = 0;
  int rate_row0_ = 0, effort_row0_ = 0, collision_row0_ = 0, length_row0_ = 0;
  Eigen::VectorXd lb_, ub_;
  Eigen::MatrixXd target_knot_;  // 3 x (N+1)
  Eigen::MatrixXd target_mid_;   // 3 x N
  std::vector<Eigen::Triplet<double>> obj_hess_triplets_;
};

/// Spec-level constructor for the two problem flavors.
TranscribedNlp build_nlp(const ModelSpec& model, const FourierTarget& target,
                         const Grid& grid, Mode mode);

/// Simpson quadrature of the squared torso-angle tracking error over the
/// knot/midpoint samples; identical arithmetic to the NLP objective.
double tracking_error_quadrature(const Eigen::MatrixXd& knot_states, const Grid& grid,
                                 const FourierTarget& target, int n_q);

/// Cubic-Hermite state / quadratic control interpolants of a solution.
Eigen::VectorXd interpolate_control(const Solution& sol, double t);
void interpolate_state_control(const Solution& sol, const ModelSpec& model, double t,
                               Eigen::VectorXd& x, Eigen::VectorXd& u);

/// Solution file: '#'-prefixed header block (objective, status, lengths, grid)
/// followed by CSV rows (t, q, qdot, u) at every knot and midpoint. Midpoint
/// rows carry the Hermite-Simpson interpolated state.
void write_solution_csv(const Solution& sol, const ModelSpec& model,
                        const std::string& path);
Solution read_solution_csv(const std::string& path);

}  // namespace tailopt
