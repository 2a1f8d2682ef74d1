#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace tailopt {

enum class SolveStatus { kOptimal, kFeasibleStalled, kIterationLimit, kInfeasible };

const char* to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& s);

/// Smooth nonlinear program
///   min f(z)  s.t.  c_eq(z) = 0,  c_ineq(z) <= 0,  lb <= z <= ub.
/// eval/eval_derivs return false when any output is non-finite (the solver
/// rejects such trial points instead of propagating NaNs).
class Nlp {
 public:
  virtual ~Nlp() = default;

  virtual int num_vars() const = 0;
  virtual int num_eq() const = 0;
  virtual int num_ineq() const = 0;
  virtual const Eigen::VectorXd& lower_bounds() const = 0;
  virtual const Eigen::VectorXd& upper_bounds() const = 0;

  virtual bool eval(const Eigen::VectorXd& z, double& f, Eigen::VectorXd& c_eq,
                    Eigen::VectorXd& c_ineq) const = 0;

  virtual bool eval_derivs(const Eigen::VectorXd& z, double& f, Eigen::VectorXd& grad_f,
                           Eigen::VectorXd& c_eq, Eigen::VectorXd& c_ineq,
                           Eigen::SparseMatrix<double>& jac_eq,
                           Eigen::SparseMatrix<double>& jac_ineq) const = 0;

  /// Hessian of the objective alone (constraint curvature is handled by the
  /// solver's Gauss-Newton model).
  virtual void objective_hessian(const Eigen::VectorXd& z,
                                 Eigen::SparseMatrix<double>& hess) const = 0;
};

}  // namespace tailopt
