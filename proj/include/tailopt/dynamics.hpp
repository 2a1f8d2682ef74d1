#pragma once

#include <Eigen/Core>

#include "tailopt/model.hpp"

namespace tailopt {

/// Mass matrix M and bias vector h of M qdd + h = tau (no gravity).
struct DynTerms {
  Eigen::MatrixXd M;
  Eigen::VectorXd h;
};

/// Partial derivatives of qdd = f(q, qd, u).
struct DynPartials {
  Eigen::MatrixXd dq;   // n_q x n_q
  Eigen::MatrixXd dqd;  // n_q x n_q
  Eigen::MatrixXd du;   // n_q x (n_q - 3)
};

struct TipState {
  Eigen::Vector3d position;
  Eigen::Vector3d velocity;
};

Eigen::MatrixXd mass_matrix(const ModelSpec& model, const Eigen::VectorXd& q);

Eigen::VectorXd bias_forces(const ModelSpec& model, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qdot);

DynTerms dynamics_terms(const ModelSpec& model, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& qdot);

/// qdd = M^{-1}(-h + [0_3; u]); torso rows receive zero torque. Throws
/// SingularConfigError at representation singularities.
Eigen::VectorXd forward_dynamics(const ModelSpec& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qdot, const Eigen::VectorXd& u);

/// Independent propagation-based evaluation (articulated-body algorithm).
Eigen::VectorXd forward_dynamics_aba(const ModelSpec& model, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& qdot,
                                     const Eigen::VectorXd& u);

/// tau = M qdd + h, full n_q vector including the torso rows.
Eigen::VectorXd inverse_dynamics(const ModelSpec& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& qddot);

TipState tip_state(const ModelSpec& model, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& qdot);

Eigen::Vector3d angular_momentum_about_pivot(const ModelSpec& model,
                                             const Eigen::VectorXd& q,
                                             const Eigen::VectorXd& qdot);

double kinetic_energy(const ModelSpec& model, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qdot);

/// Analytic partials of the forward dynamics (dual-number differentiation of
/// the inverse-dynamics recursion; exact to rounding).
DynPartials dynamics_partials(const ModelSpec& model, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& qdot, const Eigen::VectorXd& u);

/// Partial of qdd with respect to the vertebral lengths L, rebuilding mass,
/// inertia and geometry per length. `model` supplies everything except the
/// lengths.
Eigen::MatrixXd dynamics_partials_lengths(const ModelSpec& model,
                                          const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& qdot,
                                          const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& lengths);

/// Forward dynamics at explicit lengths (variable-length optimization path).
Eigen::VectorXd forward_dynamics_lengths(const ModelSpec& model, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& qdot,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& lengths);

/// Forward dynamics + partials in one pass (shared factorization); used by
/// the transcription hot loop. lengths may be empty for the fixed model.
void forward_dynamics_full(const ModelSpec& model, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& qdot, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& lengths, Eigen::VectorXd& qdd,
                           DynPartials& partials, Eigen::MatrixXd* dlengths);

}  // namespace tailopt
