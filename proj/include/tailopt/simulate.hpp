#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "tailopt/model.hpp"
#include "tailopt/transcription.hpp"

namespace tailopt {

struct RolloutOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 1e-3;
};

struct RolloutResult {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;  // one row per requested sample, 2 n_q columns
};

using ControlFn = std::function<Eigen::VectorXd(double)>;

/// Adaptive embedded Dormand-Prince RK5(4) forward simulation under the
/// given control. sample_times must be increasing within [0, tf]; the
/// integrator lands on each exactly. Reports step-size underflow with the
/// failing time and state.
RolloutResult rollout(const ModelSpec& model, const ControlFn& control,
                      const Eigen::VectorXd& x0, double tf,
                      const Eigen::VectorXd& sample_times,
                      const RolloutOptions& options = RolloutOptions(),
                      const Eigen::VectorXd& lengths = Eigen::VectorXd());

/// Re-simulates the optimized control from x(t0) and returns the RMS
/// torso-angle deviation from the collocation knot states.
double validate(const Solution& sol, const ModelSpec& model,
                const RolloutOptions& options = RolloutOptions());

/// Pass bar for validate(): 1 degree RMS.
inline constexpr double kValidationRmsThreshold = 0.017453292519943295;

struct TrialMetrics {
  double tracking_error = 0.0;            // rad^2 s, same quadrature as the objective
  double max_tip_speed = 0.0;             // m/s over knot and midpoint samples
  std::vector<double> per_joint_effort;   // N^2 m^2 s, one entry per 2-DOF joint
  double effort_saturation = 0.0;         // fraction of samples with u'u >= 0.95 E
  double validation_rms = 0.0;            // rad
};

TrialMetrics compute_metrics(const Solution& sol, const FourierTarget& target,
                             const ModelSpec& model, bool run_validation = true);

/// |KE(tf) - KE(0) - integral of u . qd_tail| relative to the peak kinetic
/// energy, via a work-augmented rollout.
double energy_balance_residual(const ModelSpec& model, const ControlFn& control,
                               double tf, const RolloutOptions& options = RolloutOptions());

/// Model with the vertebral lengths replaced (masses and inertias follow
/// from the linear density).
ModelSpec with_lengths(const ModelSpec& model, const Eigen::VectorXd& lengths);

}  // namespace tailopt
