#include "tailopt/simulate.hpp"

#include <cmath>
#include <sstream>

#include "tailopt/dynamics.hpp"

namespace tailopt {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using OdeFn = std::function<VectorXd(double, const VectorXd&)>;

/// Dormand-Prince 5(4) pair with step-size control; integrates to each
/// requested output time exactly.
MatrixXd integrate_dopri(const OdeFn& f, const VectorXd& y0, const VectorXd& times,
                         const RolloutOptions& opt) {
  static const double A[7][6] = {
      {0, 0, 0, 0, 0, 0},
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double E[7] = {71.0 / 57600,     0.0,        -71.0 / 16695, 71.0 / 1920,
                              -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

  const long n = y0.size();
  MatrixXd out(times.size(), n);
  VectorXd y = y0;
  double t = times(0);
  out.row(0) = y.transpose();

  const double t_end = times(times.size() - 1);
  double h = std::min(opt.initial_step, (t_end - t) / 10.0 + 1e-300);
  VectorXd k[7];
  k[0] = f(t, y);

  for (int next = 1; next < times.size(); ++next) {
    const double t_next = times(next);
    while (t < t_next - 1e-14) {
      bool clipped = false;
      double hs = h;
      if (t + hs >= t_next) {
        hs = t_next - t;
        clipped = true;
      }

      for (int i = 1; i < 7; ++i) {
        VectorXd yi = y;
        for (int j = 0; j < i; ++j)
          if (A[i][j] != 0.0) yi += hs * A[i][j] * k[j];
        k[i] = f(t + hs * (i == 1 ? 0.2 : i == 2 ? 0.3 : i == 3 ? 0.8 : i == 4 ? 8.0 / 9 : 1.0),
                 yi);
      }
      VectorXd y5 = y;
      for (int j = 0; j < 6; ++j)
        if (A[6][j] != 0.0) y5 += hs * A[6][j] * k[j];
      VectorXd err = VectorXd::Zero(n);
      for (int j = 0; j < 7; ++j)
        if (E[j] != 0.0) err += hs * E[j] * k[j];

      double norm = 0.0;
      for (long i = 0; i < n; ++i) {
        const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
        norm += (err(i) / sc) * (err(i) / sc);
      }
      norm = std::sqrt(norm / static_cast<double>(n));

      if (!(norm <= 1.0) || !y5.allFinite()) {
        h = hs * std::max(0.2, 0.9 * std::pow(std::max(norm, 1e-10), -0.2));
        if (h < 1e-14 * std::max(1.0, std::abs(t_end))) {
          std::ostringstream ss;
          ss << "rollout: step size underflow at t = " << t << ", |x|_inf = "
             << y.cwiseAbs().maxCoeff();
          throw Error(ss.str());
        }
        continue;
      }

      t = clipped ? t_next : t + hs;
      y = y5;
      k[0] = k[6];  // FSAL
      const double grow = 0.9 * std::pow(std::max(norm, 1e-10), -0.2);
      h = std::min(hs * std::min(5.0, std::max(0.2, grow)), 0.25);
      if (h <= 0.0) h = 1e-6;
    }
    t = t_next;
    out.row(next) = y.transpose();
  }
  return out;
}

}  // namespace

ModelSpec with_lengths(const ModelSpec& model, const VectorXd& lengths) {
  if (lengths.size() != model.n_links) throw Error("with_lengths: dimension mismatch");
  ModelSpec m = model;
  for (int i = 0; i < model.n_links; ++i) m.link_lengths[static_cast<size_t>(i)] = lengths(i);
  return m;
}

RolloutResult rollout(const ModelSpec& model, const ControlFn& control,
                      const VectorXd& x0, double tf, const VectorXd& sample_times,
                      const RolloutOptions& options, const VectorXd& lengths) {
  const int nq = model.n_q();
  if (x0.size() != 2 * nq) throw Error("rollout: state dimension mismatch");
  if (sample_times.size() < 1) throw Error("rollout: need at least one sample time");
  for (int i = 0; i + 1 < sample_times.size(); ++i)
    if (!(sample_times(i) < sample_times(i + 1)))
      throw Error("rollout: sample times must be strictly increasing");
  if (sample_times(0) < -1e-12 || sample_times(sample_times.size() - 1) > tf + 1e-12)
    throw Error("rollout: sample times outside [0, tf]");

  const ModelSpec sim_model = lengths.size() > 0 ? with_lengths(model, lengths) : model;
  const OdeFn f = [&](double t, const VectorXd& y) {
    const VectorXd q = y.head(nq);
    const VectorXd qd = y.tail(nq);
    const VectorXd u = control(t);
    const VectorXd qdd = forward_dynamics(sim_model, q, qd, u);
    VectorXd dy(2 * nq);
    dy << qd, qdd;
    return dy;
  };

  RolloutResult res;
  res.times = sample_times;
  res.states = integrate_dopri(f, x0, sample_times, options);
  return res;
}

double validate(const Solution& sol, const ModelSpec& model, const RolloutOptions& options) {
  const Grid& grid = sol.grid;
  const int N = grid.n_intervals;
  VectorXd times(N + 1);
  for (int k = 0; k <= N; ++k) times(k) = grid.knot_time(k);

  const ControlFn control = [&](double t) { return interpolate_control(sol, t); };
  const VectorXd x0 = sol.knot_states.row(0).transpose();
  const RolloutResult res =
      rollout(model, control, x0, grid.tf, times, options, sol.lengths);

  double ss = 0.0;
  for (int k = 0; k <= N; ++k)
    for (int a = 0; a < 3; ++a) {
      const double d = res.states(k, a) - sol.knot_states(k, a);
      ss += d * d;
    }
  return std::sqrt(ss / (3.0 * (N + 1)));
}

TrialMetrics compute_metrics(const Solution& sol, const FourierTarget& target,
                             const ModelSpec& model, bool run_validation) {
  TrialMetrics m;
  const Grid& grid = sol.grid;
  const int N = grid.n_intervals;
  const int nq = sol.n_q;
  const int nu = sol.n_u;
  const double dt = grid.dt();

  m.tracking_error = tracking_error_quadrature(sol.knot_states, grid, target, nq);

  const ModelSpec sim_model =
      sol.lengths.size() > 0 ? with_lengths(model, sol.lengths) : model;

  // Hermite-Simpson midpoint states need the knot slopes.
  std::vector<VectorXd> knot_f(static_cast<size_t>(N + 1));
  for (int k = 0; k <= N; ++k) {
    const VectorXd x = sol.knot_states.row(k).transpose();
    const VectorXd u = sol.controls.row(2 * k).transpose();
    VectorXd f(2 * nq);
    f << x.tail(nq), forward_dynamics(sim_model, x.head(nq), x.tail(nq), u);
    knot_f[static_cast<size_t>(k)] = f;
  }

  m.max_tip_speed = 0.0;
  for (int s = 0; s <= 2 * N; ++s) {
    VectorXd x;
    if (s % 2 == 0) {
      x = sol.knot_states.row(s / 2).transpose();
    } else {
      const int k = s / 2;
      x = 0.5 * (sol.knot_states.row(k) + sol.knot_states.row(k + 1)).transpose() +
          (dt / 8.0) * (knot_f[static_cast<size_t>(k)] - knot_f[static_cast<size_t>(k + 1)]);
    }
    const TipState tip = tip_state(sim_model, x.head(nq), x.tail(nq));
    m.max_tip_speed = std::max(m.max_tip_speed, tip.velocity.norm());
  }

  const int n_joints = nu / 2;
  m.per_joint_effort.assign(static_cast<size_t>(n_joints), 0.0);
  const auto joint_sq = [&](int sample, int joint) {
    const double up = sol.controls(sample, 2 * joint);
    const double uy = sol.controls(sample, 2 * joint + 1);
    return up * up + uy * uy;
  };
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < n_joints; ++j)
      m.per_joint_effort[static_cast<size_t>(j)] +=
          dt / 6.0 *
          (joint_sq(2 * k, j) + 4.0 * joint_sq(2 * k + 1, j) + joint_sq(2 * k + 2, j));

  int saturated = 0;
  for (int s = 0; s <= 2 * N; ++s) {
    const double uu = sol.controls.row(s).squaredNorm();
    if (uu >= 0.95 * model.limits.effort_bound) ++saturated;
  }
  m.effort_saturation = static_cast<double>(saturated) / (2 * N + 1);

  m.validation_rms = run_validation ? validate(sol, model) : 0.0;
  return m;
}

double energy_balance_residual(const ModelSpec& model, const ControlFn& control,
                               double tf, const RolloutOptions& options) {
  const int nq = model.n_q();
  const OdeFn f = [&](double t, const VectorXd& y) {
    const VectorXd q = y.head(nq);
    const VectorXd qd = y.segment(nq, nq);
    const VectorXd u = control(t);
    const VectorXd qdd = forward_dynamics(model, q, qd, u);
    VectorXd dy(2 * nq + 1);
    dy << qd, qdd, u.dot(qd.tail(model.n_u()));
    return dy;
  };

  VectorXd times(51);
  for (int i = 0; i <= 50; ++i) times(i) = tf * i / 50.0;
  VectorXd y0 = VectorXd::Zero(2 * nq + 1);
  const MatrixXd traj = integrate_dopri(f, y0, times, options);

  double peak = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const VectorXd q = traj.row(i).head(nq);
    const VectorXd qd = traj.row(i).segment(nq, nq);
    peak = std::max(peak, kinetic_energy(model, q, qd));
  }
  const VectorXd qf = traj.row(50).head(nq);
  const VectorXd qdf = traj.row(50).segment(nq, nq);
  const double ke_end = kinetic_energy(model, qf, qdf);
  const double work = traj(50, 2 * nq);
  return std::abs(ke_end - work) / std::max(peak, 1e-12);
}

}  // namespace tailopt
