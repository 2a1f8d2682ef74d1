#include "tailopt/transcription.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tailopt/dynamics.hpp"

namespace tailopt {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasibleStalled: return "feasible_stalled";
    case SolveStatus::kIterationLimit: return "iteration_limit";
    case SolveStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

SolveStatus solve_status_from_string(const std::string& s) {
  if (s == "optimal") return SolveStatus::kOptimal;
  if (s == "feasible_stalled") return SolveStatus::kFeasibleStalled;
  if (s == "iteration_limit") return SolveStatus::kIterationLimit;
  if (s == "infeasible") return SolveStatus::kInfeasible;
  throw Error("unknown solver status '" + s + "'");
}

Grid Grid::from_step(double tf, double dt_target) {
  if (!(tf > 0.0) || !(dt_target > 0.0)) throw Error("grid: tf and dt must be positive");
  Grid g;
  g.t0 = 0.0;
  g.tf = tf;
  g.n_intervals = std::max(1, static_cast<int>(std::llround(tf / dt_target)));
  return g;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TranscribedNlp::TranscribedNlp(const ModelSpec& model, const FourierTarget& target,
                               const Grid& grid, Mode mode)
    : model_(model), target_(target), grid_(grid), mode_(mode) {
  model.validate();
  if (grid.n_intervals < 1) throw Error("transcription: grid needs at least one interval");
  if (mode == Mode::kVariable && (model.n_links < 1 || model.n_links > 4))
    throw Error("transcription: variable mode supports 1 to 4 vertebrae");

  n_q_ = model.n_q();
  nx_ = 2 * n_q_;
  nu_ = model.n_u();
  nl_ = mode == Mode::kVariable ? model.n_links : 0;
  has_objective_ = true;
  has_path_constraints_ = true;
  layout_ = default_layout(model);

  const ModelSpec m = model;
  const bool variable = mode == Mode::kVariable;
  dynamics_ = [m, variable](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& lengths, bool want_derivs,
                            PointDynamics& out) -> bool {
    const int nq = m.n_q();
    const Eigen::VectorXd q = x.head(nq);
    const Eigen::VectorXd qd = x.tail(nq);
    const Eigen::VectorXd len = variable ? lengths : Eigen::VectorXd();
    try {
      out.f.resize(2 * nq);
      if (!want_derivs) {
        const Eigen::VectorXd qdd = variable ? forward_dynamics_lengths(m, q, qd, u, len)
                                             : forward_dynamics(m, q, qd, u);
        out.f << qd, qdd;
        return out.f.allFinite();
      }
      Eigen::VectorXd qdd;
      DynPartials p;
      Eigen::MatrixXd dl;
      forward_dynamics_full(m, q, qd, u, len, qdd, p, variable ? &dl : nullptr);
      out.f << qd, qdd;
      out.df_dx.setZero(2 * nq, 2 * nq);
      out.df_dx.topRightCorner(nq, nq).setIdentity();
      out.df_dx.bottomLeftCorner(nq, nq) = p.dq;
      out.df_dx.bottomRightCorner(nq, nq) = p.dqd;
      out.df_du.setZero(2 * nq, m.n_u());
      out.df_du.bottomRows(nq) = p.du;
      if (variable) {
        out.df_dl.setZero(2 * nq, m.n_links);
        out.df_dl.bottomRows(nq) = dl;
      }
      return out.f.allFinite() && out.df_dx.allFinite() && out.df_du.allFinite() &&
             (!variable || out.df_dl.allFinite());
    } catch (const SingularConfigError&) {
      out.f.setConstant(2 * nq, std::numeric_limits<double>::quiet_NaN());
      return false;
    }
  };

  finish_setup(Eigen::VectorXd::Zero(nx_));
}

TranscribedNlp::TranscribedNlp(int dim_x, int dim_u, const Grid& grid, DynamicsFn dynamics,
                               const Eigen::VectorXd& x0)
    : grid_(grid), dynamics_(std::move(dynamics)) {
  if (x0.size() != dim_x) throw Error("transcription: x0 dimension mismatch");
  nx_ = dim_x;
  nu_ = dim_u;
  n_q_ = dim_x / 2;
  nl_ = 0;
  has_objective_ = false;
  has_path_constraints_ = false;
  finish_setup(x0);
}

int TranscribedNlp::x_index(int k) const { return k * (nx_ + 2 * nu_); }

int TranscribedNlp::u_index(int sample) const {
  const int k = sample / 2;
  return x_index(k) + nx_ + (sample % 2 == 0 ? 0 : nu_);
}

int TranscribedNlp::length_index() const { return x_index(grid_.n_intervals) + nx_ + nu_; }

void TranscribedNlp::finish_setup(const Eigen::VectorXd& x0) {
  const int N = grid_.n_intervals;
  n_vars_ = (N + 1) * nx_ + (2 * N + 1) * nu_ + nl_;

  n_eq_ = N * nx_ + (nl_ > 0 ? 1 : 0);

  rate_row0_ = 0;
  effort_row0_ = 0;
  collision_row0_ = 0;
  length_row0_ = 0;
  n_ineq_ = 0;
  if (has_path_constraints_) {
    rate_row0_ = 0;
    n_ineq_ += 2 * N * nu_ * 2;  // +/- per consecutive sample pair and DOF
    effort_row0_ = n_ineq_;
    n_ineq_ += 2 * N + 1;
    collision_row0_ = n_ineq_;
    n_ineq_ += (N + 1) * layout_.n_pairs();
    length_row0_ = n_ineq_;
    n_ineq_ += nl_;
  }

  lb_.setConstant(n_vars_, -kInf);
  ub_.setConstant(n_vars_, kInf);
  if (model_) {
    const JointLimits& lim = model_->limits;
    Eigen::VectorXd xl(nx_);
    for (int i = 0; i < n_q_; ++i)
      xl(i) = i < 3 ? lim.torso_angle_rad : lim.rom_rad;
    for (int i = 0; i < n_q_; ++i)
      xl(n_q_ + i) = i < 3 ? lim.torso_vel_rad_s : lim.vel_rad_s;
    for (int k = 0; k <= N; ++k) {
      lb_.segment(x_index(k), nx_) = -xl;
      ub_.segment(x_index(k), nx_) = xl;
    }
    for (int s = 0; s < num_samples(); ++s) {
      lb_.segment(u_index(s), nu_).setConstant(-lim.torque_nm);
      ub_.segment(u_index(s), nu_).setConstant(lim.torque_nm);
    }
    if (nl_ > 0) {
      const double total = model_->total_tail_length();
      lb_.segment(length_index(), nl_).setConstant(kMinVertebraLength);
      ub_.segment(length_index(), nl_)
          .setConstant(total - (nl_ - 1) * kMinVertebraLength);
    }
  }
  // Fixed initial state.
  lb_.segment(x_index(0), nx_) = x0;
  ub_.segment(x_index(0), nx_) = x0;

  if (has_objective_) {
    const int Nk = N + 1;
    target_knot_.resize(3, Nk);
    target_mid_.resize(3, N);
    Eigen::Vector3d th, thd;
    for (int k = 0; k < Nk; ++k) {
      target_->eval(grid_.knot_time(k), th, thd);
      target_knot_.col(k) = th;
    }
    for (int k = 0; k < N; ++k) {
      target_->eval(grid_.mid_time(k), th, thd);
      target_mid_.col(k) = th;
    }

    // Constant objective Hessian. The midpoint torso angles are linear in
    // the neighboring knot states, so the tracking cost is exactly quadratic.
    const double dt = grid_.dt();
    const double w = dt / 6.0;
    obj_hess_triplets_.clear();
    for (int k = 0; k < N; ++k) {
      const int xk = x_index(k);
      const int xk1 = x_index(k + 1);
      for (int a = 0; a < 3; ++a) {
        obj_hess_triplets_.emplace_back(xk + a, xk + a, 2.0 * w);
        obj_hess_triplets_.emplace_back(xk1 + a, xk1 + a, 2.0 * w);
        const int v[4] = {xk + a, xk1 + a, xk + n_q_ + a, xk1 + n_q_ + a};
        const double c[4] = {0.5, 0.5, dt / 8.0, -dt / 8.0};
        for (int p = 0; p < 4; ++p)
          for (int q = 0; q < 4; ++q)
            obj_hess_triplets_.emplace_back(v[p], v[q], 8.0 * w * c[p] * c[q]);
      }
    }
  }
}

void TranscribedNlp::objective_terms(const Eigen::VectorXd& z, double* value,
                                     Eigen::VectorXd* grad) const {
  if (value != nullptr) *value = 0.0;
  if (!has_objective_) return;
  const int N = grid_.n_intervals;
  const double dt = grid_.dt();
  const double w = dt / 6.0;
  for (int k = 0; k < N; ++k) {
    const int xk = x_index(k);
    const int xk1 = x_index(k + 1);
    for (int a = 0; a < 3; ++a) {
      const double e0 = z(xk + a) - target_knot_(a, k);
      const double e1 = z(xk1 + a) - target_knot_(a, k + 1);
      const double mid = 0.5 * (z(xk + a) + z(xk1 + a)) +
                         dt / 8.0 * (z(xk + n_q_ + a) - z(xk1 + n_q_ + a));
      const double em = mid - target_mid_(a, k);
      if (value != nullptr) *value += w * (e0 * e0 + 4.0 * em * em + e1 * e1);
      if (grad != nullptr) {
        (*grad)(xk + a) += 2.0 * w * e0 + 4.0 * w * em;
        (*grad)(xk1 + a) += 2.0 * w * e1 + 4.0 * w * em;
        (*grad)(xk + n_q_ + a) += 8.0 * w * em * (dt / 8.0);
        (*grad)(xk1 + n_q_ + a) -= 8.0 * w * em * (dt / 8.0);
      }
    }
  }
}

bool TranscribedNlp::point_dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& lengths, bool want_derivs,
                                    PointDynamics& out) const {
  return dynamics_(x, u, lengths, want_derivs, out);
}

bool TranscribedNlp::eval_impl(const Eigen::VectorXd& z, bool want_derivs, double& f,
                               Eigen::VectorXd* grad_f, Eigen::VectorXd& c_eq,
                               Eigen::VectorXd& c_ineq,
                               Eigen::SparseMatrix<double>* jac_eq,
                               Eigen::SparseMatrix<double>* jac_ineq) const {
  if (z.size() != n_vars_) throw Error("transcription: decision vector dimension mismatch");
  const int N = grid_.n_intervals;
  const double dt = grid_.dt();
  const Eigen::VectorXd lengths =
      nl_ > 0 ? Eigen::VectorXd(z.segment(length_index(), nl_)) : Eigen::VectorXd();

  bool ok = z.allFinite();

  f = 0.0;
  if (grad_f != nullptr) grad_f->setZero(n_vars_);
  objective_terms(z, &f, grad_f);
  ok = ok && std::isfinite(f);

  c_eq.setConstant(n_eq_, std::numeric_limits<double>::quiet_NaN());
  c_ineq.setConstant(n_ineq_, std::numeric_limits<double>::quiet_NaN());

  // Dynamics at every knot and midpoint. Midpoint states follow the
  // Hermite-Simpson interpolant of the neighboring knots.
  std::vector<PointDynamics> knot_dyn(static_cast<size_t>(N + 1));
  std::vector<PointDynamics> mid_dyn(static_cast<size_t>(N));
  std::vector<Eigen::VectorXd> mid_states(static_cast<size_t>(N));
  if (ok) {
    for (int k = 0; k <= N && ok; ++k) {
      const Eigen::VectorXd x = z.segment(x_index(k), nx_);
      const Eigen::VectorXd u = z.segment(u_index(2 * k), nu_);
      ok = point_dynamics(x, u, lengths, want_derivs, knot_dyn[static_cast<size_t>(k)]);
    }
    for (int k = 0; k < N && ok; ++k) {
      const Eigen::VectorXd xk = z.segment(x_index(k), nx_);
      const Eigen::VectorXd xk1 = z.segment(x_index(k + 1), nx_);
      const Eigen::VectorXd um = z.segment(u_index(2 * k + 1), nu_);
      mid_states[static_cast<size_t>(k)] =
          0.5 * (xk + xk1) + (dt / 8.0) * (knot_dyn[static_cast<size_t>(k)].f -
                                           knot_dyn[static_cast<size_t>(k + 1)].f);
      ok = point_dynamics(mid_states[static_cast<size_t>(k)], um, lengths, want_derivs,
                          mid_dyn[static_cast<size_t>(k)]);
    }
  }

  if (ok) {
    for (int k = 0; k < N; ++k) {
      const Eigen::VectorXd xk = z.segment(x_index(k), nx_);
      const Eigen::VectorXd xk1 = z.segment(x_index(k + 1), nx_);
      c_eq.segment(k * nx_, nx_) =
          xk1 - xk -
          (dt / 6.0) * (knot_dyn[static_cast<size_t>(k)].f +
                        4.0 * mid_dyn[static_cast<size_t>(k)].f +
                        knot_dyn[static_cast<size_t>(k + 1)].f);
    }
    if (nl_ > 0)
      c_eq(N * nx_) = lengths.sum() - model_->total_tail_length();
  }

  if (ok && has_path_constraints_) {
    const JointLimits& lim = model_->limits;
    const double rdt = lim.rate_bound_nm_s * (dt / 2.0);
    for (int s = 0; s < 2 * N; ++s) {
      const Eigen::VectorXd du =
          z.segment(u_index(s + 1), nu_) - z.segment(u_index(s), nu_);
      c_ineq.segment(rate_row0_ + s * 2 * nu_, nu_) = du.array() - rdt;
      c_ineq.segment(rate_row0_ + s * 2 * nu_ + nu_, nu_) = -du.array() - rdt;
    }
    for (int s = 0; s < num_samples(); ++s) {
      const Eigen::VectorXd u = z.segment(u_index(s), nu_);
      c_ineq(effort_row0_ + s) = u.squaredNorm() - lim.effort_bound;
    }
    try {
      for (int k = 0; k <= N; ++k) {
        const Eigen::VectorXd q = z.segment(x_index(k), n_q_);
        c_ineq.segment(collision_row0_ + k * layout_.n_pairs(), layout_.n_pairs()) =
            collision_values(*model_, layout_, q, lengths);
      }
    } catch (const Error&) {
      ok = false;
    }
    for (int i = 0; i < nl_; ++i)
      c_ineq(length_row0_ + i) = kMinVertebraLength - lengths(i);
  }

  ok = ok && c_eq.allFinite() && c_ineq.allFinite();

  if (ok && want_derivs && jac_eq != nullptr && jac_ineq != nullptr) {
    std::vector<Eigen::Triplet<double>> te;
    te.reserve(static_cast<size_t>(N) * static_cast<size_t>(nx_ * (2 * nx_ + 3 * nu_ + nl_ + 2)));

    const auto push_block = [&te](int row0, int col0, const Eigen::MatrixXd& blk) {
      for (int c = 0; c < blk.cols(); ++c)
        for (int r = 0; r < blk.rows(); ++r)
          if (blk(r, c) != 0.0) te.emplace_back(row0 + r, col0 + c, blk(r, c));
    };

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nx_, nx_);
    for (int k = 0; k < N; ++k) {
      const auto& dk = knot_dyn[static_cast<size_t>(k)];
      const auto& dk1 = knot_dyn[static_cast<size_t>(k + 1)];
      const auto& dm = mid_dyn[static_cast<size_t>(k)];
      const int row = k * nx_;

      // Mid-state sensitivities under the Hermite interpolant.
      const Eigen::MatrixXd Mk = 0.5 * I + (dt / 8.0) * dk.df_dx;
      const Eigen::MatrixXd Mk1 = 0.5 * I - (dt / 8.0) * dk1.df_dx;

      push_block(row, x_index(k), -I - (dt / 6.0) * (dk.df_dx + 4.0 * dm.df_dx * Mk));
      push_block(row, x_index(k + 1), I - (dt / 6.0) * (dk1.df_dx + 4.0 * dm.df_dx * Mk1));
      push_block(row, u_index(2 * k),
                 -(dt / 6.0) * dk.df_du - (dt * dt / 12.0) * (dm.df_dx * dk.df_du));
      push_block(row, u_index(2 * k + 1), -(2.0 * dt / 3.0) * dm.df_du);
      push_block(row, u_index(2 * k + 2),
                 -(dt / 6.0) * dk1.df_du + (dt * dt / 12.0) * (dm.df_dx * dk1.df_du));
      if (nl_ > 0) {
        const Eigen::MatrixXd dmid_dl = (dt / 8.0) * (dk.df_dl - dk1.df_dl);
        push_block(row, length_index(),
                   -(dt / 6.0) *
                       (dk.df_dl + dk1.df_dl + 4.0 * (dm.df_dl + dm.df_dx * dmid_dl)));
      }
    }
    if (nl_ > 0)
      for (int i = 0; i < nl_; ++i) te.emplace_back(N * nx_, length_index() + i, 1.0);

    jac_eq->resize(n_eq_, n_vars_);
    jac_eq->setFromTriplets(te.begin(), te.end());

    std::vector<Eigen::Triplet<double>> ti;
    if (has_path_constraints_) {
      for (int s = 0; s < 2 * N; ++s) {
        for (int j = 0; j < nu_; ++j) {
          const int rp = rate_row0_ + s * 2 * nu_ + j;
          const int rm = rp + nu_;
          ti.emplace_back(rp, u_index(s + 1) + j, 1.0);
          ti.emplace_back(rp, u_index(s) + j, -1.0);
          ti.emplace_back(rm, u_index(s + 1) + j, -1.0);
          ti.emplace_back(rm, u_index(s) + j, 1.0);
        }
      }
      for (int s = 0; s < num_samples(); ++s)
        for (int j = 0; j < nu_; ++j) {
          const double uj = z(u_index(s) + j);
          if (uj != 0.0) ti.emplace_back(effort_row0_ + s, u_index(s) + j, 2.0 * uj);
        }
      try {
        Eigen::MatrixXd dg_dq, dg_dl;
        for (int k = 0; k <= N; ++k) {
          const Eigen::VectorXd q = z.segment(x_index(k), n_q_);
          collision_jacobian(*model_, layout_, q, lengths, dg_dq,
                             nl_ > 0 ? &dg_dl : nullptr);
          const int row0 = collision_row0_ + k * layout_.n_pairs();
          for (int r = 0; r < dg_dq.rows(); ++r)
            for (int c = 0; c < n_q_; ++c)
              if (dg_dq(r, c) != 0.0) ti.emplace_back(row0 + r, x_index(k) + c, dg_dq(r, c));
          if (nl_ > 0)
            for (int r = 0; r < dg_dl.rows(); ++r)
              for (int c = 0; c < nl_; ++c)
                if (dg_dl(r, c) != 0.0)
                  ti.emplace_back(row0 + r, length_index() + c, dg_dl(r, c));
        }
      } catch (const Error&) {
        ok = false;
      }
      for (int i = 0; i < nl_; ++i)
        ti.emplace_back(length_row0_ + i, length_index() + i, -1.0);
    }
    jac_ineq->resize(n_ineq_, n_vars_);
    jac_ineq->setFromTriplets(ti.begin(), ti.end());
  }

  return ok;
}

bool TranscribedNlp::eval(const Eigen::VectorXd& z, double& f, Eigen::VectorXd& c_eq,
                          Eigen::VectorXd& c_ineq) const {
  return eval_impl(z, false, f, nullptr, c_eq, c_ineq, nullptr, nullptr);
}

bool TranscribedNlp::eval_derivs(const Eigen::VectorXd& z, double& f,
                                 Eigen::VectorXd& grad_f, Eigen::VectorXd& c_eq,
                                 Eigen::VectorXd& c_ineq,
                                 Eigen::SparseMatrix<double>& jac_eq,
                                 Eigen::SparseMatrix<double>& jac_ineq) const {
  return eval_impl(z, true, f, &grad_f, c_eq, c_ineq, &jac_eq, &jac_ineq);
}

void TranscribedNlp::objective_hessian(const Eigen::VectorXd&,
                                       Eigen::SparseMatrix<double>& hess) const {
  hess.resize(n_vars_, n_vars_);
  hess.setFromTriplets(obj_hess_triplets_.begin(), obj_hess_triplets_.end());
}

double TranscribedNlp::eval_objective(const Eigen::VectorXd& z) const {
  double f = 0.0;
  objective_terms(z, &f, nullptr);
  return f;
}

void TranscribedNlp::eval_constraints(const Eigen::VectorXd& z, Eigen::VectorXd& c_eq,
                                      Eigen::VectorXd& c_ineq) const {
  double f;
  if (!eval_impl(z, false, f, nullptr, c_eq, c_ineq, nullptr, nullptr))
    throw Error("eval_constraints: non-finite result; " + diagnose_nonfinite(z));
}

void TranscribedNlp::eval_jacobians(const Eigen::VectorXd& z, Eigen::VectorXd& grad_f,
                                    Eigen::SparseMatrix<double>& jac_eq,
                                    Eigen::SparseMatrix<double>& jac_ineq) const {
  double f;
  Eigen::VectorXd c_eq, c_ineq;
  if (!eval_impl(z, true, f, &grad_f, c_eq, c_ineq, &jac_eq, &jac_ineq))
    throw Error("eval_jacobians: non-finite result; " + diagnose_nonfinite(z));
}

std::string TranscribedNlp::diagnose_nonfinite(const Eigen::VectorXd& z) const {
  if (!z.allFinite()) {
    for (int i = 0; i < z.size(); ++i)
      if (!std::isfinite(z(i)))
        return "decision variable " + std::to_string(i) + " is non-finite";
  }
  double f;
  Eigen::VectorXd c_eq, c_ineq;
  eval_impl(z, false, f, nullptr, c_eq, c_ineq, nullptr, nullptr);
  if (!std::isfinite(f)) return "objective is non-finite";
  for (int i = 0; i < c_eq.size(); ++i)
    if (!std::isfinite(c_eq(i)))
      return "equality constraint " + std::to_string(i) + " is non-finite";
  for (int i = 0; i < c_ineq.size(); ++i)
    if (!std::isfinite(c_ineq(i)))
      return "inequality constraint " + std::to_string(i) + " is non-finite";
  return "";
}

Eigen::VectorXd TranscribedNlp::pack(const Eigen::MatrixXd& knot_states,
                                     const Eigen::MatrixXd& controls,
                                     const Eigen::VectorXd& lengths) const {
  if (knot_states.rows() != num_knots() || knot_states.cols() != nx_)
    throw Error("pack: knot state dimensions mismatch");
  if (controls.rows() != num_samples() || controls.cols() != nu_)
    throw Error("pack: control dimensions mismatch");
  if (lengths.size() != nl_) throw Error("pack: lengths dimension mismatch");
  Eigen::VectorXd z(n_vars_);
  for (int k = 0; k < num_knots(); ++k)
    z.segment(x_index(k), nx_) = knot_states.row(k).transpose();
  for (int s = 0; s < num_samples(); ++s)
    z.segment(u_index(s), nu_) = controls.row(s).transpose();
  if (nl_ > 0) z.segment(length_index(), nl_) = lengths;
  return z;
}

void TranscribedNlp::unpack(const Eigen::VectorXd& z, Eigen::MatrixXd& knot_states,
                            Eigen::MatrixXd& controls, Eigen::VectorXd& lengths) const {
  if (z.size() != n_vars_) throw Error("unpack: decision vector dimension mismatch");
  knot_states.resize(num_knots(), nx_);
  controls.resize(num_samples(), nu_);
  for (int k = 0; k < num_knots(); ++k)
    knot_states.row(k) = z.segment(x_index(k), nx_).transpose();
  for (int s = 0; s < num_samples(); ++s)
    controls.row(s) = z.segment(u_index(s), nu_).transpose();
  lengths = nl_ > 0 ? Eigen::VectorXd(z.segment(length_index(), nl_)) : Eigen::VectorXd();
}

Solution TranscribedNlp::make_solution(const Eigen::VectorXd& z, SolveStatus status,
                                       int iterations, double violation) const {
  Solution sol;
  sol.grid = grid_;
  sol.n_q = n_q_;
  sol.n_u = nu_;
  unpack(z, sol.knot_states, sol.controls, sol.lengths);
  sol.objective = eval_objective(z);
  sol.status = status;
  sol.iterations = iterations;
  sol.constraint_violation = violation;
  return sol;
}

TranscribedNlp build_nlp(const ModelSpec& model, const FourierTarget& target,
                         const Grid& grid, Mode mode) {
  return TranscribedNlp(model, target, grid, mode);
}

double tracking_error_quadrature(const Eigen::MatrixXd& knot_states, const Grid& grid,
                                 const FourierTarget& target, int n_q) {
  const int N = grid.n_intervals;
  if (knot_states.rows() != N + 1) throw Error("tracking error: knot count mismatch");
  const double dt = grid.dt();
  const double w = dt / 6.0;
  Eigen::Vector3d th, thd, thm;
  double err = 0.0;
  for (int k = 0; k < N; ++k) {
    target.eval(grid.knot_time(k), th, thd);
    target.eval(grid.mid_time(k), thm, thd);
    Eigen::Vector3d th1;
    target.eval(grid.knot_time(k + 1), th1, thd);
    for (int a = 0; a < 3; ++a) {
      const double e0 = knot_states(k, a) - th(a);
      const double e1 = knot_states(k + 1, a) - th1(a);
      const double mid = 0.5 * (knot_states(k, a) + knot_states(k + 1, a)) +
                         dt / 8.0 * (knot_states(k, n_q + a) - knot_states(k + 1, n_q + a));
      const double em = mid - thm(a);
      err += w * (e0 * e0 + 4.0 * em * em + e1 * e1);
    }
  }
  return err;
}

namespace {

int interval_of(const Grid& grid, double t) {
  if (t < grid.t0 - 1e-12 || t > grid.tf + 1e-12)
    throw Error("interpolation time outside the horizon");
  const double s = (t - grid.t0) / grid.dt();
  int k = static_cast<int>(std::floor(s));
  if (k >= grid.n_intervals) k = grid.n_intervals - 1;
  if (k < 0) k = 0;
  return k;
}

}  // namespace

Eigen::VectorXd interpolate_control(const Solution& sol, double t) {
  const Grid& grid = sol.grid;
  const int k = interval_of(grid, t);
  const double s = (t - grid.knot_time(k)) / grid.dt();
  const Eigen::VectorXd u0 = sol.controls.row(2 * k).transpose();
  const Eigen::VectorXd um = sol.controls.row(2 * k + 1).transpose();
  const Eigen::VectorXd u1 = sol.controls.row(2 * k + 2).transpose();
  // Quadratic through (0, u0), (1/2, um), (1, u1).
  const double b0 = (2.0 * s - 1.0) * (s - 1.0);
  const double bm = 4.0 * s * (1.0 - s);
  const double b1 = s * (2.0 * s - 1.0);
  return b0 * u0 + bm * um + b1 * u1;
}

void interpolate_state_control(const Solution& sol, const ModelSpec& model, double t,
                               Eigen::VectorXd& x, Eigen::VectorXd& u) {
  const Grid& grid = sol.grid;
  const int k = interval_of(grid, t);
  const double dt = grid.dt();
  const double s = (t - grid.knot_time(k)) / dt;
  u = interpolate_control(sol, t);

  const int nq = sol.n_q;
  const auto slope = [&](int knot) {
    const Eigen::VectorXd xs = sol.knot_states.row(knot).transpose();
    const Eigen::VectorXd us = sol.controls.row(2 * knot).transpose();
    const Eigen::VectorXd q = xs.head(nq);
    const Eigen::VectorXd qd = xs.tail(nq);
    const Eigen::VectorXd qdd = sol.lengths.size() > 0
                                    ? forward_dynamics_lengths(model, q, qd, us, sol.lengths)
                                    : forward_dynamics(model, q, qd, us);
    Eigen::VectorXd f(2 * nq);
    f << qd, qdd;
    return f;
  };
  const Eigen::VectorXd x0 = sol.knot_states.row(k).transpose();
  const Eigen::VectorXd x1 = sol.knot_states.row(k + 1).transpose();
  const Eigen::VectorXd f0 = slope(k);
  const Eigen::VectorXd f1 = slope(k + 1);
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  x = h00 * x0 + h10 * dt * f0 + h01 * x1 + h11 * dt * f1;
}

namespace {

std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_solution_csv(const Solution& sol, const ModelSpec& model,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write solution file '" + path + "'");
  out << "# objective = " << fmt_g17(sol.objective) << "\n";
  out << "# status = " << to_string(sol.status) << "\n";
  out << "# iterations = " << sol.iterations << "\n";
  out << "# constraint_violation = " << fmt_g17(sol.constraint_violation) << "\n";
  out << "# n_q = " << sol.n_q << "\n";
  out << "# n_u = " << sol.n_u << "\n";
  out << "# t0 = " << fmt_g17(sol.grid.t0) << "\n";
  out << "# tf = " << fmt_g17(sol.grid.tf) << "\n";
  out << "# n_intervals = " << sol.grid.n_intervals << "\n";
  out << "# mode = " << (sol.lengths.size() > 0 ? "variable" : "uniform") << "\n";
  if (sol.lengths.size() > 0) {
    out << "# lengths = ";
    for (int i = 0; i < sol.lengths.size(); ++i)
      out << (i > 0 ? ";" : "") << fmt_g17(sol.lengths(i));
    out << "\n";
  }
  out << "t";
  for (int i = 0; i < sol.n_q; ++i) out << ",q" << i;
  for (int i = 0; i < sol.n_q; ++i) out << ",qd" << i;
  for (int i = 0; i < sol.n_u; ++i) out << ",u" << i;
  out << "\n";

  const int N = sol.grid.n_intervals;
  for (int s = 0; s <= 2 * N; ++s) {
    const double t = sol.grid.sample_time(s);
    Eigen::VectorXd x;
    if (s % 2 == 0) {
      x = sol.knot_states.row(s / 2).transpose();
    } else {
      Eigen::VectorXd u_unused;
      interpolate_state_control(sol, model, t, x, u_unused);
    }
    out << fmt_g17(t);
    for (int i = 0; i < x.size(); ++i) out << ',' << fmt_g17(x(i));
    for (int i = 0; i < sol.n_u; ++i) out << ',' << fmt_g17(sol.controls(s, i));
    out << "\n";
  }
}

Solution read_solution_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open solution file '" + path + "'");
  Solution sol;
  std::string line;
  std::vector<std::vector<double>> rows;
  bool saw_schema = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      std::string val = line.substr(eq + 1);
      const auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
      };
      trim(key);
      trim(val);
      if (key == "objective") sol.objective = std::stod(val);
      else if (key == "status") sol.status = solve_status_from_string(val);
      else if (key == "iterations") sol.iterations = std::stoi(val);
      else if (key == "constraint_violation") sol.constraint_violation = std::stod(val);
      else if (key == "n_q") sol.n_q = std::stoi(val);
      else if (key == "n_u") sol.n_u = std::stoi(val);
      else if (key == "t0") sol.grid.t0 = std::stod(val);
      else if (key == "tf") sol.grid.tf = std::stod(val);
      else if (key == "n_intervals") sol.grid.n_intervals = std::stoi(val);
      else if (key == "lengths") {
        std::vector<double> ls;
        std::istringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ';')) ls.push_back(std::stod(tok));
        sol.lengths = Eigen::Map<Eigen::VectorXd>(ls.data(), static_cast<long>(ls.size()));
      }
      continue;
    }
    if (!saw_schema) {  // column header
      saw_schema = true;
      continue;
    }
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    rows.push_back(std::move(row));
  }
  if (sol.n_q <= 0 || sol.n_u <= 0) throw Error("solution file '" + path + "': missing n_q/n_u header");
  const int N = sol.grid.n_intervals;
  if (static_cast<int>(rows.size()) != 2 * N + 1)
    throw Error("solution file '" + path + "': row count does not match the grid");
  const size_t expected_cols = 1 + 2 * static_cast<size_t>(sol.n_q) + static_cast<size_t>(sol.n_u);
  sol.knot_states.resize(N + 1, 2 * sol.n_q);
  sol.controls.resize(2 * N + 1, sol.n_u);
  for (int s = 0; s <= 2 * N; ++s) {
    const auto& row = rows[static_cast<size_t>(s)];
    if (row.size() != expected_cols)
      throw Error("solution file '" + path + "': bad column count");
    if (s % 2 == 0)
      for (int i = 0; i < 2 * sol.n_q; ++i)
        sol.knot_states(s / 2, i) = row[static_cast<size_t>(1 + i)];
    for (int i = 0; i < sol.n_u; ++i)
      sol.controls(s, i) = row[static_cast<size_t>(1 + 2 * sol.n_q + i)];
  }
  return sol;
}

}  // namespace tailopt
