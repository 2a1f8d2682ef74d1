#include "tailopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "tailopt/rng.hpp"

namespace tailopt {

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

double violation_norm(const VectorXd& c_eq, const VectorXd& c_ineq) {
  double v = 0.0;
  if (c_eq.size() > 0) v = c_eq.cwiseAbs().maxCoeff();
  if (c_ineq.size() > 0) v = std::max(v, c_ineq.maxCoeff());
  return std::max(v, 0.0);
}

std::string dump_iterate(const VectorXd& z) {
  std::ostringstream ss;
  ss << "n = " << z.size() << ", |z|_inf = " << z.cwiseAbs().maxCoeff()
     << ", head = [";
  for (int i = 0; i < std::min<int>(5, static_cast<int>(z.size())); ++i)
    ss << (i > 0 ? ", " : "") << z(i);
  ss << "]";
  return ss.str();
}

}  // namespace

void SolverConfig::validate() const {
  if (!(feas_tol > 0.0) || !(opt_tol > 0.0)) throw Error("solver: tolerances must be positive");
  if (max_iterations < 1 || max_inner < 1 || max_outer < 1)
    throw Error("solver: iteration limits must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw Error("solver: backtrack in (0,1)");
  if (!(rho0 > 0.0) || !(rho_growth > 1.0)) throw Error("solver: bad penalty settings");
}

SolveResult solve(const Nlp& nlp, const VectorXd& init, const SolverConfig& cfg) {
  cfg.validate();
  const int n = nlp.num_vars();
  const int n_eq = nlp.num_eq();
  const int n_ineq = nlp.num_ineq();
  if (init.size() != n) throw Error("solver: initial point dimension mismatch");
  const VectorXd& lb = nlp.lower_bounds();
  const VectorXd& ub = nlp.upper_bounds();

  const auto project = [&](const VectorXd& v) -> VectorXd {
    return v.cwiseMax(lb).cwiseMin(ub);
  };

  VectorXd z = project(init);
  VectorXd lambda = VectorXd::Zero(n_eq);
  VectorXd mu = VectorXd::Zero(n_ineq);
  double rho = cfg.rho0;

  double f = 0.0;
  VectorXd c_eq(n_eq), c_ineq(n_ineq);
  if (!nlp.eval(z, f, c_eq, c_ineq))
    throw Error("solver: non-finite user functions at the initial point (" +
                dump_iterate(z) + ")");

  // Augmented Lagrangian (PHR form).
  const auto merit = [&](double fv, const VectorXd& ce, const VectorXd& ci) {
    double phi = fv;
    if (ce.size() > 0) phi += lambda.dot(ce) + 0.5 * rho * ce.squaredNorm();
    for (int i = 0; i < ci.size(); ++i) {
      const double t = mu(i) + rho * ci(i);
      phi += (t > 0.0 ? t * t - mu(i) * mu(i) : -mu(i) * mu(i)) / (2.0 * rho);
    }
    return phi;
  };

  SolveResult best;
  best.feasible = false;
  best.objective = std::numeric_limits<double>::infinity();
  const auto update_best = [&](const VectorXd& zz, double fv, const VectorXd& ce,
                               const VectorXd& ci) {
    const double v = violation_norm(ce, ci);
    if (v <= cfg.feas_tol && fv < best.objective) {
      best.z = zz;
      best.objective = fv;
      best.constraint_violation = v;
      best.feasible = true;
    }
  };
  update_best(z, f, c_eq, c_ineq);

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path);
    log << "iter,objective,feasibility,step,merit,pg,rho\n";
  }

  VectorXd grad_f(n), g_phi(n);
  SpMat jac_eq, jac_ineq, hess_f;
  double nu = 1e-6;
  double omega = 1e-3;              // inner projected-gradient tolerance
  double eta = 1e-2;                // feasibility gate for multiplier updates
  int total_iters = 0;
  int idle_outers = 0;
  double pgn = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool iteration_limit = false;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    bool stalled = false;
    int inner_steps = 0;

    for (int it = 0; it < cfg.max_inner; ++it) {
      if (!nlp.eval_derivs(z, f, grad_f, c_eq, c_ineq, jac_eq, jac_ineq)) {
        stalled = true;
        break;
      }
      update_best(z, f, c_eq, c_ineq);

      const VectorXd y_eq = lambda + rho * c_eq;
      const VectorXd y_ineq = (mu + rho * c_ineq).cwiseMax(0.0);
      g_phi = grad_f;
      if (n_eq > 0) g_phi += jac_eq.transpose() * y_eq;
      if (n_ineq > 0) g_phi += jac_ineq.transpose() * y_ineq;

      pgn = (z - project(z - g_phi)).cwiseAbs().maxCoeff();
      if (log.is_open())
        log << total_iters << ',' << f << ',' << violation_norm(c_eq, c_ineq) << ','
            << 0.0 << ',' << merit(f, c_eq, c_ineq) << ',' << pgn << ',' << rho << '\n';
      if (pgn <= omega) break;
      if (total_iters >= cfg.max_iterations) {
        iteration_limit = true;
        break;
      }

      // Active bound set (pins included through lb == ub).
      std::vector<char> active(static_cast<size_t>(n), 0);
      for (int i = 0; i < n; ++i) {
        const double eps = 1e-9 * (1.0 + std::abs(z(i)));
        if (lb(i) == ub(i) || (z(i) <= lb(i) + eps && g_phi(i) > 0.0) ||
            (z(i) >= ub(i) - eps && g_phi(i) < 0.0))
          active[static_cast<size_t>(i)] = 1;
      }

      // Gauss-Newton model: objective Hessian plus rho J'J over equalities
      // and active inequalities, columns of active variables removed.
      nlp.objective_hessian(z, hess_f);
      std::vector<Eigen::Triplet<double>> tw;
      tw.reserve(static_cast<size_t>(jac_eq.nonZeros() + jac_ineq.nonZeros()));
      const double sr = std::sqrt(rho);
      int wrow = 0;
      if (n_eq > 0) {
        for (int col = 0; col < jac_eq.outerSize(); ++col)
          if (!active[static_cast<size_t>(col)])
            for (SpMat::InnerIterator itr(jac_eq, col); itr; ++itr)
              tw.emplace_back(static_cast<int>(itr.row()), col, sr * itr.value());
        wrow = n_eq;
      }
      std::vector<int> ineq_row(static_cast<size_t>(n_ineq), -1);
      for (int i = 0; i < n_ineq; ++i)
        if (y_ineq(i) > 0.0) ineq_row[static_cast<size_t>(i)] = wrow++;
      if (n_ineq > 0) {
        for (int col = 0; col < jac_ineq.outerSize(); ++col)
          if (!active[static_cast<size_t>(col)])
            for (SpMat::InnerIterator itr(jac_ineq, col); itr; ++itr) {
              const int r = ineq_row[static_cast<size_t>(itr.row())];
              if (r >= 0) tw.emplace_back(r, col, sr * itr.value());
            }
      }
      SpMat jw(wrow, n);
      jw.setFromTriplets(tw.begin(), tw.end());

      const double phi0 = merit(f, c_eq, c_ineq);
      bool accepted = false;
      VectorXd zt, c_eq_t(n_eq), c_ineq_t(n_ineq);
      double ft = 0.0;

      for (int damp = 0; damp < 12 && !accepted; ++damp) {
        std::vector<Eigen::Triplet<double>> th;
        th.reserve(static_cast<size_t>(hess_f.nonZeros() + n));
        for (int col = 0; col < hess_f.outerSize(); ++col)
          if (!active[static_cast<size_t>(col)])
            for (SpMat::InnerIterator itr(hess_f, col); itr; ++itr)
              if (!active[static_cast<size_t>(itr.row())])
                th.emplace_back(static_cast<int>(itr.row()), col, itr.value());
        for (int i = 0; i < n; ++i)
          th.emplace_back(i, i, active[static_cast<size_t>(i)] ? 1.0 : nu);
        SpMat h(n, n);
        h.setFromTriplets(th.begin(), th.end());
        h += SpMat(jw.transpose() * jw);

        Eigen::SimplicialLLT<SpMat> llt(h);
        if (llt.info() != Eigen::Success) {
          nu = std::max(nu * 10.0, 1e-8);
          continue;
        }
        VectorXd rhs = -g_phi;
        for (int i = 0; i < n; ++i)
          if (active[static_cast<size_t>(i)]) rhs(i) = 0.0;
        const VectorXd d = llt.solve(rhs);
        if (!d.allFinite()) {
          nu = std::max(nu * 10.0, 1e-8);
          continue;
        }

        double alpha = 1.0;
        for (int ls = 0; ls < cfg.max_linesearch; ++ls) {
          zt = project(z + alpha * d);
          const VectorXd step = zt - z;
          const double step_norm = step.cwiseAbs().maxCoeff();
          if (step_norm < 1e-16) break;
          if (nlp.eval(zt, ft, c_eq_t, c_ineq_t)) {
            const double phit = merit(ft, c_eq_t, c_ineq_t);
            if (phit <= phi0 + cfg.armijo_c1 * g_phi.dot(step)) {
              accepted = true;
              if (log.is_open())
                log << total_iters << ',' << ft << ','
                    << violation_norm(c_eq_t, c_ineq_t) << ',' << alpha << ','
                    << phit << ',' << pgn << ',' << rho << '\n';
              break;
            }
          }
          alpha *= cfg.backtrack;
        }
        if (!accepted) nu = std::max(nu * 20.0, 1e-8);
      }

      if (!accepted) {
        stalled = true;
        break;
      }
      z = zt;
      f = ft;
      c_eq = c_eq_t;
      c_ineq = c_ineq_t;
      update_best(z, f, c_eq, c_ineq);
      nu = std::max(cfg.reg_floor, nu * 0.25);
      ++total_iters;
      ++inner_steps;
    }

    const double v = violation_norm(c_eq, c_ineq);
    if (v <= cfg.feas_tol && pgn <= cfg.opt_tol) {
      lambda += rho * c_eq;
      mu = (mu + rho * c_ineq).cwiseMax(0.0);
      converged = true;
      break;
    }
    if (iteration_limit) break;

    if (v <= std::max(eta, cfg.feas_tol)) {
      lambda += rho * c_eq;
      mu = (mu + rho * c_ineq).cwiseMax(0.0);
      eta = std::max(cfg.feas_tol, 0.2 * eta);
      omega = std::max(0.3 * cfg.opt_tol, 0.2 * omega);
    } else {
      rho = std::min(rho * cfg.rho_growth, cfg.rho_max);
    }

    if (stalled || inner_steps == 0) {
      if (++idle_outers >= 3) break;
    } else {
      idle_outers = 0;
    }
  }

  SolveResult out;
  out.iterations = total_iters;
  out.kkt_residual = pgn;
  if (converged) {
    out.status = SolveStatus::kOptimal;
  } else if (iteration_limit) {
    out.status = SolveStatus::kIterationLimit;
  } else if (best.feasible) {
    out.status = SolveStatus::kFeasibleStalled;
  } else {
    out.status = SolveStatus::kInfeasible;
  }
  if (best.feasible) {
    out.z = best.z;
    out.objective = best.objective;
    out.constraint_violation = best.constraint_violation;
    out.feasible = true;
  } else {
    out.z = z;
    out.objective = f;
    out.constraint_violation = violation_norm(c_eq, c_ineq);
    out.feasible = false;
  }
  return out;
}

std::string InitStrategy::name() const {
  switch (kind) {
    case Kind::kZeros: return "zeros";
    case Kind::kStraightLine: return "straight_line";
    case Kind::kRandom: return "random(" + std::to_string(seed) + ")";
  }
  return "?";
}

std::vector<InitStrategy> standard_strategies(std::uint64_t seed) {
  std::vector<InitStrategy> out;
  out.push_back({InitStrategy::Kind::kZeros, 0});
  out.push_back({InitStrategy::Kind::kStraightLine, 0});
  for (std::uint64_t i = 0; i < 3; ++i)
    out.push_back({InitStrategy::Kind::kRandom, derive_seed(seed, 1000 + i)});
  return out;
}

Eigen::VectorXd make_initial_point(const TranscribedNlp& nlp, const InitStrategy& strategy) {
  const int n = nlp.num_vars();
  VectorXd z = VectorXd::Zero(n);
  const int nq = nlp.dim_x() / 2;

  switch (strategy.kind) {
    case InitStrategy::Kind::kZeros:
      break;
    case InitStrategy::Kind::kStraightLine: {
      // Straight line in state space between the initial state and the
      // target's final torso state, tail coordinates zero.
      const FourierTarget* target = nlp.target();
      if (target != nullptr) {
        Eigen::Vector3d thf, thdf;
        target->eval(nlp.grid().tf, thf, thdf);
        const int N = nlp.grid().n_intervals;
        for (int k = 0; k <= N; ++k) {
          const double c = static_cast<double>(k) / N;
          for (int a = 0; a < 3; ++a) {
            z(nlp.x_index(k) + a) = c * thf(a);
            z(nlp.x_index(k) + nq + a) = c * thdf(a);
          }
        }
      }
      break;
    }
    case InitStrategy::Kind::kRandom: {
      Rng rng(strategy.seed);
      const ModelSpec* model = nlp.model();
      if (model != nullptr) {
        const JointLimits& lim = model->limits;
        const int N = nlp.grid().n_intervals;
        for (int k = 0; k <= N; ++k) {
          for (int a = 0; a < 3; ++a) {
            z(nlp.x_index(k) + a) =
                rng.uniform(-1.0, 1.0) * std::min(lim.torso_angle_rad, kPi / 3.0);
            z(nlp.x_index(k) + nq + a) = rng.uniform(-0.5, 0.5) * lim.torso_vel_rad_s;
          }
          for (int j = 3; j < nq; ++j) {
            z(nlp.x_index(k) + j) = rng.uniform(-1.0, 1.0) * lim.rom_rad;
            z(nlp.x_index(k) + nq + j) = rng.uniform(-0.5, 0.5) * lim.vel_rad_s;
          }
        }
        for (int s = 0; s < nlp.num_samples(); ++s)
          for (int j = 0; j < nlp.dim_u(); ++j)
            z(nlp.u_index(s) + j) = rng.uniform(-1.0, 1.0) * lim.torque_nm;
      } else {
        for (int i = 0; i < n; ++i) z(i) = rng.uniform(-1.0, 1.0);
      }
      break;
    }
  }

  // Uniform vertebral lengths as the initial guess in variable mode.
  if (nlp.num_lengths() > 0 && nlp.model() != nullptr)
    z.segment(nlp.length_index(), nlp.num_lengths())
        .setConstant(nlp.model()->total_tail_length() / nlp.num_lengths());

  // Clip to the variable bounds (this also applies the x0 pin).
  return z.cwiseMax(nlp.lower_bounds()).cwiseMin(nlp.upper_bounds());
}

std::vector<Eigen::VectorXd> init_strategies(const TranscribedNlp& nlp, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  for (const InitStrategy& s : standard_strategies(seed))
    out.push_back(make_initial_point(nlp, s));
  return out;
}

MultistartSolution multistart_solve(const TranscribedNlp& nlp, std::uint64_t seed,
                                    const SolverConfig& config,
                                    const Eigen::VectorXd* warm_start) {
  MultistartSolution out;
  std::vector<std::pair<std::string, VectorXd>> starts;
  for (const InitStrategy& s : standard_strategies(seed))
    starts.emplace_back(s.name(), make_initial_point(nlp, s));
  if (warm_start != nullptr)
    starts.emplace_back("warm",
                        warm_start->cwiseMax(nlp.lower_bounds()).cwiseMin(nlp.upper_bounds()));

  int total_iterations = 0;
  SolveResult best;
  best.feasible = false;
  best.objective = std::numeric_limits<double>::infinity();
  SolveStatus best_status = SolveStatus::kInfeasible;

  for (size_t i = 0; i < starts.size(); ++i) {
    StartOutcome oc;
    oc.strategy = starts[i].first;
    try {
      const SolveResult r = solve(nlp, starts[i].second, config);
      oc.status = r.status;
      oc.objective = r.objective;
      oc.violation = r.constraint_violation;
      oc.feasible = r.feasible;
      oc.iterations = r.iterations;
      total_iterations += r.iterations;
      if (r.feasible && r.objective < best.objective) {
        best = r;
        best_status = r.status;
        out.best_index = static_cast<int>(i);
      }
    } catch (const Error& e) {
      oc.error = e.what();
    }
    out.outcomes.push_back(oc);
  }

  if (!best.feasible) {
    std::ostringstream ss;
    ss << "multistart: no start produced a feasible solution;";
    for (const auto& oc : out.outcomes) {
      ss << " [" << oc.strategy << ": "
         << (oc.error.empty() ? to_string(oc.status) : oc.error)
         << ", viol = " << oc.violation << "]";
    }
    throw Error(ss.str());
  }

  out.solution =
      nlp.make_solution(best.z, best_status, total_iterations, best.constraint_violation);
  return out;
}

}  // namespace tailopt
