#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "tailopt/rng.hpp"
#include "tailopt/simulate.hpp"
#include "tailopt/transcription.hpp"

using namespace tailopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

FourierTarget sinusoid_target() {
  FourierTarget t;
  t.omega[0] = kPi;
  t.omega[1] = kPi;
  t.omega[2] = kPi;
  t.b[0][0] = deg_to_rad(20.0);
  return t;
}

MatrixXd dense(const Eigen::SparseMatrix<double>& s) { return MatrixXd(s); }

}  // namespace

TEST_CASE("grid times are exact at the endpoints") {
  const Grid g = Grid::paper();
  CHECK(g.n_intervals == 125);
  CHECK(g.dt() == doctest::Approx(0.004).epsilon(1e-12));
  CHECK(g.knot_time(0) == 0.0);
  CHECK(g.knot_time(125) == 0.5);
  CHECK(g.sample_time(250) == 0.5);

  const Grid c = Grid::from_step(0.5, 0.008);
  CHECK(c.n_intervals == 63);
  CHECK(c.knot_time(c.n_intervals) == 0.5);
}

TEST_CASE("decision dimensions: 1-link uniform on the paper grid") {
  const ModelSpec m = build_uniform_model(1);
  const TranscribedNlp nlp = build_nlp(m, sinusoid_target(), Grid::paper(), Mode::kUniform);
  // states 126 x 10 = 1260, controls 251 x 2 = 502
  CHECK(nlp.num_vars() == 1762);
  CHECK(nlp.num_eq() == 125 * 10);
  CHECK(nlp.dim_x() == 10);
  CHECK(nlp.dim_u() == 2);
  CHECK(nlp.num_lengths() == 0);

  // x0 is pinned to rest through its bounds.
  for (int i = 0; i < 10; ++i) {
    CHECK(nlp.lower_bounds()(i) == 0.0);
    CHECK(nlp.upper_bounds()(i) == 0.0);
  }
}

TEST_CASE("variable mode adds length variables, one equality, and lower-bound rows") {
  const ModelSpec m = build_uniform_model(3);
  const FourierTarget t = sinusoid_target();
  const Grid g = Grid::paper();
  const TranscribedNlp uni = build_nlp(m, t, g, Mode::kUniform);
  const TranscribedNlp var = build_nlp(m, t, g, Mode::kVariable);
  CHECK(var.num_vars() == uni.num_vars() + 3);
  CHECK(var.num_eq() == uni.num_eq() + 1);
  CHECK(var.num_ineq() == uni.num_ineq() + 3);

  const ModelSpec m5 = build_uniform_model(5);
  CHECK_THROWS_AS(build_nlp(m5, t, g, Mode::kVariable), Error);
}

TEST_CASE("defects vanish on analytically integrable surrogates") {
  const Grid g{0.0, 0.5, 10};
  const int nx = 2, nu = 2;

  // xdot = u with u constant: the exact profile is linear in t.
  const DynamicsFn dyn = [](const VectorXd&, const VectorXd& u, const VectorXd&,
                            bool want_derivs, PointDynamics& out) {
    out.f = u;
    if (want_derivs) {
      out.df_dx = MatrixXd::Zero(2, 2);
      out.df_du = MatrixXd::Identity(2, 2);
    }
    return true;
  };
  const Eigen::Vector2d x0(0.3, -0.2);
  const TranscribedNlp nlp(nx, nu, g, dyn, x0);

  const Eigen::Vector2d c(1.5, -0.7);
  MatrixXd xs(g.n_intervals + 1, nx), us(2 * g.n_intervals + 1, nu);
  for (int k = 0; k <= g.n_intervals; ++k)
    xs.row(k) = (x0 + g.knot_time(k) * c).transpose();
  for (int s = 0; s <= 2 * g.n_intervals; ++s) us.row(s) = c.transpose();
  const VectorXd z = nlp.pack(xs, us, VectorXd());

  double f;
  VectorXd c_eq, c_ineq;
  REQUIRE(nlp.eval(z, f, c_eq, c_ineq));
  CHECK(c_eq.cwiseAbs().maxCoeff() <= 1e-12);

  // xdot = u with u linear in t: the exact profile is quadratic.
  const Eigen::Vector2d a(0.4, 1.1), b(-2.0, 0.9);
  for (int k = 0; k <= g.n_intervals; ++k) {
    const double t = g.knot_time(k);
    xs.row(k) = (x0 + a * t + 0.5 * b * t * t).transpose();
  }
  for (int s = 0; s <= 2 * g.n_intervals; ++s) {
    const double t = g.sample_time(s);
    us.row(s) = (a + b * t).transpose();
  }
  const VectorXd z2 = nlp.pack(xs, us, VectorXd());
  REQUIRE(nlp.eval(z2, f, c_eq, c_ineq));
  CHECK(c_eq.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("objective matches the closed-form 100 deg^2 s example") {
  const ModelSpec m = build_uniform_model(1);
  const TranscribedNlp nlp = build_nlp(m, sinusoid_target(), Grid::paper(), Mode::kUniform);
  const VectorXd z = VectorXd::Zero(nlp.num_vars());

  // integral of (20 deg * sin(pi t))^2 over [0, 0.5] = 100 deg^2 s.
  const double closed_form = 100.0 * (kPi / 180.0) * (kPi / 180.0);
  CHECK(std::abs(nlp.eval_objective(z) - closed_form) < 1e-10);

  // Exact target following (zero target, zero states) has zero cost.
  FourierTarget zero;
  zero.omega[0] = zero.omega[1] = zero.omega[2] = kPi;
  const TranscribedNlp nlp0 = build_nlp(m, zero, Grid::paper(), Mode::kUniform);
  CHECK(nlp0.eval_objective(z) == 0.0);
}

TEST_CASE("gradients and jacobians match finite differences") {
  Rng rng(61);
  const Grid g{0.0, 0.5, 4};
  const FourierTarget target = sinusoid_target();

  for (Mode mode : {Mode::kUniform, Mode::kVariable}) {
    const ModelSpec m = build_uniform_model(2);
    const TranscribedNlp nlp = build_nlp(m, target, g, mode);
    const int n = nlp.num_vars();

    VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = 0.3 * rng.uniform(-1.0, 1.0);
    if (mode == Mode::kVariable) {
      z(nlp.length_index()) = 0.6;
      z(nlp.length_index() + 1) = 0.9;
    }

    double f;
    VectorXd grad(n), c_eq, c_ineq;
    Eigen::SparseMatrix<double> je, ji;
    REQUIRE(nlp.eval_derivs(z, f, grad, c_eq, c_ineq, je, ji));
    const MatrixXd JE = dense(je), JI = dense(ji);

    const double eps = 1e-6;
    double fp, fm;
    VectorXd ce_p, ci_p, ce_m, ci_m;
    for (int j = 0; j < n; ++j) {
      VectorXd zp = z, zm = z;
      zp(j) += eps;
      zm(j) -= eps;
      REQUIRE(nlp.eval(zp, fp, ce_p, ci_p));
      REQUIRE(nlp.eval(zm, fm, ce_m, ci_m));

      CHECK(std::abs(grad(j) - (fp - fm) / (2.0 * eps)) < 1e-6);
      const VectorXd fd_e = (ce_p - ce_m) / (2.0 * eps);
      const VectorXd fd_i = (ci_p - ci_m) / (2.0 * eps);
      CHECK((JE.col(j) - fd_e).cwiseAbs().maxCoeff() /
                (1.0 + fd_e.cwiseAbs().maxCoeff()) <
            1e-4);
      CHECK((JI.col(j) - fd_i).cwiseAbs().maxCoeff() /
                (1.0 + fd_i.cwiseAbs().maxCoeff()) <
            1e-4);
    }

    // Quadratic objective: gradient differences reproduce the Hessian action.
    Eigen::SparseMatrix<double> h;
    nlp.objective_hessian(z, h);
    VectorXd z2(n);
    for (int i = 0; i < n; ++i) z2(i) = 0.3 * rng.uniform(-1.0, 1.0);
    VectorXd grad2(n);
    REQUIRE(nlp.eval_derivs(z2, f, grad2, c_eq, c_ineq, je, ji));
    const VectorXd lhs = grad2 - grad;
    const VectorXd rhs = h * (z2 - z);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("equal fixed lengths reduce the variable constraint set to the uniform one") {
  Rng rng(71);
  const Grid g{0.0, 0.5, 5};
  const ModelSpec m = build_uniform_model(3);
  const FourierTarget target = sinusoid_target();
  const TranscribedNlp uni = build_nlp(m, target, g, Mode::kUniform);
  const TranscribedNlp var = build_nlp(m, target, g, Mode::kVariable);

  VectorXd zu(uni.num_vars());
  for (int i = 0; i < zu.size(); ++i) zu(i) = 0.2 * rng.uniform(-1.0, 1.0);
  MatrixXd xs, us;
  VectorXd lengths_unused;
  uni.unpack(zu, xs, us, lengths_unused);
  const VectorXd lu = Eigen::Vector3d::Constant(0.5);
  const VectorXd zv = var.pack(xs, us, lu);

  double fu, fv;
  VectorXd ce_u, ci_u, ce_v, ci_v;
  REQUIRE(uni.eval(zu, fu, ce_u, ci_u));
  REQUIRE(var.eval(zv, fv, ce_v, ci_v));

  CHECK(fu == fv);
  // Defect rows coincide; the variable problem appends the length-sum row.
  CHECK((ce_v.head(ce_u.size()) - ce_u).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(ce_v(ce_u.size())) < 1e-14);
  // Shared inequality rows coincide; the added rows are satisfied.
  CHECK((ci_v.head(ci_u.size()) - ci_u).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ci_v.tail(3).maxCoeff() <= -0.3 + 1e-14);  // 0.2 - 0.5
}

TEST_CASE("interpolation returns stored values at knots and midpoints") {
  const ModelSpec m = build_uniform_model(1);
  const Grid g{0.0, 0.5, 10};

  Solution sol;
  sol.grid = g;
  sol.n_q = m.n_q();
  sol.n_u = m.n_u();
  Rng rng(5);
  sol.knot_states.resize(g.n_intervals + 1, 2 * sol.n_q);
  sol.controls.resize(2 * g.n_intervals + 1, sol.n_u);
  for (int k = 0; k <= g.n_intervals; ++k)
    for (int i = 0; i < 2 * sol.n_q; ++i) sol.knot_states(k, i) = 0.2 * rng.uniform(-1, 1);
  for (int s = 0; s <= 2 * g.n_intervals; ++s)
    for (int i = 0; i < sol.n_u; ++i) sol.controls(s, i) = rng.uniform(-5, 5);

  for (int k = 0; k <= g.n_intervals; ++k) {
    const VectorXd u = interpolate_control(sol, g.knot_time(k));
    CHECK((u - sol.controls.row(2 * k).transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  for (int k = 0; k < g.n_intervals; ++k) {
    const VectorXd u = interpolate_control(sol, g.mid_time(k));
    CHECK((u - sol.controls.row(2 * k + 1).transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  VectorXd x, u;
  interpolate_state_control(sol, m, g.knot_time(3), x, u);
  CHECK((x - sol.knot_states.row(3).transpose()).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(interpolate_control(sol, -0.01), Error);
  CHECK_THROWS_AS(interpolate_control(sol, 0.51), Error);
}

TEST_CASE("quadratic control segment integrates with Simpson weights") {
  // For a quadratic through (0,u0), (1/2,um), (1,u1), the exact integral over
  // the unit interval is (u0 + 4 um + u1)/6.
  Solution sol;
  sol.grid = Grid{0.0, 0.5, 1};
  sol.n_q = 1;
  sol.n_u = 1;
  sol.knot_states.setZero(2, 2);
  sol.controls.resize(3, 1);
  sol.controls << 1.7, -0.3, 2.2;

  const int steps = 20000;
  double integral = 0.0;
  const double dt = sol.grid.dt();
  for (int i = 0; i < steps; ++i) {
    const double t = dt * (i + 0.5) / steps;
    integral += interpolate_control(sol, t)(0) * (dt / steps);
  }
  const double simpson = dt / 6.0 * (1.7 + 4.0 * -0.3 + 2.2);
  CHECK(integral == doctest::Approx(simpson).epsilon(1e-6));
}

TEST_CASE("objective quadrature agrees with a 10x finer reference on the interpolant") {
  const ModelSpec m = build_uniform_model(2);
  const FourierTarget target = sinusoid_target();
  const Grid g{0.0, 0.5, 25};

  // Smooth, dynamically consistent trajectory: roll out a bounded sinusoidal
  // control and sample it on the grid.
  Solution sol;
  sol.grid = g;
  sol.n_q = m.n_q();
  sol.n_u = m.n_u();
  sol.controls.resize(2 * g.n_intervals + 1, m.n_u());
  for (int s = 0; s <= 2 * g.n_intervals; ++s) {
    const double t = g.sample_time(s);
    for (int j = 0; j < m.n_u(); ++j)
      sol.controls(s, j) = 2.0 * std::sin(2.0 * kPi * t + 0.7 * j);
  }
  VectorXd times(g.n_intervals + 1);
  for (int k = 0; k <= g.n_intervals; ++k) times(k) = g.knot_time(k);
  const ControlFn ctrl = [&](double t) { return interpolate_control(sol, t); };
  const RolloutResult rr =
      rollout(m, ctrl, VectorXd::Zero(2 * m.n_q()), g.tf, times);
  sol.knot_states = rr.states;

  const double objective = tracking_error_quadrature(sol.knot_states, g, target, m.n_q());

  // Reference: composite Simpson on a 10x finer grid over the cubic Hermite
  // interpolant of the same trajectory.
  double ref = 0.0;
  const int fine = 10 * g.n_intervals;
  const double h = (g.tf - g.t0) / fine;
  Eigen::Vector3d th, thd;
  VectorXd x, u;
  for (int i = 0; i < fine; ++i) {
    double e[3];
    for (int j = 0; j < 3; ++j) {
      const double t = std::min(g.t0 + h * (i + 0.5 * j), g.tf);
      interpolate_state_control(sol, m, t, x, u);
      target.eval(t, th, thd);
      e[j] = (x.head(3) - th).squaredNorm();
    }
    ref += h / 6.0 * (e[0] + 4.0 * e[1] + e[2]);
  }
  CHECK(std::abs(objective - ref) <= 0.01 * ref);
}

TEST_CASE("solution CSV round trip") {
  const ModelSpec m = build_uniform_model(2);
  const Grid g{0.0, 0.5, 8};
  Solution sol;
  sol.grid = g;
  sol.n_q = m.n_q();
  sol.n_u = m.n_u();
  Rng rng(3);
  sol.knot_states.resize(g.n_intervals + 1, 2 * sol.n_q);
  sol.controls.resize(2 * g.n_intervals + 1, sol.n_u);
  for (int k = 0; k <= g.n_intervals; ++k)
    for (int i = 0; i < 2 * sol.n_q; ++i) sol.knot_states(k, i) = 0.1 * rng.uniform(-1, 1);
  for (int s = 0; s <= 2 * g.n_intervals; ++s)
    for (int i = 0; i < sol.n_u; ++i) sol.controls(s, i) = rng.uniform(-5, 5);
  sol.lengths = Eigen::Vector2d(0.6, 0.9);
  sol.objective = 0.1234567890123;
  sol.status = SolveStatus::kOptimal;
  sol.iterations = 77;
  sol.constraint_violation = 3.2e-9;

  const std::string path = "test_solution_roundtrip.csv";
  write_solution_csv(sol, m, path);
  const Solution back = read_solution_csv(path);

  CHECK(back.grid.n_intervals == g.n_intervals);
  CHECK(back.n_q == sol.n_q);
  CHECK(back.n_u == sol.n_u);
  CHECK((back.knot_states - sol.knot_states).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.controls - sol.controls).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.lengths - sol.lengths).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.objective == sol.objective);
  CHECK(back.status == sol.status);
  CHECK(back.iterations == sol.iterations);
  std::remove(path.c_str());
}
