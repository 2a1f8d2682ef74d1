#include "tailopt/dynamics.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tailopt/chain.hpp"
#include "tailopt/dual.hpp"

namespace tailopt {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

void check_dims(const ModelSpec& model, const Eigen::VectorXd& q,
                const Eigen::VectorXd& qdot) {
  if (q.size() != model.n_q() || qdot.size() != model.n_q())
    throw Error("dynamics: state dimension mismatch (expected n_q = " +
                std::to_string(model.n_q()) + ")");
}

Eigen::VectorXd full_tau(const ModelSpec& model, const Eigen::VectorXd& u) {
  if (u.size() != model.n_u())
    throw Error("dynamics: input dimension mismatch (expected n_u = " +
                std::to_string(model.n_u()) + ")");
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(model.n_q());
  tau.tail(model.n_u()) = u;
  return tau;
}

/// Composite-rigid-body mass matrix in world coordinates.
Eigen::MatrixXd crba(const Chain& chain, const Eigen::VectorXd& q) {
  const int nj = static_cast<int>(chain.joints.size());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(chain.n_q);
  const KinState<double> k = chain_kinematics(chain, q, zero, zero);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(chain.n_q, chain.n_q);

  // Running composite of bodies at joints >= i.
  double cm = 0.0;
  Eigen::Vector3d ccom = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cI = Eigen::Matrix3d::Zero();  // about composite COM, world axes

  for (int i = nj - 1; i >= 0; --i) {
    const auto& j = chain.joints[static_cast<size_t>(i)];
    if (j.has_body) {
      const double m = j.body_mass;
      const Eigen::Vector3d c = k.p[static_cast<size_t>(i)] +
                                k.R[static_cast<size_t>(i)] * j.body_com;
      const Eigen::Matrix3d Iw = k.R[static_cast<size_t>(i)] * j.body_inertia *
                                 k.R[static_cast<size_t>(i)].transpose();
      const double mt = cm + m;
      const Eigen::Vector3d cnew = (cm * ccom + m * c) / mt;
      const Eigen::Vector3d d1 = ccom - cnew;
      const Eigen::Vector3d d2 = c - cnew;
      cI = cI + cm * (d1.squaredNorm() * Eigen::Matrix3d::Identity() - d1 * d1.transpose()) +
           Iw + m * (d2.squaredNorm() * Eigen::Matrix3d::Identity() - d2 * d2.transpose());
      ccom = cnew;
      cm = mt;
    }
    if (cm == 0.0) continue;

    // Unit acceleration of joint i: rotation s_i about an axis through p_i.
    const Eigen::Vector3d& s = k.s[static_cast<size_t>(i)];
    const Eigen::Vector3d r = ccom - k.p[static_cast<size_t>(i)];
    const Eigen::Vector3d F = cm * s.cross(r);
    Eigen::Vector3d N = cI * s + r.cross(F);  // moment about p_i
    Eigen::Vector3d at = k.p[static_cast<size_t>(i)];
    const int ci = chain.joints[static_cast<size_t>(i)].coord;
    M(ci, ci) = s.dot(N);
    for (int jj = i - 1; jj >= 0; --jj) {
      N = N + (at - k.p[static_cast<size_t>(jj)]).cross(F);
      at = k.p[static_cast<size_t>(jj)];
      const int cj = chain.joints[static_cast<size_t>(jj)].coord;
      M(cj, ci) = k.s[static_cast<size_t>(jj)].dot(N);
      M(ci, cj) = M(cj, ci);
    }
  }
  return M;
}

Eigen::LDLT<Eigen::MatrixXd> factorize_checked(const Eigen::MatrixXd& M) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 0.0) ||
      d.minCoeff() < 1e-12 * dmax)
    throw SingularConfigError(
        "mass matrix is singular (configuration at or near a representation "
        "singularity, torso pitch near +-90 deg)");
  return ldlt;
}

Mat6 spatial_inertia(double mass, const Eigen::Vector3d& com,
                     const Eigen::Matrix3d& I_com) {
  const Eigen::Matrix3d cx = skew(com);
  Mat6 I = Mat6::Zero();
  I.topLeftCorner<3, 3>() = I_com + mass * cx * cx.transpose();
  I.topRightCorner<3, 3>() = mass * cx;
  I.bottomLeftCorner<3, 3>() = mass * cx.transpose();
  I.bottomRightCorner<3, 3>() = mass * Eigen::Matrix3d::Identity();
  return I;
}

// Motion transform child <- parent for a child frame at translation d
// (parent coords) rotated by E (parent-to-child rotation).
Mat6 motion_transform(const Eigen::Matrix3d& E, const Eigen::Vector3d& d) {
  Mat6 X = Mat6::Zero();
  X.topLeftCorner<3, 3>() = E;
  X.bottomLeftCorner<3, 3>() = -E * skew(d);
  X.bottomRightCorner<3, 3>() = E;
  return X;
}

Vec6 crm(const Vec6& v, const Vec6& m) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(m.head<3>());
  out.tail<3>() = v.head<3>().cross(m.tail<3>()) + v.tail<3>().cross(m.head<3>());
  return out;
}

Vec6 crf(const Vec6& v, const Vec6& f) {
  Vec6 out;
  out.head<3>() = v.head<3>().cross(f.head<3>()) + v.tail<3>().cross(f.tail<3>());
  out.tail<3>() = v.head<3>().cross(f.tail<3>());
  return out;
}

/// Featherstone articulated-body algorithm in link coordinates.
Eigen::VectorXd aba(const Chain& chain, const Eigen::VectorXd& q,
                    const Eigen::VectorXd& qd, const Eigen::VectorXd& tau) {
  const int nj = static_cast<int>(chain.joints.size());
  std::vector<Mat6> X(static_cast<size_t>(nj));      // X_{i <- parent}
  std::vector<Vec6> S(static_cast<size_t>(nj));
  std::vector<Vec6> v(static_cast<size_t>(nj));
  std::vector<Vec6> c(static_cast<size_t>(nj));
  std::vector<Mat6> IA(static_cast<size_t>(nj));
  std::vector<Vec6> pA(static_cast<size_t>(nj));
  std::vector<Vec6> U(static_cast<size_t>(nj));
  std::vector<double> D(static_cast<size_t>(nj));
  std::vector<double> uu(static_cast<size_t>(nj));

  for (int i = 0; i < nj; ++i) {
    const auto& j = chain.joints[static_cast<size_t>(i)];
    const Eigen::Matrix3d E = axis_rotation(j.axis, q(j.coord)).transpose();
    X[static_cast<size_t>(i)] = motion_transform(E, j.offset);
    Vec6 s = Vec6::Zero();
    s(j.axis) = 1.0;
    S[static_cast<size_t>(i)] = s;

    const Vec6 vj = s * qd(j.coord);
    const Vec6 vp = (i == 0) ? Vec6::Zero() : v[static_cast<size_t>(i - 1)];
    v[static_cast<size_t>(i)] = X[static_cast<size_t>(i)] * vp + vj;
    c[static_cast<size_t>(i)] = crm(v[static_cast<size_t>(i)], vj);
    IA[static_cast<size_t>(i)] =
        j.has_body ? spatial_inertia(j.body_mass, j.body_com, j.body_inertia)
                   : Mat6::Zero();
    pA[static_cast<size_t>(i)] =
        crf(v[static_cast<size_t>(i)], IA[static_cast<size_t>(i)] * v[static_cast<size_t>(i)]);
  }

  for (int i = nj - 1; i >= 0; --i) {
    const auto& j = chain.joints[static_cast<size_t>(i)];
    const size_t si = static_cast<size_t>(i);
    U[si] = IA[si] * S[si];
    D[si] = S[si].dot(U[si]);
    if (!(D[si] > 0.0))
      throw Error("aba: vanishing articulated inertia about a joint axis");
    uu[si] = tau(j.coord) - S[si].dot(pA[si]);
    if (i > 0) {
      const Mat6 Ia = IA[si] - U[si] * (U[si] / D[si]).transpose();
      const Vec6 pa = pA[si] + Ia * c[si] + U[si] * (uu[si] / D[si]);
      IA[si - 1] += X[si].transpose() * Ia * X[si];
      pA[si - 1] += X[si].transpose() * pa;
    }
  }

  Eigen::VectorXd qdd = Eigen::VectorXd::Zero(chain.n_q);
  std::vector<Vec6> a(static_cast<size_t>(nj));
  for (int i = 0; i < nj; ++i) {
    const size_t si = static_cast<size_t>(i);
    const auto& j = chain.joints[si];
    const Vec6 ap = (i == 0) ? Vec6::Zero() : a[si - 1];
    const Vec6 at = X[si] * ap + c[si];
    qdd(j.coord) = (uu[si] - U[si].dot(at)) / D[si];
    a[si] = at + S[si] * qdd(j.coord);
  }
  return qdd;
}

}  // namespace

Eigen::MatrixXd mass_matrix(const ModelSpec& model, const Eigen::VectorXd& q) {
  if (q.size() != model.n_q()) throw Error("mass_matrix: dimension mismatch");
  return crba(make_chain(model), q);
}

Eigen::VectorXd bias_forces(const ModelSpec& model, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& qdot) {
  check_dims(model, q, qdot);
  const Chain chain = make_chain(model);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_q());
  return rnea(chain, q, qdot, zero);
}

DynTerms dynamics_terms(const ModelSpec& model, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& qdot) {
  check_dims(model, q, qdot);
  const Chain chain = make_chain(model);
  DynTerms t;
  t.M = crba(chain, q);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_q());
  t.h = rnea(chain, q, qdot, zero);
  return t;
}

Eigen::VectorXd forward_dynamics(const ModelSpec& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qdot, const Eigen::VectorXd& u) {
  check_dims(model, q, qdot);
  const Chain chain = make_chain(model);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_q());
  const Eigen::MatrixXd M = crba(chain, q);
  const Eigen::VectorXd h = rnea(chain, q, qdot, zero);
  const auto ldlt = factorize_checked(M);
  return ldlt.solve(full_tau(model, u) - h);
}

Eigen::VectorXd forward_dynamics_aba(const ModelSpec& model, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& qdot,
                                     const Eigen::VectorXd& u) {
  check_dims(model, q, qdot);
  return aba(make_chain(model), q, qdot, full_tau(model, u));
}

Eigen::VectorXd inverse_dynamics(const ModelSpec& model, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& qddot) {
  check_dims(model, q, qdot);
  if (qddot.size() != model.n_q()) throw Error("inverse_dynamics: dimension mismatch");
  return rnea(make_chain(model), q, qdot, qddot);
}

TipState tip_state(const ModelSpec& model, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& qdot) {
  check_dims(model, q, qdot);
  const Chain chain = make_chain(model);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_q());
  const KinState<double> k = chain_kinematics(chain, q, qdot, zero);
  const size_t last = chain.joints.size() - 1;
  TipState t;
  const Eigen::Vector3d r = k.R[last] * chain.tip_offset;
  t.position = k.p[last] + r;
  t.velocity = k.v[last] + k.w[last].cross(r);
  return t;
}

Eigen::Vector3d angular_momentum_about_pivot(const ModelSpec& model,
                                             const Eigen::VectorXd& q,
                                             const Eigen::VectorXd& qdot) {
  check_dims(model, q, qdot);
  return angular_momentum(make_chain(model), q, qdot);
}

double kinetic_energy(const ModelSpec& model, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qdot) {
  check_dims(model, q, qdot);
  return kinetic_energy(make_chain(model), q, qdot);
}

namespace {

/// d(tau_id)/d(seeded direction) via one dual-number RNEA pass.
void rnea_directional(const ChainT<Dual>& chain, VecXT<Dual>& q, VecXT<Dual>& qd,
                      const VecXT<Dual>& qdd, int seed_coord, bool seed_velocity,
                      Eigen::VectorXd& out_col) {
  Dual& slot = seed_velocity ? qd(seed_coord) : q(seed_coord);
  slot.d = 1.0;
  const VecXT<Dual> tau = rnea(chain, q, qd, qdd);
  slot.d = 0.0;
  for (int r = 0; r < tau.size(); ++r) out_col(r) = tau(r).d;
}

}  // namespace

void forward_dynamics_full(const ModelSpec& model, const Eigen::VectorXd& q,
                           const Eigen::VectorXd& qdot, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& lengths, Eigen::VectorXd& qdd,
                           DynPartials& partials, Eigen::MatrixXd* dlengths) {
  check_dims(model, q, qdot);
  const int nq = model.n_q();
  const int nu = model.n_u();
  const bool varlen = lengths.size() > 0;
  if (varlen && lengths.size() != model.n_links)
    throw Error("dynamics: lengths dimension mismatch");

  std::vector<double> len(model.link_lengths);
  if (varlen)
    for (int i = 0; i < model.n_links; ++i) len[static_cast<size_t>(i)] = lengths(i);
  const Chain chain = make_chain<double>(model, len);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(nq);
  const Eigen::MatrixXd M = crba(chain, q);
  const Eigen::VectorXd h = rnea(chain, q, qdot, zero);
  const auto ldlt = factorize_checked(M);
  qdd = ldlt.solve(full_tau(model, u) - h);

  // d(qdd)/du = M^{-1} restricted to the actuated columns.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nq, nu);
  rhs.bottomRows(nu).setIdentity();
  partials.du = ldlt.solve(rhs);

  // Differentiate the identity M(q) qdd + h(q, qd) = tau at fixed qdd:
  // d(qdd)/dx = -M^{-1} d(tau_id)/dx evaluated at (q, qd, qdd).
  const ChainT<Dual> dchain = chain_cast<Dual>(chain);
  VecXT<Dual> qD(nq), qdD(nq), qddD(nq);
  for (int i = 0; i < nq; ++i) {
    qD(i) = Dual(q(i));
    qdD(i) = Dual(qdot(i));
    qddD(i) = Dual(qdd(i));
  }
  Eigen::MatrixXd dtau_dq(nq, nq), dtau_dqd(nq, nq);
  Eigen::VectorXd col(nq);
  for (int j = 0; j < nq; ++j) {
    rnea_directional(dchain, qD, qdD, qddD, j, false, col);
    dtau_dq.col(j) = col;
    rnea_directional(dchain, qD, qdD, qddD, j, true, col);
    dtau_dqd.col(j) = col;
  }
  partials.dq = -ldlt.solve(dtau_dq);
  partials.dqd = -ldlt.solve(dtau_dqd);

  if (dlengths != nullptr) {
    const int nl = model.n_links;
    dlengths->resize(nq, nl);
    std::vector<Dual> lenD(len.begin(), len.end());
    for (int j = 0; j < nl; ++j) {
      lenD[static_cast<size_t>(j)].d = 1.0;
      const ChainT<Dual> lc = make_chain<Dual>(model, lenD);
      lenD[static_cast<size_t>(j)].d = 0.0;
      const VecXT<Dual> tau = rnea(lc, qD, qdD, qddD);
      for (int r = 0; r < nq; ++r) col(r) = tau(r).d;
      dlengths->col(j) = col;
    }
    *dlengths = -ldlt.solve(*dlengths);
  }
}

DynPartials dynamics_partials(const ModelSpec& model, const Eigen::VectorXd& q,
                              const Eigen::VectorXd& qdot, const Eigen::VectorXd& u) {
  Eigen::VectorXd qdd;
  DynPartials p;
  forward_dynamics_full(model, q, qdot, u, Eigen::VectorXd(), qdd, p, nullptr);
  return p;
}

Eigen::MatrixXd dynamics_partials_lengths(const ModelSpec& model,
                                          const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& qdot,
                                          const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& lengths) {
  Eigen::VectorXd qdd;
  DynPartials p;
  Eigen::MatrixXd dl;
  forward_dynamics_full(model, q, qdot, u, lengths, qdd, p, &dl);
  return dl;
}

Eigen::VectorXd forward_dynamics_lengths(const ModelSpec& model, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& qdot,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& lengths) {
  check_dims(model, q, qdot);
  if (lengths.size() != model.n_links) throw Error("dynamics: lengths dimension mismatch");
  std::vector<double> len(model.n_links);
  for (int i = 0; i < model.n_links; ++i) len[static_cast<size_t>(i)] = lengths(i);
  const Chain chain = make_chain<double>(model, len);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_q());
  const Eigen::MatrixXd M = crba(chain, q);
  const Eigen::VectorXd h = rnea(chain, q, qdot, zero);
  return factorize_checked(M).solve(full_tau(model, u) - h);
}

}  // namespace tailopt
