#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tailopt/common.hpp"
#include "tailopt/model.hpp"

namespace tailopt {

template <typename S>
using Vec3T = Eigen::Matrix<S, 3, 1>;
template <typename S>
using Mat3T = Eigen::Matrix<S, 3, 3>;
template <typename S>
using VecXT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// One revolute DOF of the serial chain, with an optional rigid body
/// attached to its outboard frame.
template <typename S>
struct ChainJoint {
  int axis = 0;                              // local rotation axis: 0=X, 1=Y, 2=Z
  Vec3T<S> offset = Vec3T<S>::Zero();        // joint origin in parent joint frame
  int coord = 0;                             // index into q
  bool actuated = false;
  bool has_body = false;
  S body_mass = S(0);
  Vec3T<S> body_com = Vec3T<S>::Zero();      // in joint frame
  Mat3T<S> body_inertia = Mat3T<S>::Zero();  // about body COM, joint frame axes
};

/// Serial kinematic chain: three unactuated torso DOF (yaw about Z, pitch
/// about Y, roll about X, composing the intrinsic Z-Y-X torso orientation),
/// then per tail link an actuated pitch (local X) and yaw (local Z) pair.
/// q stays in spec order (torso roll, pitch, yaw, then joint pitch/yaw
/// pairs); each chain joint carries its q index.
template <typename S>
struct ChainT {
  std::vector<ChainJoint<S>> joints;   // kinematic order, parent = index - 1
  int n_q = 0;
  int n_links = 0;
  Vec3T<S> tip_offset = Vec3T<S>::Zero();  // tail tip in last joint frame

  int torso_frame_joint() const { return 2; }
  int link_frame_joint(int link_1based) const { return 2 + 2 * link_1based; }
};

using Chain = ChainT<double>;

template <typename S>
Mat3T<S> axis_rotation(int axis, const S& angle) {
  using std::cos;
  using std::sin;
  const S c = cos(angle);
  const S s = sin(angle);
  Mat3T<S> r = Mat3T<S>::Identity();
  switch (axis) {
    case 0:
      r(1, 1) = c; r(1, 2) = -s;
      r(2, 1) = s; r(2, 2) = c;
      break;
    case 1:
      r(0, 0) = c; r(0, 2) = s;
      r(2, 0) = -s; r(2, 2) = c;
      break;
    default:
      r(0, 0) = c; r(0, 1) = -s;
      r(1, 0) = s; r(1, 1) = c;
      break;
  }
  return r;
}

/// Chain construction with externally supplied vertebral lengths, so the
/// whole geometry can be differentiated with respect to them.
template <typename S>
ChainT<S> make_chain(const ModelSpec& spec, const std::vector<S>& lengths) {
  if (static_cast<int>(lengths.size()) != spec.n_links)
    throw Error("make_chain: lengths size must equal n_links");

  ChainT<S> chain;
  chain.n_q = spec.n_q();
  chain.n_links = spec.n_links;
  chain.joints.reserve(static_cast<size_t>(3 + 2 * spec.n_links));

  // Torso ball joint as three revolute DOF at the torso center.
  ChainJoint<S> yaw;
  yaw.axis = 2;
  yaw.coord = 2;
  chain.joints.push_back(yaw);
  ChainJoint<S> pitch;
  pitch.axis = 1;
  pitch.coord = 1;
  chain.joints.push_back(pitch);
  ChainJoint<S> roll;
  roll.axis = 0;
  roll.coord = 0;
  roll.has_body = true;
  roll.body_mass = S(spec.torso_mass);
  roll.body_com = Vec3T<S>::Zero();
  {
    const double a = spec.torso_dims(0), b = spec.torso_dims(1), c = spec.torso_dims(2);
    const double k = spec.torso_mass / 12.0;
    Mat3T<S> I = Mat3T<S>::Zero();
    I(0, 0) = S(k * (b * b + c * c));
    I(1, 1) = S(k * (a * a + c * c));
    I(2, 2) = S(k * (a * a + b * b));
    roll.body_inertia = I;
  }
  chain.joints.push_back(roll);

  const double w = spec.cross_section(0);
  const double h = spec.cross_section(1);
  for (int i = 0; i < spec.n_links; ++i) {
    const S& len = lengths[static_cast<size_t>(i)];
    const S mass = S(spec.linear_density) * len;

    ChainJoint<S> jp;  // pitch about local X
    jp.axis = 0;
    jp.coord = 3 + 2 * i;
    jp.actuated = true;
    jp.offset = (i == 0) ? spec.attach_offset.template cast<S>()
                         : Vec3T<S>(S(0), -lengths[static_cast<size_t>(i - 1)], S(0));
    chain.joints.push_back(jp);

    ChainJoint<S> jy;  // yaw about local Z
    jy.axis = 2;
    jy.coord = 4 + 2 * i;
    jy.actuated = true;
    jy.has_body = true;
    jy.body_mass = mass;
    jy.body_com = Vec3T<S>(S(0), S(-0.5) * len, S(0));
    {
      const S k = mass / S(12.0);
      Mat3T<S> I = Mat3T<S>::Zero();
      I(0, 0) = k * (len * len + S(h * h));
      I(1, 1) = k * S(w * w + h * h);
      I(2, 2) = k * (S(w * w) + len * len);
      jy.body_inertia = I;
    }
    chain.joints.push_back(jy);
  }
  chain.tip_offset = Vec3T<S>(S(0), -lengths.back(), S(0));
  return chain;
}

inline Chain make_chain(const ModelSpec& spec) {
  return make_chain<double>(spec, spec.link_lengths);
}

template <typename To, typename From>
ChainT<To> chain_cast(const ChainT<From>& in) {
  ChainT<To> out;
  out.n_q = in.n_q;
  out.n_links = in.n_links;
  out.tip_offset = in.tip_offset.template cast<To>();
  out.joints.reserve(in.joints.size());
  for (const auto& j : in.joints) {
    ChainJoint<To> k;
    k.axis = j.axis;
    k.offset = j.offset.template cast<To>();
    k.coord = j.coord;
    k.actuated = j.actuated;
    k.has_body = j.has_body;
    k.body_mass = To(j.body_mass);
    k.body_com = j.body_com.template cast<To>();
    k.body_inertia = j.body_inertia.template cast<To>();
    out.joints.push_back(k);
  }
  return out;
}

/// World-frame pose of every joint frame plus the tail tip.
template <typename S>
struct FkResult {
  std::vector<Mat3T<S>> R;   // per joint
  std::vector<Vec3T<S>> p;   // joint origins
  Vec3T<S> tip = Vec3T<S>::Zero();
};

template <typename S>
FkResult<S> forward_kinematics(const ChainT<S>& chain, const VecXT<S>& q) {
  const size_t n = chain.joints.size();
  FkResult<S> fk;
  fk.R.resize(n);
  fk.p.resize(n);
  Mat3T<S> R = Mat3T<S>::Identity();
  Vec3T<S> p = Vec3T<S>::Zero();
  for (size_t i = 0; i < n; ++i) {
    const auto& j = chain.joints[i];
    p = p + R * j.offset;
    R = R * axis_rotation(j.axis, q(j.coord));
    fk.R[i] = R;
    fk.p[i] = p;
  }
  fk.tip = fk.p.back() + fk.R.back() * chain.tip_offset;
  return fk;
}

/// Per-joint world-frame kinematic state used by the recursive algorithms.
template <typename S>
struct KinState {
  std::vector<Mat3T<S>> R;
  std::vector<Vec3T<S>> p;      // joint origin
  std::vector<Vec3T<S>> s;      // world joint axis
  std::vector<Vec3T<S>> w;      // angular velocity
  std::vector<Vec3T<S>> v;      // linear velocity of joint origin
  std::vector<Vec3T<S>> alpha;  // angular acceleration
  std::vector<Vec3T<S>> a;      // linear acceleration of joint origin
};

template <typename S>
KinState<S> chain_kinematics(const ChainT<S>& chain, const VecXT<S>& q,
                             const VecXT<S>& qd, const VecXT<S>& qdd) {
  const size_t n = chain.joints.size();
  KinState<S> k;
  k.R.resize(n); k.p.resize(n); k.s.resize(n);
  k.w.resize(n); k.v.resize(n); k.alpha.resize(n); k.a.resize(n);

  Mat3T<S> Rp = Mat3T<S>::Identity();
  Vec3T<S> pp = Vec3T<S>::Zero();
  Vec3T<S> wp = Vec3T<S>::Zero(), vp = Vec3T<S>::Zero();
  Vec3T<S> alphap = Vec3T<S>::Zero(), ap = Vec3T<S>::Zero();

  for (size_t i = 0; i < n; ++i) {
    const auto& j = chain.joints[i];
    const Vec3T<S> d = Rp * j.offset;  // world offset parent joint -> this joint
    Vec3T<S> axis = Vec3T<S>::Zero();
    axis(j.axis) = S(1);
    const Vec3T<S> s = Rp * axis;
    const S qi = q(j.coord), qdi = qd(j.coord), qddi = qdd(j.coord);

    k.p[i] = pp + d;
    k.R[i] = Rp * axis_rotation(j.axis, qi);
    k.s[i] = s;
    k.w[i] = wp + s * qdi;
    k.v[i] = vp + wp.cross(d);
    k.alpha[i] = alphap + s * qddi + wp.cross(s * qdi);
    k.a[i] = ap + alphap.cross(d) + wp.cross(wp.cross(d));

    Rp = k.R[i]; pp = k.p[i];
    wp = k.w[i]; vp = k.v[i];
    alphap = k.alpha[i]; ap = k.a[i];
  }
  return k;
}

/// Recursive Newton-Euler inverse dynamics with zero gravity:
/// returns tau such that M(q) qdd + h(q, qd) = tau.
template <typename S>
VecXT<S> rnea(const ChainT<S>& chain, const VecXT<S>& q, const VecXT<S>& qd,
              const VecXT<S>& qdd) {
  const size_t n = chain.joints.size();
  const KinState<S> k = chain_kinematics(chain, q, qd, qdd);

  std::vector<Vec3T<S>> f(n, Vec3T<S>::Zero());   // net force on subtree
  std::vector<Vec3T<S>> m(n, Vec3T<S>::Zero());   // net moment about joint origin
  for (size_t i = 0; i < n; ++i) {
    const auto& j = chain.joints[i];
    if (!j.has_body) continue;
    const Vec3T<S> r = k.R[i] * j.body_com;
    const Vec3T<S> ac = k.a[i] + k.alpha[i].cross(r) + k.w[i].cross(k.w[i].cross(r));
    const Mat3T<S> Iw = k.R[i] * j.body_inertia * k.R[i].transpose();
    const Vec3T<S> F = j.body_mass * ac;
    const Vec3T<S> N = Iw * k.alpha[i] + k.w[i].cross(Iw * k.w[i]);
    f[i] += F;
    m[i] += N + r.cross(F);
  }

  VecXT<S> tau = VecXT<S>::Zero(chain.n_q);
  for (size_t ii = n; ii-- > 0;) {
    tau(chain.joints[ii].coord) = k.s[ii].dot(m[ii]);
    if (ii > 0) {
      f[ii - 1] += f[ii];
      m[ii - 1] += m[ii] + (k.p[ii] - k.p[ii - 1]).cross(f[ii]);
    }
  }
  return tau;
}

template <typename S>
S kinetic_energy(const ChainT<S>& chain, const VecXT<S>& q, const VecXT<S>& qd) {
  const VecXT<S> zero = VecXT<S>::Zero(chain.n_q);
  const KinState<S> k = chain_kinematics(chain, q, qd, zero);
  S e = S(0);
  for (size_t i = 0; i < chain.joints.size(); ++i) {
    const auto& j = chain.joints[i];
    if (!j.has_body) continue;
    const Vec3T<S> r = k.R[i] * j.body_com;
    const Vec3T<S> vc = k.v[i] + k.w[i].cross(r);
    const Mat3T<S> Iw = k.R[i] * j.body_inertia * k.R[i].transpose();
    e += S(0.5) * j.body_mass * vc.dot(vc) + S(0.5) * k.w[i].dot(Iw * k.w[i]);
  }
  return e;
}

/// Total angular momentum of all bodies about the world origin (the torso
/// pivot point).
template <typename S>
Vec3T<S> angular_momentum(const ChainT<S>& chain, const VecXT<S>& q,
                          const VecXT<S>& qd) {
  const VecXT<S> zero = VecXT<S>::Zero(chain.n_q);
  const KinState<S> k = chain_kinematics(chain, q, qd, zero);
  Vec3T<S> L = Vec3T<S>::Zero();
  for (size_t i = 0; i < chain.joints.size(); ++i) {
    const auto& j = chain.joints[i];
    if (!j.has_body) continue;
    const Vec3T<S> c = k.p[i] + k.R[i] * j.body_com;
    const Vec3T<S> vc = k.v[i] + k.w[i].cross(k.R[i] * j.body_com);
    const Mat3T<S> Iw = k.R[i] * j.body_inertia * k.R[i].transpose();
    L += c.cross(j.body_mass * vc) + Iw * k.w[i];
  }
  return L;
}

}  // namespace tailopt
