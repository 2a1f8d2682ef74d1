#include <doctest.h>

#include <cmath>

#include "tailopt/collision.hpp"
#include "tailopt/model.hpp"
#include "tailopt/rng.hpp"

using namespace tailopt;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

VectorXd random_q(const ModelSpec& m, Rng& rng) {
  VectorXd q(m.n_q());
  q(0) = rng.uniform(-2.0, 2.0);
  q(1) = rng.uniform(-1.2, 1.2);
  q(2) = rng.uniform(-2.0, 2.0);
  for (int i = 3; i < m.n_q(); ++i) q(i) = rng.uniform(-1.0, 1.0) * m.limits.rom_rad;
  return q;
}

/// Deterministic surface sample of the torso cuboid: vertices, edge quarter
/// points, and a 5x5 interior grid per face (194 points).
std::vector<Vector3d> torso_surface_points(const Vector3d& dims) {
  const Vector3d h = 0.5 * dims;
  std::vector<Vector3d> pts;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) pts.emplace_back(sx * h.x(), sy * h.y(), sz * h.z());
  // Edges: interior quarter points along each axis-aligned edge.
  for (int axis = 0; axis < 3; ++axis)
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1})
        for (int kq = 1; kq <= 3; ++kq) {
          Vector3d p;
          const double f = -1.0 + 0.5 * kq;
          if (axis == 0) p = Vector3d(f * h.x(), s1 * h.y(), s2 * h.z());
          else if (axis == 1) p = Vector3d(s1 * h.x(), f * h.y(), s2 * h.z());
          else p = Vector3d(s1 * h.x(), s2 * h.y(), f * h.z());
          pts.push_back(p);
        }
  // Face interiors.
  for (int axis = 0; axis < 3; ++axis)
    for (int side : {-1, 1})
      for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) {
          const double fi = -1.0 + 2.0 * i / 6.0;
          const double fj = -1.0 + 2.0 * j / 6.0;
          Vector3d p;
          if (axis == 0) p = Vector3d(side * h.x(), fi * h.y(), fj * h.z());
          else if (axis == 1) p = Vector3d(fi * h.x(), side * h.y(), fj * h.z());
          else p = Vector3d(fi * h.x(), fj * h.y(), side * h.z());
          pts.push_back(p);
        }
  return pts;
}

}  // namespace

TEST_CASE("default layout pair counts") {
  const ModelSpec one = build_uniform_model(1);
  const SphereLayout l1 = default_layout(one);
  CHECK(l1.torso_spheres.size() == 3);
  CHECK(l1.tail_spheres.size() == 1);  // tip only; base sphere excluded
  CHECK(l1.n_pairs() == 3);
  CHECK(l1.tail_spheres[0].link_index == 1);
  CHECK(l1.tail_spheres[0].offset_along == doctest::Approx(1.5));

  const ModelSpec six = build_uniform_model(6);
  const SphereLayout l6 = default_layout(six);
  CHECK(l6.tail_spheres.size() == 6);  // 5 joints + tip
  CHECK(l6.n_pairs() == 18);
}

TEST_CASE("torso spheres cover the sampled cuboid surface") {
  const ModelSpec m = build_uniform_model(3);
  const SphereLayout layout = default_layout(m);
  const auto pts = torso_surface_points(m.torso_dims);
  CHECK(pts.size() >= 190);
  for (const auto& p : pts) {
    bool inside = false;
    for (const auto& s : layout.torso_spheres)
      if ((p - s.center).norm() <= s.radius + 1e-12) inside = true;
    CHECK(inside);
  }
}

TEST_CASE("collision values: arithmetic, nominal pose, and folded pose") {
  // Sum of radii 0.34 at distance 0.5 -> margin -0.16.
  CHECK(0.08 + 0.26 - 0.5 == doctest::Approx(-0.16));

  const ModelSpec m = build_uniform_model(3);
  const SphereLayout layout = default_layout(m);
  const VectorXd q0 = VectorXd::Zero(m.n_q());
  const VectorXd g0 = collision_values(m, layout, q0);
  REQUIRE(g0.size() == 9);
  CHECK(g0.maxCoeff() < 0.0);  // straight tail clears the torso

  // First tail sphere (joint between links 1 and 2) sits at y = -1.0; the
  // nearest torso sphere is at y = -0.35: g = 0.34 - 0.65.
  CHECK(g0(0) == doctest::Approx(0.34 - 0.65).epsilon(1e-12));

  // Coincident centers: a synthetic layout with a tail sphere at the tail
  // base and a torso sphere at the attachment point.
  SphereLayout folded;
  folded.torso_spheres.push_back({Vector3d(0.0, -0.8, 0.0), 0.26});
  folded.tail_spheres.push_back({1, 0.3, 0.08});  // 0.3 m down link 1 -> y = -0.8
  const VectorXd g = collision_values(m, folded, q0);
  CHECK(g(0) == doctest::Approx(0.34).epsilon(1e-12));  // violated by the full radius sum
}

TEST_CASE("rotating only the torso angles leaves every pair distance unchanged") {
  Rng rng(17);
  const ModelSpec m = build_uniform_model(4);
  const SphereLayout layout = default_layout(m);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd q = random_q(m, rng);
    const VectorXd tail_angles = q.tail(m.n_u());
    const VectorXd g1 = collision_values(m, layout, q);
    q(0) = rng.uniform(-2.0, 2.0);
    q(1) = rng.uniform(-1.2, 1.2);
    q(2) = rng.uniform(-2.0, 2.0);
    q.tail(m.n_u()) = tail_angles;
    const VectorXd g2 = collision_values(m, layout, q);
    CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("collision jacobian matches finite differences") {
  Rng rng(29);
  const ModelSpec m = build_uniform_model(3);
  const SphereLayout layout = default_layout(m);
  const double eps = 1e-6;

  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd q = random_q(m, rng);
    MatrixXd dg_dq;
    collision_jacobian(m, layout, q, VectorXd(), dg_dq);
    for (int j = 0; j < m.n_q(); ++j) {
      VectorXd qp = q, qm = q;
      qp(j) += eps;
      qm(j) -= eps;
      const VectorXd fd =
          (collision_values(m, layout, qp) - collision_values(m, layout, qm)) / (2.0 * eps);
      CHECK((dg_dq.col(j) - fd).cwiseAbs().maxCoeff() /
                (1.0 + fd.cwiseAbs().maxCoeff()) <
            1e-4);
    }
  }
}

TEST_CASE("variable-length collision jacobian matches finite differences") {
  Rng rng(31);
  const ModelSpec m = build_uniform_model(3);
  const SphereLayout layout = default_layout(m);
  const VectorXd q = random_q(m, rng);
  const Eigen::Vector3d L(0.4, 0.7, 0.4);
  const double eps = 1e-6;

  MatrixXd dg_dq, dg_dl;
  collision_jacobian(m, layout, q, L, dg_dq, &dg_dl);

  for (int j = 0; j < 3; ++j) {
    VectorXd lp = L, lm = L;
    lp(j) += eps;
    lm(j) -= eps;
    const VectorXd fd =
        (collision_values(m, layout, q, lp) - collision_values(m, layout, q, lm)) /
        (2.0 * eps);
    CHECK((dg_dl.col(j) - fd).cwiseAbs().maxCoeff() / (1.0 + fd.cwiseAbs().maxCoeff()) <
          1e-4);
  }
  // dg/dq at the modified lengths also checks out.
  for (int j = 0; j < m.n_q(); ++j) {
    VectorXd qp = q, qm = q;
    qp(j) += eps;
    qm(j) -= eps;
    const VectorXd fd =
        (collision_values(m, layout, qp, L) - collision_values(m, layout, qm, L)) /
        (2.0 * eps);
    CHECK((dg_dq.col(j) - fd).cwiseAbs().maxCoeff() / (1.0 + fd.cwiseAbs().maxCoeff()) <
          1e-4);
  }
}

TEST_CASE("coincident sphere centers are reported as non-differentiable") {
  const ModelSpec m = build_uniform_model(1);
  SphereLayout bad;
  bad.torso_spheres.push_back({Vector3d(0.0, -2.0, 0.0), 0.2});
  bad.tail_spheres.push_back({1, 1.5, 0.08});  // tip at (0, -2, 0) when q = 0
  MatrixXd dg_dq;
  CHECK_THROWS_AS(
      collision_jacobian(m, bad, VectorXd::Zero(m.n_q()), VectorXd(), dg_dq), Error);
}

TEST_CASE("layout override from the model config is honored") {
  ModelSpec m = build_uniform_model(2);
  CollisionConfig cc;
  cc.torso_spheres.push_back({Vector3d::Zero(), 0.5});
  cc.tail_sphere_radius = 0.1;
  m.collision = cc;
  const SphereLayout layout = default_layout(m);
  CHECK(layout.torso_spheres.size() == 1);
  CHECK(layout.torso_spheres[0].radius == 0.5);
  CHECK(layout.tail_spheres.size() == 2);
  CHECK(layout.tail_spheres[0].radius == 0.1);
}
