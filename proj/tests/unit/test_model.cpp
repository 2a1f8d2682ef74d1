#include <doctest.h>

#include <cmath>

#include "tailopt/model.hpp"

using namespace tailopt;

namespace {

/// Independent closed-form cuboid inertia: uniform box of dims (a, b, c)
/// about its center, I_x = m/12 (b^2 + c^2) and permutations.
Eigen::Vector3d cuboid_oracle(double m, double a, double b, double c) {
  return {m / 12.0 * (b * b + c * c), m / 12.0 * (a * a + c * c),
          m / 12.0 * (a * a + b * b)};
}

}  // namespace

TEST_CASE("uniform models split Table-1 totals evenly") {
  const ModelSpec one = build_uniform_model(1);
  CHECK(one.n_links == 1);
  CHECK(one.link_lengths[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(one.link_mass(0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(one.cross_section(0) == 0.1);
  CHECK(one.cross_section(1) == 0.1);
  CHECK(one.n_q() == 5);

  const ModelSpec three = build_uniform_model(3);
  for (int i = 0; i < 3; ++i) {
    CHECK(three.link_lengths[i] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(three.link_mass(i) == doctest::Approx(0.5).epsilon(1e-15));
  }

  const ModelSpec six = build_uniform_model(6);
  for (int i = 0; i < 6; ++i) {
    CHECK(six.link_lengths[i] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(six.link_mass(i) == doctest::Approx(0.25).epsilon(1e-15));
  }
  CHECK(six.n_q() == 15);
}

TEST_CASE("totals and ratios match Table 1 for every link count") {
  for (int n = 1; n <= 6; ++n) {
    const ModelSpec m = build_uniform_model(n);
    CHECK(std::abs(m.total_tail_length() - 1.5) <= 1e-12 * 1.5);
    CHECK(std::abs(m.total_tail_mass() - 1.5) <= 1e-12 * 1.5);
    CHECK(m.torso_mass / m.total_tail_mass() == doctest::Approx(5.0 / 1.5));
    CHECK(m.torso_dims(1) / m.total_tail_length() == doctest::Approx(1.0 / 1.5));
  }
}

TEST_CASE("builder rejects invalid inputs") {
  CHECK_THROWS_AS(build_uniform_model(0), Error);
  CHECK_THROWS_AS(build_uniform_model(7), Error);
  PhysicalParams bad;
  bad.torso_mass = -1.0;
  CHECK_THROWS_AS(build_uniform_model(1, bad), Error);
  PhysicalParams bad2;
  bad2.tail_total_mass = 0.0;
  CHECK_THROWS_AS(build_uniform_model(2, bad2), Error);
}

TEST_CASE("variable-length models couple mass to length") {
  const ModelSpec m = build_variable_model({0.2, 0.7, 0.6});
  CHECK(m.link_mass(0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(m.link_mass(1) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(m.link_mass(2) == doctest::Approx(0.6).epsilon(1e-15));

  CHECK_THROWS_AS(build_variable_model({0.1, 0.7, 0.7}), Error);   // below 0.2 m bound
  CHECK_THROWS_AS(build_variable_model({0.4, 0.5, 0.5}), Error);   // sum != 1.5
  CHECK_THROWS_WITH_AS(build_variable_model({0.5, 0.6, 0.5}), doctest::Contains("sum"),
                       Error);
}

TEST_CASE("variable model with equal lengths is bit-identical to uniform") {
  for (int n : {1, 2, 3, 4, 5, 6}) {
    const ModelSpec u = build_uniform_model(n);
    const ModelSpec v = build_variable_model(u.link_lengths);
    CHECK(u == v);
  }
}

TEST_CASE("link_inertia matches the closed-form cuboid oracle") {
  // Torso-shaped block: 5 kg, 0.3 x 1.0 x 0.3 (length along Y).
  const SpatialInertia torso = link_inertia(1.0, {0.3, 0.3}, 5.0);
  const Eigen::Vector3d expect = cuboid_oracle(5.0, 0.3, 1.0, 0.3);
  for (int i = 0; i < 3; ++i)
    CHECK(torso.inertia_com(i, i) == doctest::Approx(expect(i)).epsilon(1e-14));
  CHECK(torso.inertia_com(0, 0) == doctest::Approx(0.45417).epsilon(1e-4));
  CHECK(torso.inertia_com(1, 1) == doctest::Approx(0.075).epsilon(1e-12));
  CHECK(torso.inertia_com(2, 2) == doctest::Approx(0.45417).epsilon(1e-4));

  const SpatialInertia link = link_inertia(1.5, {0.1, 0.1}, 1.5);
  CHECK(link.inertia_com(0, 0) == doctest::Approx(0.28250).epsilon(1e-12));
  CHECK(link.inertia_com(2, 2) == doctest::Approx(0.28250).epsilon(1e-12));
  CHECK(link.inertia_com(1, 1) == doctest::Approx(0.0025).epsilon(1e-12));
  CHECK(link.com.y() == doctest::Approx(-0.75));
  link.validate();

  CHECK_THROWS_AS(link_inertia(0.0, {0.1, 0.1}, 1.0), Error);
  CHECK_THROWS_AS(link_inertia(1.0, {0.0, 0.1}, 1.0), Error);
}

TEST_CASE("spatial inertia validation catches non-physical tensors") {
  SpatialInertia bad;
  bad.mass = 1.0;
  bad.inertia_com = Eigen::Vector3d(1.0, 1.0, 3.0).asDiagonal();  // 1 + 1 < 3
  CHECK_THROWS_AS(bad.validate(), Error);

  SpatialInertia asym;
  asym.mass = 1.0;
  asym.inertia_com.setIdentity();
  asym.inertia_com(0, 1) = 1e-3;
  CHECK_THROWS_AS(asym.validate(), Error);
}

TEST_CASE("joint limits invariants") {
  JointLimits l;
  l.validate();
  l.effort_bound = 2.0 * l.torque_nm * l.torque_nm + 1.0;  // cannot saturate 1-link model
  CHECK_THROWS_AS(l.validate(), Error);
  JointLimits neg;
  neg.rom_rad = 0.0;
  CHECK_THROWS_AS(neg.validate(), Error);
}

TEST_CASE("config round trip") {
  ModelSpec m = build_uniform_model(3);
  const std::string text = save_model(m);
  const ModelSpec back = load_model(text);

  CHECK(back.torso_mass == m.torso_mass);
  CHECK(back.torso_dims == m.torso_dims);
  CHECK(back.n_links == m.n_links);
  CHECK(back.cross_section == m.cross_section);
  CHECK(back.linear_density == m.linear_density);
  CHECK(back.attach_offset == m.attach_offset);
  for (int i = 0; i < 3; ++i)
    CHECK(back.link_lengths[i] == doctest::Approx(m.link_lengths[i]).epsilon(1e-15));
  // Limit fields pass through a deg<->rad conversion; allow rounding noise.
  CHECK(back.limits.rom_rad == doctest::Approx(m.limits.rom_rad).epsilon(1e-15));
  CHECK(back.limits.vel_rad_s == doctest::Approx(m.limits.vel_rad_s).epsilon(1e-15));
  CHECK(back.limits.torque_nm == m.limits.torque_nm);
  CHECK(back.limits.effort_bound == m.limits.effort_bound);
  CHECK(back.limits.rate_bound_nm_s == m.limits.rate_bound_nm_s);
  CHECK(back.limits.torso_angle_rad == doctest::Approx(m.limits.torso_angle_rad).epsilon(1e-15));
  CHECK(back.limits.torso_vel_rad_s == doctest::Approx(m.limits.torso_vel_rad_s).epsilon(1e-15));

  // Serialization is a fixed point after one trip.
  CHECK(save_model(back) == text);
}

TEST_CASE("config carries collision overrides") {
  ModelSpec m = build_uniform_model(2);
  CollisionConfig cc;
  cc.torso_spheres.push_back({Eigen::Vector3d(0.0, 0.1, 0.0), 0.3});
  cc.tail_sphere_radius = 0.05;
  m.collision = cc;
  const ModelSpec back = load_model(save_model(m));
  REQUIRE(back.collision.has_value());
  CHECK(back.collision->torso_spheres.size() == 1);
  CHECK(back.collision->torso_spheres[0].radius == 0.3);
  CHECK(back.collision->tail_sphere_radius == 0.05);
}

TEST_CASE("config errors carry field diagnostics") {
  CHECK_THROWS_WITH_AS(load_model("{ not json"), doctest::Contains("parse"), Error);
  CHECK_THROWS_WITH_AS(load_model("{}"), doctest::Contains("torso"), Error);

  ModelSpec m = build_uniform_model(3);
  std::string text = save_model(m);
  // Shrink one vertebra so the total length becomes 1.4 m.
  const std::string from = "0.5,";
  text.replace(text.find(from), from.size(), "0.4,");
  CHECK_THROWS_WITH_AS(load_model(text), doctest::Contains("sum"), Error);
}
