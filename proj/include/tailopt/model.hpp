#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tailopt/common.hpp"

namespace tailopt {

/// Joint/state/input bounds. Angles and rates are stored in radians;
/// degrees appear only in the config file.
struct JointLimits {
  double rom_rad = deg_to_rad(60.0);        // tail joint position bound (symmetric)
  double vel_rad_s = deg_to_rad(360.0);     // tail joint velocity bound
  double torque_nm = 5.0;                   // per-DOF torque bound
  double effort_bound = 50.0;               // E in u'u <= E, N^2 m^2
  double rate_bound_nm_s = 200.0;           // R, per-DOF torque rate bound
  double torso_angle_rad = deg_to_rad(180.0);
  double torso_vel_rad_s = deg_to_rad(360.0);

  void validate() const;
};

/// Mass, center of mass and rotational inertia of one rigid body,
/// expressed in its own link frame.
struct SpatialInertia {
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia_com = Eigen::Matrix3d::Zero();

  void validate() const;
};

/// Optional override of the self-collision sphere layout, carried through
/// from the model config file.
struct CollisionConfig {
  struct Sphere {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();  // torso frame
    double radius = 0.0;
  };
  std::vector<Sphere> torso_spheres;
  double tail_sphere_radius = 0.08;
};

/// Full physical description of a torso + n-link tail chain.
///
/// Frames: torso local Y is the long axis; the torso pivot (an unactuated
/// 3-DOF ball joint) sits at the torso's geometric center; the tail attaches
/// at the posterior face center and extends along -Y. Each tail joint has
/// 2 actuated DOF, pitch (local X) then yaw (local Z).
struct ModelSpec {
  double torso_mass = 5.0;
  Eigen::Vector3d torso_dims{0.3, 1.0, 0.3};  // width x length x height (X, Y, Z)
  int n_links = 1;
  std::vector<double> link_lengths;           // m, proximal to distal
  Eigen::Vector2d cross_section{0.1, 0.1};    // width x height of each link
  double linear_density = 1.0;                // kg/m
  Eigen::Vector3d attach_offset{0.0, -0.5, 0.0};
  JointLimits limits;
  std::optional<CollisionConfig> collision;

  int n_q() const { return 2 * n_links + 3; }
  int n_u() const { return 2 * n_links; }
  double total_tail_length() const;
  double total_tail_mass() const { return linear_density * total_tail_length(); }
  double link_mass(int i) const { return linear_density * link_lengths.at(i); }

  void validate() const;
};

/// Physical parameters shared by all configurations (Table-1 defaults).
struct PhysicalParams {
  double torso_mass = 5.0;
  Eigen::Vector3d torso_dims{0.3, 1.0, 0.3};
  double tail_total_length = 1.5;
  double tail_total_mass = 1.5;
  Eigen::Vector2d cross_section{0.1, 0.1};
  JointLimits limits;
};

/// Lower bound on a vertebra length in variable-length mode, m.
inline constexpr double kMinVertebraLength = 0.2;

/// Uniform cuboid inertia; the long axis is local Y, cross_section is (X, Z).
SpatialInertia link_inertia(double length, const Eigen::Vector2d& cross_section,
                            double mass);

/// n_links equal-length vertebrae splitting the total length and mass.
ModelSpec build_uniform_model(int n_links, const PhysicalParams& params = {});

/// Explicit vertebral lengths; masses and inertias follow from the linear
/// density. Lengths must each be >= kMinVertebraLength and sum to the total
/// tail length within 1e-9.
ModelSpec build_variable_model(const std::vector<double>& lengths,
                               const PhysicalParams& params = {});

/// Config file (JSON) I/O. load_model throws Error with a line/field
/// diagnostic on parse failures and names the violated field on invariant
/// failures.
ModelSpec load_model(const std::string& config_text);
std::string save_model(const ModelSpec& spec);
ModelSpec load_model_file(const std::string& path);
void save_model_file(const ModelSpec& spec, const std::string& path);

bool operator==(const JointLimits& a, const JointLimits& b);
bool operator==(const ModelSpec& a, const ModelSpec& b);

}  // namespace tailopt
