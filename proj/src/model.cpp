#include "tailopt/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace tailopt {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(msg);
}

}  // namespace

void JointLimits::validate() const {
  require(rom_rad > 0.0, "limits.rom_deg must be positive");
  require(vel_rad_s > 0.0, "limits.vel_deg_s must be positive");
  require(torque_nm > 0.0, "limits.torque_nm must be positive");
  require(effort_bound > 0.0, "limits.effort_bound must be positive");
  require(rate_bound_nm_s > 0.0, "limits.rate_bound_nm_s must be positive");
  require(torso_angle_rad > 0.0, "limits.torso_angle_deg must be positive");
  require(torso_vel_rad_s > 0.0, "limits.torso_vel_deg_s must be positive");
  // E may not exceed the single-vertebra maximum 2*torque^2, otherwise the
  // effort ball could never saturate for the 1-link model.
  require(effort_bound <= 2.0 * torque_nm * torque_nm + 1e-12,
          "limits.effort_bound exceeds 2*torque_nm^2");
}

void SpatialInertia::validate() const {
  require(mass >= 0.0, "inertia: negative mass");
  const Eigen::Matrix3d& I = inertia_com;
  require((I - I.transpose()).cwiseAbs().maxCoeff() < 1e-12, "inertia: not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(I);
  const Eigen::Vector3d ev = es.eigenvalues();
  require(ev.minCoeff() >= -1e-12, "inertia: not positive semidefinite");
  // Triangle inequalities on principal moments.
  const double tol = 1e-9 * std::max(1.0, ev.maxCoeff());
  require(ev(0) + ev(1) >= ev(2) - tol && ev(0) + ev(2) >= ev(1) - tol &&
              ev(1) + ev(2) >= ev(0) - tol,
          "inertia: principal moments violate triangle inequality");
}

double ModelSpec::total_tail_length() const {
  return std::accumulate(link_lengths.begin(), link_lengths.end(), 0.0);
}

void ModelSpec::validate() const {
  require(torso_mass > 0.0, "torso.mass_kg must be positive");
  require(torso_dims.minCoeff() > 0.0, "torso.dims_m must be positive");
  require(n_links >= 1 && n_links <= 6, "tail.n_links must be in [1, 6]");
  require(static_cast<int>(link_lengths.size()) == n_links,
          "tail.lengths_m size must equal tail.n_links");
  for (double l : link_lengths) require(l > 0.0, "tail.lengths_m entries must be positive");
  require(cross_section.minCoeff() > 0.0, "tail.cross_section_m must be positive");
  require(linear_density > 0.0, "tail linear density must be positive");
  limits.validate();
  if (collision) {
    require(!collision->torso_spheres.empty(), "collision.torso_spheres must be non-empty");
    for (const auto& s : collision->torso_spheres)
      require(s.radius > 0.0, "collision.torso_spheres radius must be positive");
    require(collision->tail_sphere_radius > 0.0,
            "collision.tail_sphere_radius_m must be positive");
  }
}

SpatialInertia link_inertia(double length, const Eigen::Vector2d& cross_section,
                            double mass) {
  require(length > 0.0 && cross_section.minCoeff() > 0.0 && mass > 0.0,
          "link_inertia: dimensions and mass must be positive");
  const double w = cross_section(0);  // X
  const double h = cross_section(1);  // Z
  SpatialInertia out;
  out.mass = mass;
  out.com = Eigen::Vector3d(0.0, -0.5 * length, 0.0);
  const double c = mass / 12.0;
  out.inertia_com = Eigen::Vector3d(c * (length * length + h * h),  // about X
                                    c * (w * w + h * h),            // about Y (axial)
                                    c * (w * w + length * length))  // about Z
                        .asDiagonal();
  return out;
}

ModelSpec build_variable_model(const std::vector<double>& lengths,
                               const PhysicalParams& params) {
  const int n = static_cast<int>(lengths.size());
  require(n >= 1 && n <= 6, "build_variable_model: need 1 to 6 vertebrae");
  require(params.tail_total_length > 0.0 && params.tail_total_mass > 0.0,
          "build_variable_model: total length/mass must be positive");
  double sum = 0.0;
  for (double l : lengths) {
    require(l >= kMinVertebraLength,
            "build_variable_model: vertebra length below the 0.2 m lower bound");
    sum += l;
  }
  require(std::abs(sum - params.tail_total_length) <= 1e-9,
          "build_variable_model: lengths must sum to the total tail length");

  ModelSpec spec;
  spec.torso_mass = params.torso_mass;
  spec.torso_dims = params.torso_dims;
  spec.n_links = n;
  spec.link_lengths = lengths;
  spec.cross_section = params.cross_section;
  spec.linear_density = params.tail_total_mass / params.tail_total_length;
  spec.attach_offset = Eigen::Vector3d(0.0, -0.5 * params.torso_dims(1), 0.0);
  spec.limits = params.limits;
  spec.validate();
  return spec;
}

ModelSpec build_uniform_model(int n_links, const PhysicalParams& params) {
  require(n_links >= 1 && n_links <= 6, "build_uniform_model: n_links must be in [1, 6]");
  const std::vector<double> lengths(static_cast<size_t>(n_links),
                                    params.tail_total_length / n_links);
  return build_variable_model(lengths, params);
}

namespace {

using nlohmann::json;

Eigen::Vector3d vec3_from(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    throw Error("config field '" + field + "' must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Vector2d vec2_from(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2)
    throw Error("config field '" + field + "' must be an array of 2 numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

double num_from(const json& parent, const std::string& key, const std::string& where) {
  if (!parent.contains(key)) throw Error("config missing field '" + where + "'");
  if (!parent[key].is_number()) throw Error("config field '" + where + "' must be a number");
  return parent[key].get<double>();
}

}  // namespace

ModelSpec load_model(const std::string& config_text) {
  json root;
  try {
    root = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("model config parse error: ") + e.what());
  }
  if (!root.contains("torso") || !root.contains("tail") || !root.contains("limits"))
    throw Error("model config requires top-level keys 'torso', 'tail', 'limits'");

  const json& torso = root["torso"];
  const json& tail = root["tail"];
  const json& lim = root["limits"];

  PhysicalParams params;
  params.torso_mass = num_from(torso, "mass_kg", "torso.mass_kg");
  if (!torso.contains("dims_m")) throw Error("config missing field 'torso.dims_m'");
  params.torso_dims = vec3_from(torso["dims_m"], "torso.dims_m");

  const int n_links = static_cast<int>(num_from(tail, "n_links", "tail.n_links"));
  params.tail_total_length = num_from(tail, "total_length_m", "tail.total_length_m");
  params.tail_total_mass = num_from(tail, "total_mass_m", "tail.total_mass_m");
  if (!tail.contains("cross_section_m")) throw Error("config missing field 'tail.cross_section_m'");
  params.cross_section = vec2_from(tail["cross_section_m"], "tail.cross_section_m");

  JointLimits& l = params.limits;
  l.rom_rad = deg_to_rad(num_from(lim, "rom_deg", "limits.rom_deg"));
  l.vel_rad_s = deg_to_rad(num_from(lim, "vel_deg_s", "limits.vel_deg_s"));
  l.torque_nm = num_from(lim, "torque_nm", "limits.torque_nm");
  l.effort_bound = num_from(lim, "effort_bound", "limits.effort_bound");
  l.rate_bound_nm_s = num_from(lim, "rate_bound_nm_s", "limits.rate_bound_nm_s");
  l.torso_angle_rad = deg_to_rad(num_from(lim, "torso_angle_deg", "limits.torso_angle_deg"));
  l.torso_vel_rad_s = deg_to_rad(num_from(lim, "torso_vel_deg_s", "limits.torso_vel_deg_s"));

  ModelSpec spec;
  if (tail.contains("lengths_m")) {
    const json& jl = tail["lengths_m"];
    if (!jl.is_array() || jl.empty())
      throw Error("config field 'tail.lengths_m' must be a non-empty array");
    std::vector<double> lengths;
    for (const auto& v : jl) lengths.push_back(v.get<double>());
    if (static_cast<int>(lengths.size()) != n_links)
      throw Error("config field 'tail.lengths_m' size must equal tail.n_links");
    spec = build_variable_model(lengths, params);
  } else {
    spec = build_uniform_model(n_links, params);
  }

  if (root.contains("collision")) {
    const json& col = root["collision"];
    CollisionConfig cc;
    if (col.contains("torso_spheres")) {
      for (const auto& s : col["torso_spheres"]) {
        CollisionConfig::Sphere sphere;
        sphere.center = vec3_from(s.at("center_m"), "collision.torso_spheres.center_m");
        sphere.radius = s.at("radius_m").get<double>();
        cc.torso_spheres.push_back(sphere);
      }
    }
    if (col.contains("tail_sphere_radius_m"))
      cc.tail_sphere_radius = col["tail_sphere_radius_m"].get<double>();
    spec.collision = cc;
    spec.validate();
  }
  return spec;
}

std::string save_model(const ModelSpec& spec) {
  spec.validate();
  json root;
  root["torso"]["mass_kg"] = spec.torso_mass;
  root["torso"]["dims_m"] = {spec.torso_dims(0), spec.torso_dims(1), spec.torso_dims(2)};
  root["tail"]["n_links"] = spec.n_links;
  root["tail"]["total_length_m"] = spec.total_tail_length();
  root["tail"]["total_mass_m"] = spec.total_tail_mass();
  root["tail"]["cross_section_m"] = {spec.cross_section(0), spec.cross_section(1)};
  root["tail"]["lengths_m"] = spec.link_lengths;
  const JointLimits& l = spec.limits;
  root["limits"]["rom_deg"] = rad_to_deg(l.rom_rad);
  root["limits"]["vel_deg_s"] = rad_to_deg(l.vel_rad_s);
  root["limits"]["torque_nm"] = l.torque_nm;
  root["limits"]["effort_bound"] = l.effort_bound;
  root["limits"]["rate_bound_nm_s"] = l.rate_bound_nm_s;
  root["limits"]["torso_angle_deg"] = rad_to_deg(l.torso_angle_rad);
  root["limits"]["torso_vel_deg_s"] = rad_to_deg(l.torso_vel_rad_s);
  if (spec.collision) {
    json spheres = json::array();
    for (const auto& s : spec.collision->torso_spheres) {
      json js;
      js["center_m"] = {s.center(0), s.center(1), s.center(2)};
      js["radius_m"] = s.radius;
      spheres.push_back(js);
    }
    root["collision"]["torso_spheres"] = spheres;
    root["collision"]["tail_sphere_radius_m"] = spec.collision->tail_sphere_radius;
  }
  return root.dump(2) + "\n";
}

ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

void save_model_file(const ModelSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model config '" + path + "'");
  out << save_model(spec);
}

bool operator==(const JointLimits& a, const JointLimits& b) {
  return a.rom_rad == b.rom_rad && a.vel_rad_s == b.vel_rad_s &&
         a.torque_nm == b.torque_nm && a.effort_bound == b.effort_bound &&
         a.rate_bound_nm_s == b.rate_bound_nm_s &&
         a.torso_angle_rad == b.torso_angle_rad && a.torso_vel_rad_s == b.torso_vel_rad_s;
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  bool col_eq = a.collision.has_value() == b.collision.has_value();
  if (col_eq && a.collision) {
    col_eq = a.collision->tail_sphere_radius == b.collision->tail_sphere_radius &&
             a.collision->torso_spheres.size() == b.collision->torso_spheres.size();
    if (col_eq)
      for (size_t i = 0; i < a.collision->torso_spheres.size(); ++i)
        col_eq = col_eq &&
                 a.collision->torso_spheres[i].center == b.collision->torso_spheres[i].center &&
                 a.collision->torso_spheres[i].radius == b.collision->torso_spheres[i].radius;
  }
  return a.torso_mass == b.torso_mass && a.torso_dims == b.torso_dims &&
         a.n_links == b.n_links && a.link_lengths == b.link_lengths &&
         a.cross_section == b.cross_section && a.linear_density == b.linear_density &&
         a.attach_offset == b.attach_offset && a.limits == b.limits && col_eq;
}

}  // namespace tailopt
