#pragma once

#include <vector>

#include <Eigen/Core>

#include "tailopt/model.hpp"

namespace tailopt {

/// Sphere over-approximation of the torso plus tail spheres anchored to the
/// links. Constraint pairs are torso-tail only; intra-tail pairs are not
/// needed given the joint range of motion and the 0.2 m length lower bound.
struct SphereLayout {
  struct TorsoSphere {
    Eigen::Vector3d center;  // torso frame
    double radius;
  };
  struct TailSphere {
    int link_index;        // 1-based
    double offset_along;   // m along -Y from the link's proximal joint
    double radius;
  };

  std::vector<TorsoSphere> torso_spheres;
  std::vector<TailSphere> tail_spheres;

  int n_pairs() const {
    return static_cast<int>(torso_spheres.size() * tail_spheres.size());
  }
};

/// Three torso spheres (r = 0.26 m at torso-frame Y in {-0.35, 0, +0.35})
/// and one r = 0.08 m tail sphere at each inter-link joint and at the tip.
/// The tail-base sphere coincides with the attachment and is excluded.
/// Values can be overridden through the model config's `collision` key.
SphereLayout default_layout(const ModelSpec& model);

/// g_k = (r_tail + r_torso) - distance(center_tail, center_torso); g_k <= 0
/// means separated. Pair order: tail sphere major, torso sphere minor.
/// When `lengths` is non-empty the tail sphere anchors follow the supplied
/// vertebral lengths (offsets scale proportionally per link).
Eigen::VectorXd collision_values(const ModelSpec& model, const SphereLayout& layout,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& lengths = Eigen::VectorXd());

/// dg/dq (and dg/dL when dg_dlengths is non-null, which requires lengths).
/// Throws on coincident sphere centers (non-differentiable).
void collision_jacobian(const ModelSpec& model, const SphereLayout& layout,
                        const Eigen::VectorXd& q, const Eigen::VectorXd& lengths,
                        Eigen::MatrixXd& dg_dq, Eigen::MatrixXd* dg_dlengths = nullptr);

}  // namespace tailopt
