#include "tailopt/collision.hpp"

#include <cmath>

#include "tailopt/chain.hpp"
#include "tailopt/dual.hpp"

namespace tailopt {

namespace {

/// World positions of all torso and tail sphere centers.
template <typename S>
void sphere_centers(const ModelSpec& model, const SphereLayout& layout,
                    const ChainT<S>& chain, const VecXT<S>& q,
                    const std::vector<S>& lengths, std::vector<Vec3T<S>>& torso,
                    std::vector<Vec3T<S>>& tail) {
  const FkResult<S> fk = forward_kinematics(chain, q);
  const Mat3T<S>& R_torso = fk.R[static_cast<size_t>(chain.torso_frame_joint())];

  torso.clear();
  for (const auto& s : layout.torso_spheres)
    torso.push_back(R_torso * s.center.template cast<S>());

  tail.clear();
  for (const auto& s : layout.tail_spheres) {
    const int j = chain.link_frame_joint(s.link_index);
    // Anchor offsets scale with the link length so spheres stay at the
    // joint connections and tip when lengths vary.
    const double frac = s.offset_along / model.link_lengths[static_cast<size_t>(s.link_index - 1)];
    const S off = S(frac) * lengths[static_cast<size_t>(s.link_index - 1)];
    tail.push_back(fk.p[static_cast<size_t>(j)] +
                   fk.R[static_cast<size_t>(j)] * Vec3T<S>(S(0), -off, S(0)));
  }
}

std::vector<double> lengths_vec(const ModelSpec& model, const Eigen::VectorXd& lengths) {
  if (lengths.size() == 0) return model.link_lengths;
  if (lengths.size() != model.n_links)
    throw Error("collision: lengths dimension mismatch");
  return std::vector<double>(lengths.data(), lengths.data() + lengths.size());
}

}  // namespace

SphereLayout default_layout(const ModelSpec& model) {
  SphereLayout layout;
  if (model.collision) {
    for (const auto& s : model.collision->torso_spheres)
      layout.torso_spheres.push_back({s.center, s.radius});
  } else {
    for (double y : {-0.35, 0.0, 0.35})
      layout.torso_spheres.push_back({Eigen::Vector3d(0.0, y, 0.0), 0.26});
  }
  const double tail_r = model.collision ? model.collision->tail_sphere_radius : 0.08;
  for (int i = 1; i <= model.n_links; ++i)
    layout.tail_spheres.push_back(
        {i, model.link_lengths[static_cast<size_t>(i - 1)], tail_r});
  return layout;
}

Eigen::VectorXd collision_values(const ModelSpec& model, const SphereLayout& layout,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& lengths) {
  if (q.size() != model.n_q()) throw Error("collision: state dimension mismatch");
  const std::vector<double> len = lengths_vec(model, lengths);
  const Chain chain = make_chain<double>(model, len);

  std::vector<Eigen::Vector3d> torso, tail;
  sphere_centers<double>(model, layout, chain, q, len, torso, tail);

  Eigen::VectorXd g(layout.n_pairs());
  int k = 0;
  for (size_t s = 0; s < tail.size(); ++s)
    for (size_t t = 0; t < torso.size(); ++t, ++k)
      g(k) = layout.tail_spheres[s].radius + layout.torso_spheres[t].radius -
             (tail[s] - torso[t]).norm();
  return g;
}

void collision_jacobian(const ModelSpec& model, const SphereLayout& layout,
                        const Eigen::VectorXd& q, const Eigen::VectorXd& lengths,
                        Eigen::MatrixXd& dg_dq, Eigen::MatrixXd* dg_dlengths) {
  if (q.size() != model.n_q()) throw Error("collision: state dimension mismatch");
  const int nq = model.n_q();
  const int ng = layout.n_pairs();
  const std::vector<double> len = lengths_vec(model, lengths);
  if (dg_dlengths != nullptr && lengths.size() == 0)
    throw Error("collision_jacobian: dg/dL requested without lengths");

  const Chain chain = make_chain<double>(model, len);
  const ChainT<Dual> dchain = chain_cast<Dual>(chain);

  // Values first, to detect coincident centers up front.
  {
    std::vector<Eigen::Vector3d> torso, tail;
    sphere_centers<double>(model, layout, chain, q, len, torso, tail);
    for (size_t s = 0; s < tail.size(); ++s)
      for (size_t t = 0; t < torso.size(); ++t)
        if ((tail[s] - torso[t]).norm() < 1e-12)
          throw Error("collision_jacobian: coincident sphere centers are not differentiable");
  }

  dg_dq.resize(ng, nq);
  VecXT<Dual> qD(nq);
  for (int i = 0; i < nq; ++i) qD(i) = Dual(q(i));
  std::vector<Dual> lenD(len.begin(), len.end());
  std::vector<Vec3T<Dual>> torso, tail;

  for (int j = 0; j < nq; ++j) {
    qD(j).d = 1.0;
    sphere_centers<Dual>(model, layout, dchain, qD, lenD, torso, tail);
    qD(j).d = 0.0;
    int k = 0;
    for (size_t s = 0; s < tail.size(); ++s)
      for (size_t t = 0; t < torso.size(); ++t, ++k) {
        const Dual d = (tail[s] - torso[t]).norm();
        dg_dq(k, j) = -d.d;
      }
  }

  if (dg_dlengths != nullptr) {
    dg_dlengths->resize(ng, model.n_links);
    for (int j = 0; j < model.n_links; ++j) {
      lenD[static_cast<size_t>(j)].d = 1.0;
      const ChainT<Dual> lc = make_chain<Dual>(model, lenD);
      sphere_centers<Dual>(model, layout, lc, qD, lenD, torso, tail);
      lenD[static_cast<size_t>(j)].d = 0.0;
      int k = 0;
      for (size_t s = 0; s < tail.size(); ++s)
        for (size_t t = 0; t < torso.size(); ++t, ++k) {
          const Dual d = (tail[s] - torso[t]).norm();
          (*dg_dlengths)(k, j) = -d.d;
        }
    }
  }
}

}  // namespace tailopt
