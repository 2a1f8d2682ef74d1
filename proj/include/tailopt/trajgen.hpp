#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tailopt/common.hpp"

namespace tailopt {

/// Fifth-degree Fourier-series target for the three torso orientation
/// angles over a fixed 0.5 s horizon. theta_i(0) = 0 by construction and
/// |theta_i| <= pi, |theta_i_dot| <= 2 pi throughout.
struct FourierTarget {
  static constexpr double kT0 = 0.0;
  static constexpr double kTf = 0.5;
  static constexpr int kDegree = 5;

  double a[3][6] = {};      // a[axis][0..5], rad
  double b[3][5] = {};      // b[axis][j-1] for j = 1..5, rad
  double omega[3] = {};     // rad/s

  void eval(double t, Eigen::Vector3d& theta, Eigen::Vector3d& theta_dot) const;
  Eigen::Vector3d angles(double t) const;

  /// Checks the angle/velocity invariants on a 1 ms grid.
  bool within_bounds() const;
};

bool operator==(const FourierTarget& x, const FourierTarget& y);

/// Deterministic in seed; resamples internally until the sampled series
/// passes the bound check (hard error after bounded retries).
FourierTarget sample_target(std::uint64_t seed);

/// count targets with per-target streams derived from (seed, index).
std::vector<FourierTarget> gen_batch(std::uint64_t seed, int count);

/// CSV schema: trial_id, axis (1-3), a0..a5, b1..b5, omega. Values are
/// printed with round-trip precision so export -> import is exact.
std::string targets_to_csv(const std::vector<FourierTarget>& targets);
std::vector<FourierTarget> targets_from_csv(const std::string& text);
void write_targets_file(const std::vector<FourierTarget>& targets, const std::string& path);
std::vector<FourierTarget> read_targets_file(const std::string& path);

}  // namespace tailopt
