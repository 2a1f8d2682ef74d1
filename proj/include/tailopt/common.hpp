#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace tailopt {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad / (kPi / 180.0); }

/// Base error type for all tailopt failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration-space representation singularity (gimbal lock).
class SingularConfigError : public Error {
 public:
  explicit SingularConfigError(const std::string& what) : Error(what) {}
};

}  // namespace tailopt
