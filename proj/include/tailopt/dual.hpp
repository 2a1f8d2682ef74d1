#pragma once

#include <cmath>
#include <Eigen/Core>

namespace tailopt {

/// First-order dual number: carries a value and one directional derivative.
/// Seeding d = 1 on one input of a templated computation yields the exact
/// derivative of every output with respect to that input.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: constants promote implicitly
  Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator+(const Dual& a) { return a; }

inline bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
inline bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }
inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }

inline Dual sin(const Dual& x) { return {std::sin(x.v), std::cos(x.v) * x.d}; }
inline Dual cos(const Dual& x) { return {std::cos(x.v), -std::sin(x.v) * x.d}; }
inline Dual sqrt(const Dual& x) {
  const double s = std::sqrt(x.v);
  return {s, x.d / (2.0 * s)};
}
inline Dual abs(const Dual& x) { return x.v < 0.0 ? -x : x; }

inline const Dual& conj(const Dual& x) { return x; }
inline const Dual& real(const Dual& x) { return x; }
inline double imag(const Dual&) { return 0.0; }
inline double abs2(const Dual& x) { return x.v * x.v; }

}  // namespace tailopt

namespace Eigen {

template <>
struct NumTraits<tailopt::Dual> : NumTraits<double> {
  using Real = tailopt::Dual;
  using NonInteger = tailopt::Dual;
  using Nested = tailopt::Dual;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 4,
  };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<tailopt::Dual, double, BinaryOp> {
  using ReturnType = tailopt::Dual;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, tailopt::Dual, BinaryOp> {
  using ReturnType = tailopt::Dual;
};

}  // namespace Eigen
