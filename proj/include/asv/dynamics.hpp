#pragma once

// Three-degree-of-freedom surface vessel model:
//
//   eta_dot = R(psi) nu
//   M nu_dot + C(nu) nu + D(nu) nu = B f
//
// with eta = [x, y, psi] in the north-east frame and nu = [u, v, r] in the
// body frame. The mass matrix has the port/starboard-symmetric sparsity
// pattern (no surge-sway or surge-yaw coupling), and C(nu) is built from it so
// that it is skew-symmetric for every nu.

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <string>

#include "asv/errors.hpp"

namespace asv {

using Vector6d = Eigen::Matrix<double, 6, 1>;

double wrap_angle(double angle);
// Wrapped difference a - b in (-pi, pi].
double angle_diff(double a, double b);

struct VesselState {
  double x = 0.0;    // m, north
  double y = 0.0;    // m, east
  double psi = 0.0;  // rad
  double u = 0.0;    // m/s, surge
  double v = 0.0;    // m/s, sway
  double r = 0.0;    // rad/s, yaw rate

  Vector6d as_vector() const;
  static VesselState from_vector(const Vector6d& s);
  Eigen::Vector3d nu() const { return {u, v, r}; }
  bool finite() const;
  bool operator==(const VesselState&) const = default;
};

struct ControlInput {
  double thrust = 0.0;      // T_u, N
  double yaw_moment = 0.0;  // T_r, N*m
};

struct VesselParams {
  Eigen::Matrix3d mass = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d linear_damping = Eigen::Matrix3d::Zero();
  Eigen::Vector3d quadratic_damping = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, 3, 2> actuation = Eigen::Matrix<double, 3, 2>::Zero();
  std::array<double, 2> thrust_limits{0.0, 0.0};
  std::array<double, 2> yaw_moment_limits{0.0, 0.0};
  double width = 4.0;      // m
  double max_speed = 2.0;  // m/s

  // Validates the invariants and caches M^-1. Throws ConfigError.
  void finalize();
  const Eigen::Matrix3d& mass_inverse() const { return mass_inverse_; }

  Eigen::Matrix3d coriolis(const Eigen::Vector3d& nu) const;
  // Combined linear + quadratic damping force D(nu) nu.
  Eigen::Vector3d damping_force(const Eigen::Vector3d& nu) const;
  ControlInput saturate(const ControlInput& f) const;
  double kinetic_energy(const Eigen::Vector3d& nu) const {
    return 0.5 * nu.dot(mass * nu);
  }

 private:
  Eigen::Matrix3d mass_inverse_ = Eigen::Matrix3d::Identity();
};

// Shipped repository defaults (see config/vessel_default.json).
VesselParams default_vessel_params();
VesselParams load_vessel_params(const std::filesystem::path& file);
std::string vessel_params_to_json(const VesselParams& p);

Eigen::Matrix3d rotation_matrix(double psi);

// Rates [x_dot, y_dot, psi_dot, u_dot, v_dot, r_dot]. The control is used as
// given; saturation happens in step_rkf45.
Vector6d state_derivative(const VesselState& s, const ControlInput& f,
                          const VesselParams& p);

namespace rkf45 {

// Fehlberg 4(5) tableau.
inline constexpr double a21 = 1.0 / 4.0;
inline constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
inline constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0,
                        a43 = 7296.0 / 2197.0;
inline constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0,
                        a54 = -845.0 / 4104.0;
inline constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0,
                        a64 = 1859.0 / 4104.0, a65 = -11.0 / 40.0;
inline constexpr double b1 = 16.0 / 135.0, b3 = 6656.0 / 12825.0,
                        b4 = 28561.0 / 56430.0, b5 = -9.0 / 50.0,
                        b6 = 2.0 / 55.0;

// One fixed step of the fifth-order Fehlberg solution for y' = f(y).
// Throws IntegrationError naming the first stage whose input or output is
// not finite.
template <class Vec, class Rhs>
Vec step(Rhs&& f, const Vec& y, double h) {
  auto check = [](const Vec& v, int stage) {
    if (!v.allFinite())
      throw IntegrationError(stage, "rkf45: non-finite value at stage " +
                                        std::to_string(stage));
  };
  const Vec k1 = f(y);
  check(k1, 1);
  const Vec k2 = f(Vec(y + h * a21 * k1));
  check(k2, 2);
  const Vec k3 = f(Vec(y + h * (a31 * k1 + a32 * k2)));
  check(k3, 3);
  const Vec k4 = f(Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  check(k4, 4);
  const Vec k5 = f(Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  check(k5, 5);
  const Vec k6 = f(
      Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  check(k6, 6);
  Vec out = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  check(out, 7);
  return out;
}

}  // namespace rkf45

// Saturates f, advances one zero-order-hold step of length h and wraps psi.
VesselState step_rkf45(const VesselState& s, const ControlInput& f,
                       const VesselParams& p, double h);

}  // namespace asv
