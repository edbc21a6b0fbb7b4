#pragma once

// Smooth arc-length parameterized paths and the path-relative guidance
// quantities derived from them.

#include <Eigen/Dense>
#include <vector>

#include "asv/pchip.hpp"

namespace asv {

using Vec2 = Eigen::Vector2d;

class Path {
 public:
  static constexpr int kArcTableKnots = 1000;

  // Interpolates the waypoints per coordinate against cumulative chord
  // length, then reparameterizes by arc length. Throws std::invalid_argument
  // for fewer than two waypoints or duplicate consecutive waypoints.
  static Path build(std::vector<Vec2> waypoints);

  double length() const { return length_; }
  const std::vector<Vec2>& waypoints() const { return waypoints_; }

  // Arc length is clamped to [0, length()] in all accessors.
  Vec2 point(double arc) const;
  double tangent_angle(double arc) const;
  // d point / d arc; unit norm up to the table's interpolation error.
  Vec2 derivative(double arc) const;

  // Interpolation parameter (chordal) for an arc length.
  double chord_parameter(double arc) const;
  Vec2 point_at_chord(double t) const;

 private:
  Path() = default;
  double clamp_arc(double arc) const;

  std::vector<Vec2> waypoints_;
  Pchip x_of_t_;
  Pchip y_of_t_;
  Pchip t_of_arc_;
  double length_ = 0.0;
};

struct PathVariable {
  double omega_bar = 0.0;  // m along the path
};

struct TrackingErrors {
  double along_track = 0.0;              // s, m
  double cross_track = 0.0;              // e, m
  double course_error = 0.0;             // rad, toward the look-ahead point
  double lookahead_course_error = 0.0;   // rad, look-ahead tangent minus course
};

// Course over ground; heading when the vessel is nearly stationary.
double course_angle(double psi, double u, double v);

TrackingErrors tracking_errors(const Path& path, double omega_bar,
                               const Vec2& vessel_pos, double course,
                               double lookahead);

PathVariable advance_path_variable(const PathVariable& pv, double path_length,
                                   double u, double v, double course_error,
                                   double along_track, double h,
                                   double gamma_omega);

}  // namespace asv
