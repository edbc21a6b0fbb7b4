#include "asv/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "asv/dynamics.hpp"

namespace asv {

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

double gauss_speed_integral(const Pchip& x, const Pchip& y, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    const double t = mid + half * kGaussNodes[i];
    sum += kGaussWeights[i] * std::hypot(x.derivative(t), y.derivative(t));
  }
  return sum * half;
}

}  // namespace

Path Path::build(std::vector<Vec2> waypoints) {
  if (waypoints.size() < 2)
    throw std::invalid_argument("path: need at least two waypoints");
  std::vector<double> t(waypoints.size(), 0.0), xs, ys;
  for (std::size_t k = 0; k < waypoints.size(); ++k) {
    if (!waypoints[k].allFinite())
      throw std::invalid_argument("path: non-finite waypoint");
    if (k > 0) {
      const double chord = (waypoints[k] - waypoints[k - 1]).norm();
      if (!(chord > 0.0))
        throw std::invalid_argument("path: duplicate consecutive waypoints at index " +
                                    std::to_string(k));
      t[k] = t[k - 1] + chord;
    }
    xs.push_back(waypoints[k].x());
    ys.push_back(waypoints[k].y());
  }

  Path path;
  path.waypoints_ = std::move(waypoints);
  path.x_of_t_ = Pchip(t, std::move(xs));
  path.y_of_t_ = Pchip(t, std::move(ys));

  // Cumulative arc length on a uniform chordal grid; each grid interval is
  // split at waypoint parameters so the quadrature never straddles a spline
  // piece boundary.
  const double t_end = t.back();
  std::vector<double> grid(kArcTableKnots), arc(kArcTableKnots, 0.0);
  for (int j = 0; j < kArcTableKnots; ++j)
    grid[j] = t_end * static_cast<double>(j) / (kArcTableKnots - 1);
  grid.back() = t_end;
  for (int j = 1; j < kArcTableKnots; ++j) {
    double a = grid[j - 1];
    const double b = grid[j];
    double seg = 0.0;
    for (double knot : t) {
      if (knot > a && knot < b) {
        seg += gauss_speed_integral(path.x_of_t_, path.y_of_t_, a, knot);
        a = knot;
      }
    }
    seg += gauss_speed_integral(path.x_of_t_, path.y_of_t_, a, b);
    arc[j] = arc[j - 1] + seg;
    if (!(arc[j] > arc[j - 1]))
      throw std::invalid_argument("path: degenerate arc-length table");
  }
  path.length_ = arc.back();
  path.t_of_arc_ = Pchip(std::move(arc), std::move(grid));
  return path;
}

double Path::clamp_arc(double arc) const { return std::clamp(arc, 0.0, length_); }

double Path::chord_parameter(double arc) const {
  return t_of_arc_(clamp_arc(arc));
}

Vec2 Path::point_at_chord(double t) const { return {x_of_t_(t), y_of_t_(t)}; }

Vec2 Path::point(double arc) const {
  const double a = clamp_arc(arc);
  if (a <= 0.0) return waypoints_.front();
  if (a >= length_) return waypoints_.back();
  return point_at_chord(t_of_arc_(a));
}

Vec2 Path::derivative(double arc) const {
  const double a = clamp_arc(arc);
  const double t = t_of_arc_(a);
  const double dt = t_of_arc_.derivative(a);
  return Vec2(x_of_t_.derivative(t), y_of_t_.derivative(t)) * dt;
}

double Path::tangent_angle(double arc) const {
  const double t = t_of_arc_(clamp_arc(arc));
  double dx = x_of_t_.derivative(t), dy = y_of_t_.derivative(t);
  if (std::hypot(dx, dy) < 1e-12) {
    // Both coordinates stationary at a waypoint: use the local chord.
    const double eps = 1e-6 * t_of_arc_.values().back();
    const double lo = std::max(0.0, t - eps);
    const double hi = std::min(t_of_arc_.values().back(), t + eps);
    const Vec2 chord = point_at_chord(hi) - point_at_chord(lo);
    dx = chord.x();
    dy = chord.y();
  }
  return std::atan2(dy, dx);
}

double course_angle(double psi, double u, double v) {
  if (std::hypot(u, v) > 0.05) return wrap_angle(psi + std::atan2(v, u));
  return wrap_angle(psi);
}

TrackingErrors tracking_errors(const Path& path, double omega_bar,
                               const Vec2& vessel_pos, double course,
                               double lookahead) {
  const Vec2 ref = path.point(omega_bar);
  const double gamma = path.tangent_angle(omega_bar);
  const Vec2 diff = vessel_pos - ref;
  const double c = std::cos(gamma), s = std::sin(gamma);

  TrackingErrors out;
  out.along_track = c * diff.x() + s * diff.y();
  out.cross_track = -s * diff.x() + c * diff.y();

  const Vec2 ahead = path.point(omega_bar + lookahead);
  const Vec2 chord = ahead - ref;
  // At the end of the path the look-ahead point collapses onto the reference
  // point; steer toward the path end instead (terminal tangent if already there).
  double desired;
  if (chord.norm() > 1e-9) {
    desired = std::atan2(chord.y(), chord.x());
  } else {
    const Vec2 home = ref - vessel_pos;
    desired = home.norm() > 1e-9 ? std::atan2(home.y(), home.x())
                                 : path.tangent_angle(path.length());
  }
  out.course_error = angle_diff(desired, course);
  out.lookahead_course_error =
      angle_diff(path.tangent_angle(omega_bar + lookahead), course);
  return out;
}

PathVariable advance_path_variable(const PathVariable& pv, double path_length,
                                   double u, double v, double course_error,
                                   double along_track, double h,
                                   double gamma_omega) {
  // along_track > 0 means the vessel is ahead of the reference point, so the
  // feedback term advances the reference to shrink |s|.
  const double rate =
      std::hypot(u, v) * std::cos(course_error) + gamma_omega * along_track;
  return {std::clamp(pv.omega_bar + h * rate, 0.0, path_length)};
}

}  // namespace asv
