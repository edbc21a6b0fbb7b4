#include "asv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace asv {

using nlohmann::json;

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(angle + pi, 2.0 * pi);
  if (a <= 0.0) a += 2.0 * pi;
  return a - pi;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

Vector6d VesselState::as_vector() const {
  Vector6d s;
  s << x, y, psi, u, v, r;
  return s;
}

VesselState VesselState::from_vector(const Vector6d& s) {
  return {s[0], s[1], s[2], s[3], s[4], s[5]};
}

bool VesselState::finite() const { return as_vector().allFinite(); }

void VesselParams::finalize() {
  if (!mass.allFinite() || !linear_damping.allFinite() ||
      !quadratic_damping.allFinite() || !actuation.allFinite())
    throw ConfigError("vessel params: non-finite matrix entry");
  if ((mass - mass.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("vessel params: mass matrix must be symmetric");
  if (mass(0, 1) != 0.0 || mass(0, 2) != 0.0)
    throw ConfigError(
        "vessel params: mass matrix must have zero surge-sway and surge-yaw "
        "coupling (port/starboard symmetry)");
  Eigen::LLT<Eigen::Matrix3d> llt(mass);
  if (llt.info() != Eigen::Success)
    throw ConfigError("vessel params: mass matrix is not positive definite");
  // D_lin must be dissipative: its symmetric part positive semidefinite.
  const Eigen::Matrix3d sym = 0.5 * (linear_damping + linear_damping.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sym);
  if (eig.eigenvalues().minCoeff() < -1e-12)
    throw ConfigError("vessel params: linear damping is not dissipative");
  if ((quadratic_damping.array() < 0.0).any())
    throw ConfigError("vessel params: quadratic damping must be >= 0");
  if (thrust_limits[0] > thrust_limits[1] ||
      yaw_moment_limits[0] > yaw_moment_limits[1])
    throw ConfigError("vessel params: actuator limits must be ordered");
  if (!(width > 0.0) || !(max_speed > 0.0))
    throw ConfigError("vessel params: width and max speed must be positive");
  mass_inverse_ = mass.inverse();
}

Eigen::Matrix3d VesselParams::coriolis(const Eigen::Vector3d& nu) const {
  const double m11 = mass(0, 0), m22 = mass(1, 1), m23 = mass(1, 2);
  const double c13 = -(m22 * nu[1] + m23 * nu[2]);
  const double c23 = m11 * nu[0];
  Eigen::Matrix3d c;
  c << 0.0, 0.0, c13,
       0.0, 0.0, c23,
       -c13, -c23, 0.0;
  return c;
}

Eigen::Vector3d VesselParams::damping_force(const Eigen::Vector3d& nu) const {
  return linear_damping * nu +
         quadratic_damping.cwiseProduct(nu.cwiseAbs().cwiseProduct(nu));
}

ControlInput VesselParams::saturate(const ControlInput& f) const {
  return {std::clamp(f.thrust, thrust_limits[0], thrust_limits[1]),
          std::clamp(f.yaw_moment, yaw_moment_limits[0], yaw_moment_limits[1])};
}

VesselParams default_vessel_params() {
  VesselParams p;
  p.mass << 2.58, 0.0, 0.0,
            0.0, 3.38, 0.10948,
            0.0, 0.10948, 15.0;
  p.linear_damping = Eigen::Vector3d(0.8, 1.0, 5.0).asDiagonal();
  p.quadratic_damping = {0.1, 1.0, 2.0};
  p.actuation << 1.0, 0.0,
                 0.0, 0.0,
                 0.0, 1.0;
  p.thrust_limits = {-0.5, 2.0};
  p.yaw_moment_limits = {-1.5, 1.5};
  p.width = 4.0;
  p.max_speed = 2.0;
  p.finalize();
  return p;
}

namespace {

const json& require(const json& doc, const std::string& key,
                    const std::string& file) {
  auto it = doc.find(key);
  if (it == doc.end())
    throw ParseError(file + ": missing required key '" + key + "'");
  return *it;
}

template <int R, int C>
Eigen::Matrix<double, R, C> read_matrix(const json& doc, const std::string& key,
                                        const std::string& file) {
  const json& m = require(doc, key, file);
  Eigen::Matrix<double, R, C> out;
  if (!m.is_array() || m.size() != static_cast<std::size_t>(R))
    throw ParseError(file + ": '" + key + "' must have " + std::to_string(R) +
                     " rows");
  for (int i = 0; i < R; ++i) {
    const json& row = m[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(C))
      throw ParseError(file + ": '" + key + "' row " + std::to_string(i) +
                       " must have " + std::to_string(C) + " entries");
    for (int j = 0; j < C; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number())
        throw ParseError(file + ": '" + key + "'[" + std::to_string(i) + "][" +
                         std::to_string(j) + "] is not a number");
      out(i, j) = v.get<double>();
    }
  }
  return out;
}

std::array<double, 2> read_pair(const json& doc, const std::string& key,
                                const std::string& file) {
  const json& v = require(doc, key, file);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ParseError(file + ": '" + key + "' must be a pair of numbers");
  return {v[0].get<double>(), v[1].get<double>()};
}

double read_number(const json& doc, const std::string& key,
                   const std::string& file) {
  const json& v = require(doc, key, file);
  if (!v.is_number()) throw ParseError(file + ": '" + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

VesselParams load_vessel_params(const std::filesystem::path& file) {
  const std::string name = file.string();
  std::ifstream in(file);
  if (!in) throw ParseError(name + ": cannot open vessel parameter file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(name + ": " + e.what());
  }
  if (require(doc, "format", name) != "asv-vessel-params")
    throw ParseError(name + ": not a vessel parameter file");
  if (require(doc, "version", name) != 1)
    throw UnsupportedVersionError(name + ": unsupported vessel params version " +
                                  require(doc, "version", name).dump());
  VesselParams p;
  p.mass = read_matrix<3, 3>(doc, "mass_matrix_si", name);
  p.linear_damping = read_matrix<3, 3>(doc, "linear_damping_matrix_si", name);
  const auto quad = read_pair(doc, "quadratic_damping_surge_sway_kg_per_m", name);
  p.quadratic_damping = {quad[0], quad[1],
                         read_number(doc, "quadratic_damping_yaw_kg_m2", name)};
  p.actuation = read_matrix<3, 2>(doc, "actuation_matrix", name);
  p.thrust_limits = read_pair(doc, "thrust_limits_n", name);
  p.yaw_moment_limits = read_pair(doc, "yaw_moment_limits_nm", name);
  p.width = read_number(doc, "width_m", name);
  p.max_speed = read_number(doc, "max_speed_m_per_s", name);
  try {
    p.finalize();
  } catch (const ConfigError& e) {
    throw ParseError(name + ": " + e.what());
  }
  return p;
}

std::string vessel_params_to_json(const VesselParams& p) {
  auto matrix = [](const auto& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  json doc;
  doc["format"] = "asv-vessel-params";
  doc["version"] = 1;
  doc["mass_matrix_si"] = matrix(p.mass);
  doc["linear_damping_matrix_si"] = matrix(p.linear_damping);
  doc["quadratic_damping_surge_sway_kg_per_m"] = {p.quadratic_damping[0],
                                                  p.quadratic_damping[1]};
  doc["quadratic_damping_yaw_kg_m2"] = p.quadratic_damping[2];
  doc["actuation_matrix"] = matrix(p.actuation);
  doc["thrust_limits_n"] = p.thrust_limits;
  doc["yaw_moment_limits_nm"] = p.yaw_moment_limits;
  doc["width_m"] = p.width;
  doc["max_speed_m_per_s"] = p.max_speed;
  return doc.dump(2);
}

Eigen::Matrix3d rotation_matrix(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Eigen::Matrix3d r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

Vector6d state_derivative(const VesselState& s, const ControlInput& f,
                          const VesselParams& p) {
  const Eigen::Vector3d nu = s.nu();
  const Eigen::Vector2d input(f.thrust, f.yaw_moment);
  Vector6d rates;
  rates.head<3>() = rotation_matrix(s.psi) * nu;
  rates.tail<3>() = p.mass_inverse() * (p.actuation * input -
                                        p.coriolis(nu) * nu -
                                        p.damping_force(nu));
  return rates;
}

VesselState step_rkf45(const VesselState& s, const ControlInput& f,
                       const VesselParams& p, double h) {
  const ControlInput held = p.saturate(f);
  auto rhs = [&](const Vector6d& y) {
    return state_derivative(VesselState::from_vector(y), held, p);
  };
  VesselState next = VesselState::from_vector(rkf45::step(rhs, s.as_vector(), h));
  next.psi = wrap_angle(next.psi);
  return next;
}

}  // namespace asv
