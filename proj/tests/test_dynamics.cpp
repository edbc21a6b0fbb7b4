#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "asv/dynamics.hpp"
#include "asv/io.hpp"
#include "asv/rng.hpp"

using namespace asv;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

VesselParams undamped() {
  VesselParams p = default_vessel_params();
  p.linear_damping.setZero();
  p.quadratic_damping.setZero();
  p.finalize();
  return p;
}

// Coriolis-centripetal matrix for a general 3-DOF mass matrix.
Eigen::Matrix3d coriolis_reference(const Eigen::Matrix3d& m, const Eigen::Vector3d& nu) {
  const double a = m(1, 0) * nu[0] + m(1, 1) * nu[1] + m(1, 2) * nu[2];
  const double b = m(0, 0) * nu[0] + m(0, 1) * nu[1] + m(0, 2) * nu[2];
  Eigen::Matrix3d c;
  c << 0, 0, -a,
       0, 0, b,
       a, -b, 0;
  return c;
}

VesselState random_state(Rng& rng) {
  return {rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-3, 3),
          rng.uniform(-2, 2),   rng.uniform(-1, 1),   rng.uniform(-0.5, 0.5)};
}

}  // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
  CHECK(angle_diff(-3.0, 3.0) == doctest::Approx(2 * kPi - 6.0));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = wrap_angle(rng.uniform(-100, 100));
    CHECK(a > -kPi);
    CHECK(a <= kPi);
  }
}

TEST_CASE("rotation matrix") {
  CHECK(rotation_matrix(0.0).isApprox(Eigen::Matrix3d::Identity(), 0.0));
  const Eigen::Vector3d ex = rotation_matrix(kPi / 2) * Eigen::Vector3d::UnitX();
  CHECK((ex - Eigen::Vector3d::UnitY()).norm() < 1e-15);
  const Eigen::Matrix3d r = rotation_matrix(0.3);
  CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.determinant() == doctest::Approx(1.0));
}

TEST_CASE("shipped parameter file equals the built-in defaults") {
  const VesselParams file = load_vessel_params(fs::path(ASV_SOURCE_DIR) / "config/vessel_default.json");
  const VesselParams def = default_vessel_params();
  CHECK(file.mass == def.mass);
  CHECK(file.linear_damping == def.linear_damping);
  CHECK(file.quadratic_damping == def.quadratic_damping);
  CHECK(file.actuation == def.actuation);
  CHECK(file.thrust_limits == def.thrust_limits);
  CHECK(file.yaw_moment_limits == def.yaw_moment_limits);
  CHECK(file.width == def.width);
  CHECK(file.max_speed == def.max_speed);
}

TEST_CASE("parameter invariants") {
  const VesselParams p = default_vessel_params();
  SUBCASE("M symmetric positive definite with the symmetric sparsity pattern") {
    CHECK(p.mass == p.mass.transpose());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(p.mass).eigenvalues().minCoeff() > 0.0);
    CHECK(p.mass(0, 1) == 0.0);
    CHECK(p.mass(0, 2) == 0.0);
  }
  SUBCASE("C(nu) skew-symmetric and matches the general construction") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      const Eigen::Vector3d nu(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
      const Eigen::Matrix3d c = p.coriolis(nu);
      CHECK((c + c.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((c - coriolis_reference(p.mass, nu)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(std::abs(nu.dot(c * nu)) < 1e-12);
    }
  }
  SUBCASE("damping is dissipative") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector3d nu(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
      CHECK(nu.dot(p.damping_force(nu)) >= 0.0);
    }
  }
  SUBCASE("validation rejects bad matrices") {
    VesselParams q = p;
    q.mass(0, 1) = q.mass(1, 0) = 0.5;
    CHECK_THROWS_AS(q.finalize(), ConfigError);
    q = p;
    q.mass(2, 2) = -1.0;
    CHECK_THROWS_AS(q.finalize(), ConfigError);
    q = p;
    q.mass(1, 2) = 5.0;
    CHECK_THROWS_AS(q.finalize(), ConfigError);
    q = p;
    q.linear_damping(1, 1) = -1.0;
    CHECK_THROWS_AS(q.finalize(), ConfigError);
    q = p;
    q.thrust_limits = {1.0, -1.0};
    CHECK_THROWS_AS(q.finalize(), ConfigError);
  }
}

TEST_CASE("state derivative") {
  const VesselParams p = default_vessel_params();
  SUBCASE("equilibrium") {
    CHECK(state_derivative(VesselState{3, 4, 1, 0, 0, 0}, {}, p) == Vector6d::Zero());
  }
  SUBCASE("pure surge kinematics without damping") {
    const Vector6d d = state_derivative(VesselState{0, 0, 0, 1, 0, 0}, {}, undamped());
    CHECK(d.head<3>() == Eigen::Vector3d(1, 0, 0));
  }
  SUBCASE("matches the model equations evaluated independently") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
      const VesselState s = random_state(rng);
      const ControlInput f{rng.uniform(-0.5, 2.0), rng.uniform(-1.5, 1.5)};
      const Eigen::Vector3d nu = s.nu();
      const Eigen::Vector3d damp = p.linear_damping * nu +
                                   Eigen::Vector3d(p.quadratic_damping[0] * std::abs(nu[0]) * nu[0],
                                                   p.quadratic_damping[1] * std::abs(nu[1]) * nu[1],
                                                   p.quadratic_damping[2] * std::abs(nu[2]) * nu[2]);
      const Eigen::Vector3d rhs =
          p.actuation * Eigen::Vector2d(f.thrust, f.yaw_moment) - coriolis_reference(p.mass, nu) * nu - damp;
      const Eigen::Vector3d nudot = p.mass.partialPivLu().solve(rhs);
      const Eigen::Vector3d etadot(std::cos(s.psi) * nu[0] - std::sin(s.psi) * nu[1],
                                   std::sin(s.psi) * nu[0] + std::cos(s.psi) * nu[1], nu[2]);
      const Vector6d d = state_derivative(s, f, p);
      CHECK((d.head<3>() - etadot).norm() < 1e-12);
      CHECK((d.tail<3>() - nudot).norm() < 1e-10);
    }
  }
  SUBCASE("agrees with a finite difference of the integrator as h -> 0") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      VesselState s = random_state(rng);
      s.psi = rng.uniform(-2.5, 2.5);  // keep clear of the wrap
      const ControlInput f{rng.uniform(-0.5, 2.0), rng.uniform(-1.5, 1.5)};
      const double h = 1e-6;
      const Vector6d fd = (step_rkf45(s, f, p, h).as_vector() - s.as_vector()) / h;
      const Vector6d d = state_derivative(s, f, p);
      CHECK((fd - d).norm() < 1e-5 * (1.0 + d.norm()));
    }
  }
}

TEST_CASE("RKF45 stepping") {
  const VesselParams p = default_vessel_params();
  SUBCASE("fixed point") {
    const VesselState s{1, 2, 0.5, 0, 0, 0};
    for (double h : {0.01, 0.14, 1.0}) CHECK(step_rkf45(s, {}, p, h) == s);
  }
  SUBCASE("fifth-order convergence on an analytic linear ODE") {
    // y' = A y with A a damped rotation; y(t) = exp(A t) y0 in closed form.
    const double a = -0.3, w = 2.0, T = 2.0;
    Eigen::Matrix2d A;
    A << a, -w, w, a;
    const Eigen::Vector2d y0(1.0, 0.5);
    const Eigen::Vector2d exact =
        std::exp(a * T) * (Eigen::Matrix2d() << std::cos(w * T), -std::sin(w * T),
                           std::sin(w * T), std::cos(w * T)).finished() * y0;
    std::vector<double> errs;
    for (double h : {0.2, 0.1, 0.05}) {
      Eigen::Vector2d y = y0;
      const int n = static_cast<int>(std::lround(T / h));
      for (int k = 0; k < n; ++k)
        y = rkf45::step([&](const Eigen::Vector2d& z) -> Eigen::Vector2d { return A * z; }, y, h);
      errs.push_back((y - exact).norm());
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CAPTURE(order1);
    CAPTURE(order2);
    CHECK(order1 >= 4.5);
    CHECK(order2 >= 4.5);
  }
  SUBCASE("kinetic energy conserved without control and damping") {
    const VesselParams q = undamped();
    VesselState s{0, 0, 0, 1.0, 0.1, 0.05};
    const double e0 = q.kinetic_energy(s.nu());
    double drift = 0.0;
    for (int k = 0; k < 100; ++k) {
      s = step_rkf45(s, {}, q, 0.14);
      drift = std::max(drift, std::abs(q.kinetic_energy(s.nu()) - e0));
    }
    CAPTURE(drift);
    CHECK(drift < 1e-8);
  }
  SUBCASE("kinetic energy non-increasing with damping") {
    VesselState s{0, 0, 0, 2.0, -0.5, 0.4};
    double e = p.kinetic_energy(s.nu());
    for (int k = 0; k < 300; ++k) {
      s = step_rkf45(s, {}, p, 0.14);
      const double e1 = p.kinetic_energy(s.nu());
      CHECK(e1 <= e + 1e-15);
      e = e1;
    }
  }
  SUBCASE("yaw invariance of the body-frame model") {
    Rng rng(6);
    const double psi0 = 1.1;
    VesselState a{0, 0, 0, 0.5, 0.1, 0.0}, b{0, 0, psi0, 0.5, 0.1, 0.0};
    for (int k = 0; k < 200; ++k) {
      const ControlInput f{rng.uniform(-0.5, 2.0), rng.uniform(-1.5, 1.5)};
      a = step_rkf45(a, f, p, 0.14);
      b = step_rkf45(b, f, p, 0.14);
      const Eigen::Vector2d rb = Eigen::Rotation2Dd(-psi0) * Eigen::Vector2d(b.x, b.y);
      CHECK(std::abs(rb.x() - a.x) < 1e-9);
      CHECK(std::abs(rb.y() - a.y) < 1e-9);
      CHECK(std::abs(angle_diff(b.psi - psi0, a.psi)) < 1e-9);
      CHECK(std::abs(b.u - a.u) < 1e-12);
    }
  }
  SUBCASE("controls saturate before integration and psi stays wrapped") {
    const VesselState s{0, 0, 3.1, 1.0, 0.0, 0.3};
    const VesselState big = step_rkf45(s, {100.0, -100.0}, p, 0.14);
    const VesselState lim = step_rkf45(s, {p.thrust_limits[1], p.yaw_moment_limits[0]}, p, 0.14);
    CHECK(big == lim);
    VesselState t = s;
    for (int k = 0; k < 100; ++k) {
      t = step_rkf45(t, {2.0, 1.5}, p, 0.14);
      CHECK(t.psi > -kPi);
      CHECK(t.psi <= kPi);
    }
  }
  SUBCASE("non-finite state reports the failing stage") {
    VesselState s{0, 0, 0, std::nan(""), 0, 0};
    try {
      step_rkf45(s, {}, p, 0.14);
      FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
      CHECK(e.stage() == 1);
    }
  }
}

TEST_CASE("vessel parameter files") {
  const fs::path dir = fs::temp_directory_path() / "asv_test_dynamics";
  fs::create_directories(dir);
  SUBCASE("round trip") {
    const VesselParams p = default_vessel_params();
    write_file_atomic(dir / "v.json", vessel_params_to_json(p));
    const VesselParams q = load_vessel_params(dir / "v.json");
    CHECK(q.mass == p.mass);
    CHECK(q.linear_damping == p.linear_damping);
    CHECK(q.yaw_moment_limits == p.yaw_moment_limits);
  }
  SUBCASE("missing entry names the key") {
    std::string text = read_file(fs::path(ASV_SOURCE_DIR) / "config/vessel_default.json");
    const auto pos = text.find("\"width_m\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 9, "\"widthXX\"");
    write_file_atomic(dir / "bad.json", text);
    try {
      load_vessel_params(dir / "bad.json");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("width_m") != std::string::npos);
    }
  }
  SUBCASE("unsupported version") {
    std::string text = read_file(fs::path(ASV_SOURCE_DIR) / "config/vessel_default.json");
    text.replace(text.find("\"version\": 1"), 12, "\"version\": 9");
    write_file_atomic(dir / "v9.json", text);
    CHECK_THROWS_AS(load_vessel_params(dir / "v9.json"), UnsupportedVersionError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_vessel_params(dir / "nope.json"), ParseError);
  }
  fs::remove_all(dir);
}
