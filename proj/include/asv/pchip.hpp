#pragma once

#include <span>
#include <vector>

namespace asv {

// Monotonicity-preserving piecewise cubic Hermite interpolant (Fritsch-Butland
// slopes with the three-point shape-preserving end condition). Matches the
// slopes chosen by SciPy's PchipInterpolator.
class Pchip {
 public:
  Pchip() = default;
  // x strictly increasing, x.size() == y.size() >= 2.
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& slopes() const { return d_; }
  // Index of the interval containing t, clamped to [0, size-2].
  std::size_t interval(double t) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

std::vector<double> pchip_slopes(std::span<const double> x,
                                 std::span<const double> y);

}  // namespace asv
