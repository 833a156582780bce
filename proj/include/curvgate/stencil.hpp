#pragma once

// Fourth-order central difference stencils with a Richardson error estimate.

#include <cmath>
#include <functional>

namespace curvgate {

struct StencilResult {
  double value = 0.0;
  double error_estimate = 0.0;  // |D(h) - D(h/2)|
  bool roundoff_warning = false;
};

// Steps below this are dominated by double roundoff for second derivatives.
inline constexpr double kStencilUnderflowStep = 1e-5;

inline double d1_5pt(const std::function<double(double)>& f, double h) {
  return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
}

inline double d2_5pt(const std::function<double(double)>& f, double h, double f0) {
  return (-f(-2 * h) + 16 * f(-h) - 30 * f0 + 16 * f(h) - f(2 * h)) / (12 * h * h);
}

inline double d2_5pt(const std::function<double(double)>& f, double h) { return d2_5pt(f, h, f(0.0)); }

// Value from step h, error estimated against step h/2.
inline StencilResult d1_richardson(const std::function<double(double)>& f, double h) {
  const double a = d1_5pt(f, h);
  const double b = d1_5pt(f, h / 2);
  return {a, std::abs(a - b), h < kStencilUnderflowStep};
}

inline StencilResult d2_richardson(const std::function<double(double)>& f, double h) {
  const double f0 = f(0.0);
  const double a = d2_5pt(f, h, f0);
  const double b = d2_5pt(f, h / 2, f0);
  return {a, std::abs(a - b), h < kStencilUnderflowStep};
}

// Values of a function on the offsets {-2h, -h, -h/2, 0, h/2, h, 2h}; gives
// the 5-point derivatives at step h with the step-h/2 result as error estimate.
struct StencilSamples {
  double h = 0.0;
  double f[7] = {0, 0, 0, 0, 0, 0, 0};

  static constexpr double kOffsets[7] = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};

  StencilResult d1() const {
    const double a = (f[0] - 8 * f[1] + 8 * f[5] - f[6]) / (12 * h);
    const double b = (f[1] - 8 * f[2] + 8 * f[4] - f[5]) / (6 * h);
    return {a, std::abs(a - b), h < kStencilUnderflowStep};
  }
  StencilResult d2() const {
    const double a = (-f[0] + 16 * f[1] - 30 * f[3] + 16 * f[5] - f[6]) / (12 * h * h);
    const double b = (-f[1] + 16 * f[2] - 30 * f[3] + 16 * f[4] - f[5]) / (3 * h * h);
    return {a, std::abs(a - b), h < kStencilUnderflowStep};
  }
};

}  // namespace curvgate
