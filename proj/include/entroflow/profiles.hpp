#pragma once

#include <cstddef>
#include <vector>

#include "entroflow/geometry.hpp"

namespace entroflow::profiles {

std::vector<double> uniform_grid(double extent, std::size_t cells);

// phi = 1, psi = x
WarpedMetric flat(int n, double extent, std::size_t cells);

// round sphere of radius 1 up to arclength s_max < pi
WarpedMetric sphere_cap(int n, double s_max, std::size_t cells);

// psi = tanh x: closes smoothly at the origin, unit cylinder further out
WarpedMetric cylinder_like(int n, double extent, std::size_t cells);

// conformally flat U^{4/(n-2)} delta with U = 1 + m / (2 sqrt(x^2 + c^2)); a
// smoothed Schwarzschild slice.
WarpedMetric plummer(int n, double mass, double core, double extent, std::size_t cells);

// U = 1 + (m/2) erf(x/w) / x. Scalar curvature is a positive Gaussian.
WarpedMetric gaussian_bump(int n, double mass, double width, double extent, std::size_t cells);
double gaussian_bump_conformal(double x, double mass, double width);

// psi = x (1 + x^2 / (1 + x^2)^{1 + tau/2}) ~ x + x^{1 - tau}
WarpedMetric power_tail(int n, double tau, double extent, std::size_t cells);

// Thin neck then slow opening, phi = 1 and dpsi/ds = 1 - (1 - delta) b(s) with
// b = u/(1+u) (1 + ((s-c)_+/c)^2)^{-k/2}, u = (s/a)^power.
struct DeepWell {
  double delta = 0.1;
  double a = 0.5;
  double c = 6.0;
  double k = 1.0;
  double power = 2.0;

  double slope(double s) const;    // dpsi/ds
  double slope_s(double s) const;  // d^2 psi/ds^2
};
WarpedMetric deep_well(int n, const DeepWell& p, double extent, std::size_t cells);

}  // namespace entroflow::profiles
