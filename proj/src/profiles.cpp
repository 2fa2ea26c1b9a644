#include "entroflow/profiles.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "entroflow/error.hpp"

namespace entroflow::profiles {

std::vector<double> uniform_grid(double extent, std::size_t cells) {
  require(extent > 0.0 && cells >= 16, ErrorKind::InvalidInput, "bad grid spec");
  std::vector<double> x(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) x[i] = extent * static_cast<double>(i) / cells;
  x.back() = extent;
  return x;
}

WarpedMetric flat(int n, double extent, std::size_t cells) {
  auto x = uniform_grid(extent, cells);
  std::vector<double> phi(x.size(), 1.0);
  std::vector<double> psi = x;
  return WarpedMetric(n, std::move(x), std::move(phi), std::move(psi));
}

WarpedMetric sphere_cap(int n, double s_max, std::size_t cells) {
  require(s_max < std::numbers::pi, ErrorKind::InvalidInput, "cap must stay below the pole");
  auto x = uniform_grid(s_max, cells);
  std::vector<double> phi(x.size(), 1.0), psi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) psi[i] = std::sin(x[i]);
  return WarpedMetric(n, std::move(x), std::move(phi), std::move(psi));
}

WarpedMetric cylinder_like(int n, double extent, std::size_t cells) {
  auto x = uniform_grid(extent, cells);
  std::vector<double> phi(x.size(), 1.0), psi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) psi[i] = std::tanh(x[i]);
  return WarpedMetric(n, std::move(x), std::move(phi), std::move(psi));
}

namespace {

WarpedMetric conformal(int n, std::vector<double> x, const std::vector<double>& U,
                       std::optional<double> order) {
  const double p = 2.0 / (n - 2);  // metric U^{4/(n-2)} (dx^2 + x^2 g_S)
  std::vector<double> phi(x.size()), psi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    phi[i] = std::pow(U[i], p);
    psi[i] = x[i] * phi[i];
  }
  return WarpedMetric(n, std::move(x), std::move(phi), std::move(psi), order);
}

}  // namespace

WarpedMetric plummer(int n, double mass, double core, double extent, std::size_t cells) {
  require(mass >= 0.0 && core > 0.0, ErrorKind::InvalidInput, "plummer needs m >= 0, c > 0");
  auto x = uniform_grid(extent, cells);
  std::vector<double> U(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    U[i] = 1.0 + mass / (2.0 * std::sqrt(x[i] * x[i] + core * core));
  return conformal(n, std::move(x), U, std::nullopt);
}

double gaussian_bump_conformal(double x, double mass, double width) {
  const double q = x / width;
  // erf(q)/q, series near 0
  double e;
  if (std::abs(q) < 1e-4)
    e = 2.0 / std::sqrt(std::numbers::pi) * (1.0 - q * q / 3.0);
  else
    e = std::erf(q) / q;
  return 1.0 + 0.5 * mass * e / width;
}

WarpedMetric gaussian_bump(int n, double mass, double width, double extent, std::size_t cells) {
  require(mass >= 0.0 && width > 0.0, ErrorKind::InvalidInput, "bump needs m >= 0, w > 0");
  auto x = uniform_grid(extent, cells);
  std::vector<double> U(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) U[i] = gaussian_bump_conformal(x[i], mass, width);
  return conformal(n, std::move(x), U, std::nullopt);
}

WarpedMetric power_tail(int n, double tau, double extent, std::size_t cells) {
  require(tau > 0.0, ErrorKind::InvalidInput, "tail order must be positive");
  auto x = uniform_grid(extent, cells);
  std::vector<double> phi(x.size(), 1.0), psi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r2 = x[i] * x[i];
    psi[i] = x[i] * (1.0 + r2 / std::pow(1.0 + r2, 1.0 + 0.5 * tau));
  }
  return WarpedMetric(n, std::move(x), std::move(phi), std::move(psi));
}

double DeepWell::slope(double s) const {
  const double u = std::pow(s / a, power);
  const double t = std::max(s - c, 0.0) / c;
  const double b = u / (1.0 + u) * std::pow(1.0 + t * t, -0.5 * k);
  return 1.0 - (1.0 - delta) * b;
}

double DeepWell::slope_s(double s) const {
  const double u = std::pow(s / a, power);
  const double du = s > 0.0 ? power * u / s : 0.0;
  const double t = std::max(s - c, 0.0) / c;
  const double h = std::pow(1.0 + t * t, -0.5 * k);
  const double dh = -k * t / c * std::pow(1.0 + t * t, -0.5 * k - 1.0);
  const double g = u / (1.0 + u);
  const double dg = du / ((1.0 + u) * (1.0 + u));
  return -(1.0 - delta) * (dg * h + g * dh);
}

WarpedMetric deep_well(int n, const DeepWell& p, double extent, std::size_t cells) {
  require(p.delta > 0.0 && p.delta <= 1.0 && p.a > 0.0 && p.c > 0.0 && p.k >= 0.0 &&
              p.power >= 2.0,
          ErrorKind::InvalidInput, "bad deep-well parameters");
  auto x = uniform_grid(extent, cells);
  static constexpr std::array<double, 5> gx{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> gw{0.2369268850561891, 0.4786286704993665,
                                            0.5688888888888889, 0.4786286704993665,
                                            0.2369268850561891};
  std::vector<double> phi(x.size(), 1.0), psi(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double mid = 0.5 * (x[i] + x[i + 1]);
    const double half = 0.5 * (x[i + 1] - x[i]);
    double sum = 0.0;
    for (int j = 0; j < 5; ++j) sum += gw[j] * p.slope(mid + half * gx[j]);
    psi[i + 1] = psi[i] + half * sum;
  }
  return WarpedMetric(n, std::move(x), std::move(phi), std::move(psi));
}

}  // namespace entroflow::profiles
