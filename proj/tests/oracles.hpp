#pragma once

// Independent reference values for the unit and acceptance tests. Nothing
// here calls into the library's numerics.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Second-order forward-mode jet: value, first and second derivative.
struct Jet {
  double v = 0.0, d = 0.0, dd = 0.0;

  static Jet var(double x) { return {x, 1.0, 0.0}; }
  static Jet constant(double c) { return {c, 0.0, 0.0}; }
};

inline Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet operator*(Jet a, Jet b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}
inline Jet operator+(Jet a, double c) { return {a.v + c, a.d, a.dd}; }
inline Jet operator+(double c, Jet a) { return a + c; }
inline Jet operator*(double c, Jet a) { return {c * a.v, c * a.d, c * a.dd}; }
inline Jet operator*(Jet a, double c) { return c * a; }

// f(a) for scalar f with derivatives f0, f1, f2 at a.v
inline Jet chain(Jet a, double f0, double f1, double f2) {
  return {f0, f1 * a.d, f2 * a.d * a.d + f1 * a.dd};
}
inline Jet inv(Jet a) { return chain(a, 1.0 / a.v, -1.0 / (a.v * a.v), 2.0 / (a.v * a.v * a.v)); }
inline Jet operator/(Jet a, Jet b) { return a * inv(b); }
inline Jet operator/(Jet a, double c) { return (1.0 / c) * a; }
inline Jet sin(Jet a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet tanh(Jet a) {
  const double t = std::tanh(a.v);
  const double s = 1.0 - t * t;
  return chain(a, t, s, -2.0 * t * s);
}
inline Jet sqrt(Jet a) {
  const double r = std::sqrt(a.v);
  return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}
inline Jet pow(Jet a, double p) {
  return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0),
               p * (p - 1.0) * std::pow(a.v, p - 2.0));
}
inline Jet erf(Jet a) {
  const double g = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-a.v * a.v);
  return chain(a, std::erf(a.v), g, -2.0 * a.v * g);
}

struct Curv {
  double K1, K2, R;
};

// Curvature of phi^2 dx^2 + psi^2 g_S at x > 0 from jets of phi and psi.
inline Curv warped_curvature(int n, Jet phi, Jet psi) {
  const double ps = psi.d / phi.v;
  const double pss = (psi.dd - psi.d * phi.d / phi.v) / (phi.v * phi.v);
  Curv c;
  c.K1 = -pss / psi.v;
  c.K2 = (1.0 - ps * ps) / (psi.v * psi.v);
  c.R = (n - 1) * (2.0 * c.K1 + (n - 2) * c.K2);
  return c;
}

struct Profile {
  const char* name;
  std::function<Jet(Jet)> phi, psi;
};

// Conformally flat U^{4/(n-2)} (dx^2 + x^2 g_S), n = 3.
inline Profile conformal3(const char* name, std::function<Jet(Jet)> U) {
  return {name, [U](Jet x) { return pow(U(x), 2.0); }, [U](Jet x) { return x * pow(U(x), 2.0); }};
}

inline std::vector<Profile> five_profiles() {
  std::vector<Profile> out;
  auto one = [](Jet) { return Jet::constant(1.0); };
  out.push_back({"sphere_cap", one, [](Jet x) { return sin(x); }});
  out.push_back({"cylinder_like", one, [](Jet x) { return tanh(x); }});
  out.push_back(conformal3("plummer", [](Jet x) {
    return 1.0 + 0.5 * inv(sqrt(x * x + 1.0));  // m = 1, c = 1
  }));
  out.push_back(conformal3("gaussian_bump", [](Jet x) {
    // m = 1, w = 1: 1 + erf(x) / (2x)
    return 1.0 + 0.5 * erf(x) / x;
  }));
  out.push_back({"power_tail", one, [](Jet x) {
                   const Jet r2 = x * x;
                   return x * (1.0 + r2 * pow(1.0 + r2, -1.5));  // tau = 1
                 }});
  return out;
}

// Round unit 3-sphere: |B(r)| = pi (2r - sin 2r).
inline double s3_ball_volume(double r) { return std::numbers::pi * (2.0 * r - std::sin(2.0 * r)); }

// Sharp Sobolev constant of R^3: S |u|_6^2 <= |grad u|_2^2 with
// S = n(n-2)/4 |S^n|^{2/n}, |S^3| = 2 pi^2. In the convention F = 4|grad v|^2
// the best A in |v|_6^2 <= A F(v) is 1/(4S).
inline double sobolev_A3() {
  const double S = 0.75 * std::pow(2.0 * std::numbers::pi * std::numbers::pi, 2.0 / 3.0);
  return 1.0 / (4.0 * S);
}

// Heat kernel density (4 pi s)^{-n/2} e^{-x^2/(4s)} on R^n.
inline double heat_kernel(int n, double s, double x) {
  return std::pow(4.0 * std::numbers::pi * s, -0.5 * n) * std::exp(-x * x / (4.0 * s));
}

// Least-squares slope of log(err) against log(h).
inline double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= h.size();
  my /= h.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace oracle
