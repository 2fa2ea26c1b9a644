#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entroflow/geometry.hpp"

namespace entroflow {

// -(n/2) ln(2 pi n) - n/2
double s_n(int n);

// Weight of the grid-scale curvature term in the discrete energy.
inline constexpr double kCurvaturePenalty = 0.5;

// Symmetric form with v^T K v = sum_cells A (dv)^2 / ds
//   + kCurvaturePenalty * sum_nodes q h^2 (v_ss)^2
// over the nodes of a range; v_ss is the three-point second difference with
// the even ghost at the axis, h^2 the product of the adjacent cell lengths.
// The penalty is O(h^2) on smooth functions and keeps the discrete
// log-Sobolev functional bounded below at the grid scale.
// Bands are indexed from `first`: d1[j] couples first+j with first+j+1.
struct Stiffness {
  std::size_t first = 0;
  std::vector<double> d0, d1, d2;

  double quad(std::span<const double> v) const;
  // (K v) at node first + j, j = 0..size-1
  std::vector<double> apply(std::span<const double> v) const;
};
Stiffness stiffness(const WarpedMetric& g, NodeRange r);

// Range-based kernels. No preconditions are checked here.
double energy_F(std::span<const double> v, const WarpedMetric& g, NodeRange r);
double entropy_N(std::span<const double> v, const WarpedMetric& g, NodeRange r);
double norm_sq(std::span<const double> v, const WarpedMetric& g, NodeRange r);

double energy_F(const RadialFunction& v, const WarpedMetric& g, const Domain& d);
// requires unit L^2 norm on the domain (1e-8)
double entropy_N(const RadialFunction& v, const WarpedMetric& g, const Domain& d);

struct FunctionalReport {
  int n = 3;
  double alpha = 1.0;
  double F = 0.0;
  double N = 0.0;
  double L = 0.0;
  double s_n = 0.0;
  double E0_minus = 0.0;
  std::string domain;

  bool minus_infinity() const;
  // -N + alpha (n/2) ln(F + E0-) + s_n from the stored fields
  double recompute() const;
};

// E0_minus: pass a value to override; by default it is 0 when R >= 0 on the
// domain and otherwise estimated from the default probe set.
FunctionalReport log_sobolev_L(const RadialFunction& v, const WarpedMetric& g, double alpha,
                               const Domain& d, std::optional<double> E0_minus = std::nullopt);
double log_sobolev_value(double F, double N, int n, double alpha);

// Perelman's W entropy of a unit-mass density u at scale s.
double w_entropy(const RadialFunction& u, const WarpedMetric& g, double s);

struct RhoMinimum {
  double rho = 0.0;
  double W = 0.0;
  double L = 0.0;  // L(sqrt u, g, 1) evaluated independently
};
RhoMinimum inf_rho_w(const RadialFunction& u, const WarpedMetric& g);

struct QReport {
  double Q = 0.0;
  double sigma_mean = 0.0;  // u-weighted mean of R - Laplacian(ln u)
  double cut_fraction = 0.0;
  bool warn = false;  // cutoff removed more than 1% of the mass
};
QReport q_functional(const RadialFunction& u, const WarpedMetric& g);

// Pieces of the Q integrand, exposed for the soliton test.
struct SolitonFields {
  std::vector<double> f_s, f_ss;     // derivatives of ln u in arclength
  std::vector<double> hess_sph;      // (psi_s / psi) (ln u)_s
  std::vector<double> sigma;         // R - Laplacian(ln u)
  std::vector<bool> kept;
};
SolitonFields soliton_fields(const RadialFunction& u, const WarpedMetric& g);

struct TrialFunction {
  std::string label;
  RadialFunction v;
};

// Aubin-Talenti profiles, Gaussians and shell bumps; sizes are fractions of the
// total arclength so the set transforms with the metric under scaling.
std::vector<TrialFunction> sobolev_trials(const WarpedMetric& g, std::uint64_t seed = 1);

struct SobolevEstimate {
  double A = 0.0;
  std::vector<std::pair<std::string, double>> samples;  // trial label, ratio
  double kappa = 0.0;
};
// Best constant of |v|_{2n/(n-2)}^2 <= A F(v) on R^n (F carries the factor 4).
double euclidean_sobolev_A(int n);
SobolevEstimate sobolev_constant(const WarpedMetric& g, const std::vector<TrialFunction>& trials);

void write_report_header(std::ostream& os);
void write_report_row(std::ostream& os, const std::string& tag, const FunctionalReport& r,
                      std::optional<double> W = std::nullopt,
                      std::optional<double> Q = std::nullopt);

}  // namespace entroflow
