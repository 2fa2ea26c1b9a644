#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entroflow/numerics.hpp"

namespace entroflow {

// Samples on the metric grid. Test functions v, densities u, potentials f.
using RadialFunction = std::vector<double>;

// Area of the unit k-sphere.
double sphere_area(int k);
// Volume of the unit n-ball.
double ball_volume_unit(int n);

struct CurvatureData {
  std::vector<double> K1;       // -psi_ss / psi
  std::vector<double> K2;       // (1 - psi_s^2) / psi^2
  std::vector<double> Ric_rad;  // (n-1) K1
  std::vector<double> Ric_sph;  // K1 + (n-2) K2
  std::vector<double> R;
};

// g = phi(x)^2 dx^2 + psi(x)^2 g_{S^{n-1}} on a radial grid 0 = x_0 < ... < x_N.
// Everything derived (arclength, curvature, quadrature) is computed once at
// construction; instances are immutable.
class WarpedMetric {
 public:
  WarpedMetric(int n, std::vector<double> x, std::vector<double> phi, std::vector<double> psi,
               std::optional<double> af_order = std::nullopt);

  // Same grid (and stencils), new profiles.
  WarpedMetric with_profiles(std::vector<double> phi, std::vector<double> psi) const;

  int dim() const { return n_; }
  std::size_t size() const { return x_->size(); }
  std::size_t last() const { return x_->size() - 1; }
  const std::vector<double>& x() const { return *x_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& psi() const { return psi_; }
  std::optional<double> af_order() const { return af_order_; }
  const RadialStencil& stencil() const { return *stencil_; }

  // arclength from the origin at each node
  const std::vector<double>& s() const { return s_; }
  const std::vector<double>& psi_s() const { return psi_s_; }
  const std::vector<double>& psi_ss() const { return psi_ss_; }
  const std::vector<double>& psi_x() const { return psi_x_; }
  const std::vector<double>& phi_x() const { return phi_x_; }
  const CurvatureData& curvature() const { return curv_; }

  // omega_{n-1} psi^{n-1} phi at nodes (density of dg w.r.t. dx)
  const std::vector<double>& density() const { return density_; }
  // dual-cell volumes: sum_i weight_i h_i approximates the integral of h
  const std::vector<double>& weights() const { return weights_; }
  // per cell [i, i+1]: omega_{n-1} psi_mid^{n-1} and arclength increment
  const std::vector<double>& cell_area() const { return cell_area_; }
  const std::vector<double>& cell_ds() const { return cell_ds_; }
  // dual-cell volume of the origin node
  double origin_volume() const;

  // Volume enclosed by the coordinate sphere through each node.
  const std::vector<double>& enclosed() const { return enclosed_; }

  double total_arclength() const { return s_.back(); }
  double min_ds() const;

 private:
  WarpedMetric() = default;
  void build();

  int n_ = 3;
  std::shared_ptr<const std::vector<double>> x_;
  std::shared_ptr<const RadialStencil> stencil_;
  std::vector<double> phi_, psi_;
  std::optional<double> af_order_;

  std::vector<double> s_, psi_x_, phi_x_, psi_s_, psi_ss_;
  CurvatureData curv_;
  std::vector<double> density_, weights_, cell_area_, cell_ds_, enclosed_;
};

const CurvatureData& curvature(const WarpedMetric& g);
RadialFunction volume_measure(const WarpedMetric& g);
double integrate(const WarpedMetric& g, std::span<const double> h);

// |B(0, r)| for arclength radius r.
double ball_volume(const WarpedMetric& g, double r);
// Volume enclosed by the coordinate sphere at arclength s, interpolated.
double enclosed_volume(const WarpedMetric& g, double s);

WarpedMetric scale_metric(const WarpedMetric& g, double a);

// Pullback by a radial map: the new coordinate y is sent to old coordinate
// m(y). Samples m(y_i) and m'(y_i) on the new grid y are supplied.
WarpedMetric radial_reparametrize(const WarpedMetric& g, std::vector<double> new_grid,
                                  std::span<const double> m, std::span<const double> dm);
WarpedMetric radial_reparametrize(const WarpedMetric& g, std::vector<double> new_grid,
                                  const std::function<double(double)>& m,
                                  const std::function<double(double)>& dm);

// Fit psi/s = L_inf + C s^{-tau} on the outer quarter of the grid.
struct AFDiagnostics {
  double L_inf = 1.0;
  double tau = 0.0;
  double C = 0.0;
  double fit_error = 0.0;
  bool exact = false;  // tail is exactly conical, tau undefined (infinite)
};
AFDiagnostics af_decay_order(const WarpedMetric& g);

// Radial domains, snapped to grid nodes.
struct Domain {
  enum class Kind { Ball, Exterior, Whole };
  Kind kind = Kind::Whole;
  double r = 0.0;  // ball radius or inner radius of the exterior

  static Domain ball(double r) { return {Kind::Ball, r}; }
  static Domain exterior(double r) { return {Kind::Exterior, r}; }
  static Domain whole() { return {Kind::Whole, 0.0}; }

  std::string label() const;
};

// Node range [first, last]. Test functions vanish at last, and at first when
// first > 0.
struct NodeRange {
  std::size_t first = 0;
  std::size_t last = 0;
  bool inner_boundary() const { return first > 0; }
};
NodeRange resolve(const Domain& d, const WarpedMetric& g);

// CSV with columns x, phi, psi, R.
void write_metric_csv(std::ostream& os, const WarpedMetric& g);
WarpedMetric read_metric_csv(std::istream& is, int n);

}  // namespace entroflow
