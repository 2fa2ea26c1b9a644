#include "entroflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "entroflow/error.hpp"

namespace entroflow {

double sphere_area(int k) {
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double ball_volume_unit(int n) { return sphere_area(n - 1) / n; }

WarpedMetric::WarpedMetric(int n, std::vector<double> x, std::vector<double> phi,
                           std::vector<double> psi, std::optional<double> af_order)
    : n_(n), phi_(std::move(phi)), psi_(std::move(psi)), af_order_(af_order) {
  require(n >= 3, ErrorKind::InvalidInput, "dimension must be at least 3");
  require(x.size() >= 17, ErrorKind::InvalidInput, "grid needs at least 17 nodes");
  require(phi_.size() == x.size() && psi_.size() == x.size(), ErrorKind::InvalidInput,
          "phi, psi and grid have different lengths");
  require(x[0] == 0.0, ErrorKind::InvalidInput, "grid must start at x = 0");
  for (std::size_t i = 1; i < x.size(); ++i)
    require(std::isfinite(x[i]) && x[i] > x[i - 1], ErrorKind::InvalidInput,
            "grid is not strictly increasing");
  x_ = std::make_shared<const std::vector<double>>(std::move(x));
  stencil_ = std::make_shared<const RadialStencil>(*x_);
  build();

  require(std::abs(psi_s_[0] - 1.0) <= 5e-3, ErrorKind::DegenerateMetric,
          "metric is not smooth at the origin: dpsi/ds(0) = " + std::to_string(psi_s_[0]));
  if (af_order_) {
    require(*af_order_ > 0.0, ErrorKind::InvalidInput, "af order must be positive");
    const auto fit = af_decay_order(*this);
    require(fit.exact || fit.tau >= 0.5 * *af_order_, ErrorKind::InvalidInput,
            "tail decays slower than the declared af order (fit " + std::to_string(fit.tau) +
                ")");
  }
}

WarpedMetric WarpedMetric::with_profiles(std::vector<double> phi, std::vector<double> psi) const {
  require(phi.size() == size() && psi.size() == size(), ErrorKind::InvalidInput,
          "profile length does not match grid");
  WarpedMetric g;
  g.n_ = n_;
  g.x_ = x_;
  g.stencil_ = stencil_;
  g.phi_ = std::move(phi);
  g.psi_ = std::move(psi);
  g.af_order_ = af_order_;
  g.build();
  return g;
}

void WarpedMetric::build() {
  const std::size_t np = x_->size();
  const auto& x = *x_;
  for (std::size_t i = 0; i < np; ++i) {
    require(std::isfinite(phi_[i]) && phi_[i] > 0.0, ErrorKind::DegenerateMetric,
            "phi must be positive (node " + std::to_string(i) + ")");
    require(std::isfinite(psi_[i]), ErrorKind::DegenerateMetric, "psi is not finite");
    if (i > 0)
      require(psi_[i] > 0.0, ErrorKind::DegenerateMetric,
              "psi vanishes at interior node " + std::to_string(i));
  }
  require(std::abs(psi_[0]) <= 1e-12 * (1.0 + std::abs(psi_[1])), ErrorKind::DegenerateMetric,
          "psi(0) must be 0");
  psi_[0] = 0.0;

  const auto dpsi = stencil_->apply(psi_, Parity::Odd);
  const auto dphi = stencil_->apply(phi_, Parity::Even);
  psi_x_ = dpsi.d1;
  phi_x_ = dphi.d1;

  psi_s_.resize(np);
  psi_ss_.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    psi_s_[i] = dpsi.d1[i] / phi_[i];
    psi_ss_[i] = (dpsi.d2[i] - dpsi.d1[i] * dphi.d1[i] / phi_[i]) / (phi_[i] * phi_[i]);
  }

  // arclength by corrected trapezoid
  s_.assign(np, 0.0);
  for (std::size_t i = 0; i + 1 < np; ++i) {
    const double dx = x[i + 1] - x[i];
    s_[i + 1] = s_[i] + 0.5 * dx * (phi_[i] + phi_[i + 1]) -
                dx * dx * dx / 24.0 * (dphi.d2[i] + dphi.d2[i + 1]);
  }

  auto& c = curv_;
  c.K1.assign(np, 0.0);
  c.K2.assign(np, 0.0);
  for (std::size_t i = 1; i < np; ++i) {
    c.K1[i] = -psi_ss_[i] / psi_[i];
    c.K2[i] = (1.0 - psi_s_[i] * psi_s_[i]) / (psi_[i] * psi_[i]);
  }
  // even in s at the origin: drop the s^2 term
  const double a1 = s_[1] * s_[1];
  const double a2 = s_[2] * s_[2];
  c.K1[0] = (a2 * c.K1[1] - a1 * c.K1[2]) / (a2 - a1);
  c.K2[0] = (a2 * c.K2[1] - a1 * c.K2[2]) / (a2 - a1);
  c.Ric_rad.resize(np);
  c.Ric_sph.resize(np);
  c.R.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    c.Ric_rad[i] = (n_ - 1) * c.K1[i];
    c.Ric_sph[i] = c.K1[i] + (n_ - 2) * c.K2[i];
    c.R[i] = (n_ - 1) * (2.0 * c.K1[i] + (n_ - 2) * c.K2[i]);
  }

  const double om = sphere_area(n_ - 1);
  density_.resize(np);
  for (std::size_t i = 0; i < np; ++i) density_[i] = om * std::pow(psi_[i], n_ - 1) * phi_[i];
  cell_area_.resize(np - 1);
  cell_ds_.resize(np - 1);
  for (std::size_t i = 0; i + 1 < np; ++i) {
    cell_area_[i] = om * std::pow(0.5 * (psi_[i] + psi_[i + 1]), n_ - 1);
    cell_ds_[i] = s_[i + 1] - s_[i];
  }

  // enclosed volume: corrected trapezoid in s on omega psi^{n-1}
  enclosed_.assign(np, 0.0);
  std::vector<double> f(np), df(np);
  for (std::size_t i = 0; i < np; ++i) {
    f[i] = om * std::pow(psi_[i], n_ - 1);
    df[i] = om * (n_ - 1) * std::pow(psi_[i], n_ - 2) * psi_s_[i];
  }
  for (std::size_t i = 0; i + 1 < np; ++i) {
    const double h = cell_ds_[i];
    enclosed_[i + 1] = enclosed_[i] + 0.5 * h * (f[i] + f[i + 1]) - h * h / 12.0 * (df[i + 1] - df[i]);
  }

  // dual cells [s_{i-1/2}, s_{i+1/2}]; Hermite midpoint of the enclosed volume
  std::vector<double> mid(np - 1);
  for (std::size_t i = 0; i + 1 < np; ++i)
    mid[i] = 0.5 * (enclosed_[i] + enclosed_[i + 1]) + cell_ds_[i] * (f[i] - f[i + 1]) / 8.0;
  weights_.resize(np);
  weights_[0] = mid[0];
  for (std::size_t i = 1; i + 1 < np; ++i) weights_[i] = mid[i] - mid[i - 1];
  weights_[np - 1] = enclosed_[np - 1] - mid[np - 2];
}

double WarpedMetric::origin_volume() const { return weights_[0]; }

double WarpedMetric::min_ds() const { return *std::min_element(cell_ds_.begin(), cell_ds_.end()); }

const CurvatureData& curvature(const WarpedMetric& g) { return g.curvature(); }

RadialFunction volume_measure(const WarpedMetric& g) { return g.density(); }

double integrate(const WarpedMetric& g, std::span<const double> h) {
  require(h.size() == g.size(), ErrorKind::InvalidInput, "function not aligned with grid");
  double sum = 0.0;
  const auto& w = g.weights();
  for (std::size_t i = 0; i < h.size(); ++i) sum += w[i] * h[i];
  return sum;
}

double enclosed_volume(const WarpedMetric& g, double s) {
  const auto& S = g.s();
  require(s >= 0.0 && s <= S.back() * (1.0 + 1e-12), ErrorKind::OutOfDomain,
          "radius exceeds the grid");
  s = std::min(s, S.back());
  std::size_t k = static_cast<std::size_t>(std::upper_bound(S.begin(), S.end(), s) - S.begin());
  k = std::clamp<std::size_t>(k, 1, S.size() - 1) - 1;
  const double h = S[k + 1] - S[k];
  const double t = (s - S[k]) / h;
  const double om = sphere_area(g.dim() - 1);
  const double f0 = om * std::pow(g.psi()[k], g.dim() - 1);
  const double f1 = om * std::pow(g.psi()[k + 1], g.dim() - 1);
  const double v0 = g.enclosed()[k];
  const double v1 = g.enclosed()[k + 1];
  // cubic Hermite with exact slopes dV/ds = omega psi^{n-1}
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * f0 + (-2 * t3 + 3 * t2) * v1 +
         (t3 - t2) * h * f1;
}

double ball_volume(const WarpedMetric& g, double r) { return enclosed_volume(g, r); }

WarpedMetric scale_metric(const WarpedMetric& g, double a) {
  require(a > 0.0 && std::isfinite(a), ErrorKind::InvalidInput, "scale factor must be positive");
  const double k = std::sqrt(a);
  std::vector<double> phi = g.phi();
  std::vector<double> psi = g.psi();
  for (auto& p : phi) p *= k;
  for (auto& p : psi) p *= k;
  return g.with_profiles(std::move(phi), std::move(psi));
}

WarpedMetric radial_reparametrize(const WarpedMetric& g, std::vector<double> new_grid,
                                  std::span<const double> m, std::span<const double> dm) {
  const std::size_t np = new_grid.size();
  require(m.size() == np && dm.size() == np, ErrorKind::InvalidInput,
          "map samples not aligned with the new grid");
  require(std::abs(m[0]) <= 1e-12, ErrorKind::InvalidInput, "map must fix the origin");
  for (std::size_t i = 0; i < np; ++i) {
    require(dm[i] > 0.0, ErrorKind::InvalidInput, "map is not strictly increasing");
    if (i > 0) require(m[i] > m[i - 1], ErrorKind::InvalidInput, "map is not strictly increasing");
  }
  require(m[np - 1] <= g.x().back() * (1.0 + 1e-12), ErrorKind::OutOfDomain,
          "map leaves the grid");
  std::vector<double> phi(np), psi(np);
  for (std::size_t i = 0; i < np; ++i) {
    phi[i] = interp_cubic_radial(g.x(), g.phi(), m[i], Parity::Even) * dm[i];
    psi[i] = i == 0 ? 0.0 : interp_cubic_radial(g.x(), g.psi(), m[i], Parity::Odd);
  }
  return WarpedMetric(g.dim(), std::move(new_grid), std::move(phi), std::move(psi));
}

WarpedMetric radial_reparametrize(const WarpedMetric& g, std::vector<double> new_grid,
                                  const std::function<double(double)>& m,
                                  const std::function<double(double)>& dm) {
  std::vector<double> ms(new_grid.size()), dms(new_grid.size());
  for (std::size_t i = 0; i < new_grid.size(); ++i) {
    ms[i] = m(new_grid[i]);
    dms[i] = dm(new_grid[i]);
  }
  return radial_reparametrize(g, std::move(new_grid), ms, dms);
}

AFDiagnostics af_decay_order(const WarpedMetric& g) {
  const auto& S = g.s();
  const std::size_t i0 = 3 * g.last() / 4;
  std::vector<double> s, y;
  for (std::size_t i = std::max<std::size_t>(i0, 1); i < g.size(); ++i) {
    s.push_back(S[i]);
    y.push_back(g.psi()[i] / S[i]);
  }
  AFDiagnostics out;
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo <= 1e-10 * std::abs(*hi)) {
    out.exact = true;
    out.L_inf = y.back();
    out.tau = std::numeric_limits<double>::infinity();
    return out;
  }
  // linear least squares in (L, C) for fixed tau
  auto fit = [&](double tau, double& L, double& C) {
    double sz = 0, szz = 0, sy = 0, szy = 0;
    const double m = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double z = std::pow(s[i], -tau);
      sz += z;
      szz += z * z;
      sy += y[i];
      szy += z * y[i];
    }
    const double det = m * szz - sz * sz;
    C = (m * szy - sz * sy) / det;
    L = (sy - C * sz) / m;
    double r = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = y[i] - L - C * std::pow(s[i], -tau);
      r += e * e;
    }
    return r;
  };
  double L = 0, C = 0;
  out.tau = golden_section([&](double t) { return fit(t, L, C); }, 0.05, 12.0, 1e-6);
  out.fit_error = std::sqrt(fit(out.tau, L, C) / static_cast<double>(s.size()));
  out.L_inf = L;
  out.C = C;
  return out;
}

std::string Domain::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Ball: os << "ball(r=" << r << ")"; break;
    case Kind::Exterior: os << "exterior(r=" << r << ")"; break;
    case Kind::Whole: os << "whole"; break;
  }
  return os.str();
}

namespace {

std::size_t nearest_node(const std::vector<double>& s, double r) {
  auto it = std::lower_bound(s.begin(), s.end(), r);
  if (it == s.end()) return s.size() - 1;
  std::size_t k = static_cast<std::size_t>(it - s.begin());
  if (k > 0 && r - s[k - 1] < s[k] - r) --k;
  return k;
}

}  // namespace

NodeRange resolve(const Domain& d, const WarpedMetric& g) {
  const auto& S = g.s();
  NodeRange nr{0, g.last()};
  if (d.kind == Domain::Kind::Whole) return nr;
  require(d.r > 0.0, ErrorKind::InvalidInput, "domain radius must be positive");
  require(d.r <= S.back() * (1.0 + 1e-9), ErrorKind::OutOfDomain,
          "domain radius " + std::to_string(d.r) + " exceeds the grid");
  const std::size_t k = nearest_node(S, d.r);
  if (d.kind == Domain::Kind::Ball) {
    nr.last = k;
  } else {
    nr.first = k;
  }
  require(nr.last >= nr.first + 8, ErrorKind::InvalidInput, "domain has too few nodes");
  return nr;
}

void write_metric_csv(std::ostream& os, const WarpedMetric& g) {
  os << "x,phi,psi,R\n" << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i)
    os << g.x()[i] << ',' << g.phi()[i] << ',' << g.psi()[i] << ',' << g.curvature().R[i] << '\n';
}

WarpedMetric read_metric_csv(std::istream& is, int n) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::InvalidInput, "empty metric csv");
  std::vector<double> x, phi, psi;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    require(std::getline(ls, a, ',') && std::getline(ls, b, ',') && std::getline(ls, c, ','),
            ErrorKind::InvalidInput, "malformed metric csv row: " + line);
    try {
      x.push_back(std::stod(a));
      phi.push_back(std::stod(b));
      psi.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, "malformed metric csv row: " + line);
    }
  }
  return WarpedMetric(n, std::move(x), std::move(phi), std::move(psi));
}

}  // namespace entroflow
