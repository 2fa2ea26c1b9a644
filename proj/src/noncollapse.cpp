#include "entroflow/noncollapse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "entroflow/error.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/numerics.hpp"

namespace entroflow {

namespace {

constexpr std::array<double, 8> kGx{-0.9602898564975363, -0.7966664774136267,
                                    -0.5255324099163290, -0.1834346424956498,
                                    0.1834346424956498,  0.5255324099163290,
                                    0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGw{0.1012285362903763, 0.2223810344533745,
                                    0.3137066661325069, 0.3626837833783620,
                                    0.3626837833783620, 0.3137066661325069,
                                    0.2223810344533745, 0.1012285362903763};

// Unit-speed geodesics of ds^2 + psi(s)^2 dtheta^2, with alpha the angle to
// the outward radial direction, plus the variation with respect to the launch
// angle. y = (s, theta, alpha, ds, dtheta, dalpha).
struct Meridian {
  const WarpedMetric& g;

  struct Local {
    double psi, psi_s, psi_ss;
  };

  Local at(double s) const {
    const auto& S = g.s();
    return {interp_cubic_radial(S, g.psi(), s, Parity::Odd),
            interp_cubic_radial(S, g.psi_s(), s, Parity::Even),
            interp_cubic_radial(S, g.psi_ss(), s, Parity::Odd)};
  }

  std::array<double, 6> rhs(const std::array<double, 6>& y) const {
    const auto [p, ps, pss] = at(y[0]);
    const double ca = std::cos(y[2]), sa = std::sin(y[2]);
    std::array<double, 6> d;
    d[0] = ca;
    d[1] = sa / p;
    d[2] = -ps * sa / p;
    d[3] = -sa * y[5];
    d[4] = ca / p * y[5] - sa * ps / (p * p) * y[3];
    d[5] = -(pss / p - ps * ps / (p * p)) * sa * y[3] - ps * ca / p * y[5];
    return d;
  }

  // Endpoint after arclength r. Returns (s, theta, dtheta/dgamma).
  std::array<double, 3> shoot(double s0, double gamma, double r) const {
    std::array<double, 6> y{s0, 0.0, gamma, 0.0, 0.0, 1.0};
    const double hmax = r / 256.0;
    double sigma = 0.0;
    while (sigma < r) {
      const double psi = at(y[0]).psi;
      require(psi > 0.0, ErrorKind::NumericalInconsistency, "geodesic reached the axis");
      double h = std::min({hmax, 0.05 * psi, r - sigma});
      auto add = [&](const std::array<double, 6>& k, double f) {
        std::array<double, 6> z;
        for (int i = 0; i < 6; ++i) z[i] = y[i] + f * k[i];
        return z;
      };
      const auto k1 = rhs(y);
      const auto k2 = rhs(add(k1, 0.5 * h));
      const auto k3 = rhs(add(k2, 0.5 * h));
      const auto k4 = rhs(add(k3, h));
      for (int i = 0; i < 6; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      sigma += h;
    }
    return {y[0], y[1], y[4]};
  }
};

}  // namespace

double axial_ball_volume(const WarpedMetric& g, double center, double r, std::size_t rays) {
  require(center >= 0.0 && r > 0.0, ErrorKind::InvalidInput, "need center >= 0 and r > 0");
  require(center + r <= g.total_arclength() * (1.0 + 1e-12), ErrorKind::OutOfDomain,
          "ball leaves the grid");
  if (center == 0.0) return enclosed_volume(g, r);

  const int n = g.dim();
  const double om_n1 = sphere_area(n - 1);
  const double om_n2 = sphere_area(n - 2);
  Meridian m{g};
  // Green: |B| = om_{n-2} * |closed integral of A(s) sin^{n-2}(theta) dtheta|,
  // A = enclosed / om_{n-1}. The axis pieces carry no weight.
  const std::size_t panels = std::max<std::size_t>(1, rays / kGx.size());
  const double width = std::numbers::pi / panels;
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    for (std::size_t j = 0; j < kGx.size(); ++j) {
      const double gamma = width * (p + 0.5 * (1.0 + kGx[j]));
      const auto [s, th, dth] = m.shoot(center, gamma, r);
      const double A = enclosed_volume(g, std::clamp(s, 0.0, g.total_arclength())) / om_n1;
      sum += 0.5 * width * kGw[j] * A * std::pow(std::sin(th), n - 2) * dth;
    }
  }
  return om_n2 * std::abs(sum);
}

double max_R_on_ball(const WarpedMetric& g, double center, double r) {
  const auto& S = g.s();
  const auto& R = g.curvature().R;
  const double lo = std::max(0.0, center - r);
  const double hi = std::min(center + r, S.back());
  double m = std::max(interp_cubic_radial(S, R, lo, Parity::Even),
                      interp_cubic_radial(S, R, hi, Parity::Even));
  for (std::size_t i = 0; i < S.size(); ++i)
    if (S[i] >= lo && S[i] <= hi) m = std::max(m, R[i]);
  return m;
}

NoncollapseReport kappa_scan(const WarpedMetric& g, const std::vector<double>& centers,
                             const std::vector<double>& radii, double t) {
  require(!centers.empty() && !radii.empty(), ErrorKind::InvalidInput,
          "kappa scan needs centers and radii");
  NoncollapseReport rep;
  rep.kappa = std::numeric_limits<double>::infinity();
  for (double c : centers) {
    for (double r : radii) {
      BallSample b;
      b.t = t;
      b.center = c;
      b.r = r;
      b.volume = axial_ball_volume(g, c, r);
      b.ratio = b.volume / std::pow(r, g.dim());
      b.max_R = max_R_on_ball(g, c, r);
      b.admissible = b.max_R <= 1.0 / (r * r);
      require(b.ratio > 0.0 && std::isfinite(b.ratio), ErrorKind::NumericalInconsistency,
              "nonpositive ball volume");
      if (b.admissible) {
        rep.kappa = std::min(rep.kappa, b.ratio);
        rep.empty = false;
      }
      rep.samples.push_back(b);
    }
  }
  if (rep.empty) rep.kappa = 0.0;
  return rep;
}

NoncollapseReport alltime_audit(const FlowTrajectory& traj, const AuditOptions& opt) {
  require(!traj.snapshots.empty(), ErrorKind::InvalidInput, "empty trajectory");
  require(traj.nonnegative_R, ErrorKind::InvalidInput,
          "audit needs a trajectory with nonnegative scalar curvature");
  NoncollapseReport rep;
  rep.kappa = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx = traj.checkpoints;
  if (idx.empty())
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) idx.push_back(i);

  for (std::size_t k : idx) {
    const auto& g = traj.snapshots.at(k);
    const double S = g.total_arclength();
    auto centers = opt.centers.empty() ? std::vector<double>{0.0, S / 8} : opt.centers;
    auto radii = opt.radii;
    if (radii.empty())
      for (double f : {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8}) radii.push_back(f * S);
    auto scan = kappa_scan(g, centers, radii, traj.times[k]);
    rep.times.push_back(traj.times[k]);
    rep.kappa_t.push_back(scan.kappa);
    if (!scan.empty) {
      rep.kappa = std::min(rep.kappa, scan.kappa);
      rep.empty = false;
    } else {
      rep.passed = false;
      rep.failures.push_back("no admissible ball at t = " + std::to_string(traj.times[k]));
    }
    rep.samples.insert(rep.samples.end(), scan.samples.begin(), scan.samples.end());
    rep.sobolev_A.push_back(sobolev_constant(g, sobolev_trials(g, opt.seed)).A);
    if (opt.with_lambda) {
      auto sched = opt.schedule;
      if (sched.radii.empty()) sched.radii = {0.25 * S, 0.5 * S, S};
      rep.lambda_t.push_back(lambda_whole(g, sched, opt.minimizer).lambda);
    }
  }
  if (rep.empty) rep.kappa = 0.0;

  for (std::size_t i = 1; i < rep.times.size(); ++i) {
    const std::string at = " at t = " + std::to_string(rep.times[i]);
    if (rep.sobolev_A[i] > opt.sobolev_factor * rep.sobolev_A[0]) {
      rep.passed = false;
      rep.failures.push_back("Sobolev constant grew past the bound" + at);
    }
    if (rep.kappa_t[i] < opt.kappa_factor * rep.kappa_t[0]) {
      rep.passed = false;
      rep.failures.push_back("kappa dropped below the bound" + at);
    }
    if (opt.with_lambda && rep.lambda_t[i] < rep.lambda_t[0] - opt.lambda_slack) {
      rep.passed = false;
      rep.failures.push_back("lambda decreased" + at);
    }
  }
  return rep;
}

void write_noncollapse_csv(std::ostream& os, const NoncollapseReport& rep) {
  os << "t,center_s,r,maxR,ratio,admissible\n";
  os.precision(12);
  for (const auto& b : rep.samples)
    os << b.t << ',' << b.center << ',' << b.r << ',' << b.max_R << ',' << b.ratio << ','
       << (b.admissible ? 1 : 0) << '\n';
}

}  // namespace entroflow
