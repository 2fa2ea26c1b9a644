#include "entroflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "entroflow/error.hpp"

namespace entroflow {

namespace {

constexpr double kCut = 1e-30;

void check_aligned(std::span<const double> v, const WarpedMetric& g) {
  require(v.size() == g.size(), ErrorKind::InvalidInput, "function not aligned with grid");
}

double xlogx(double a) { return a > 0.0 ? a * std::log(a) : 0.0; }

}  // namespace

double s_n(int n) { return -0.5 * n * std::log(2.0 * std::numbers::pi * n) - 0.5 * n; }

Stiffness stiffness(const WarpedMetric& g, NodeRange r) {
  const auto& A = g.cell_area();
  const auto& ds = g.cell_ds();
  const auto& q = g.weights();
  const std::size_t m = r.last - r.first + 1;
  Stiffness k;
  k.first = r.first;
  k.d0.assign(m, 0.0);
  k.d1.assign(m, 0.0);
  k.d2.assign(m, 0.0);
  for (std::size_t i = r.first; i < r.last; ++i) {
    const std::size_t j = i - r.first;
    const double c = A[i] / ds[i];
    k.d0[j] += c;
    k.d0[j + 1] += c;
    k.d1[j] -= c;
  }
  // nodes whose value is free; the outer node and an inner boundary are held at 0
  const std::size_t lo = r.inner_boundary() ? r.first + 1 : r.first;
  for (std::size_t i = lo; i < r.last; ++i) {
    const double a = ds[i];
    const double b = i == 0 ? ds[0] : ds[i - 1];
    const double p = kCurvaturePenalty * q[i] * a * b;
    // v_ss = cl v[i-1] + cc v[i] + cr v[i+1]
    double cl = 2.0 / (b * (a + b));
    double cr = 2.0 / (a * (a + b));
    const double cc = -cl - cr;
    if (i == 0) {
      cr += cl;  // ghost v[-1] = v[1]
      cl = 0.0;
    }
    const std::size_t j = i - r.first;
    k.d0[j] += p * cc * cc;
    k.d0[j + 1] += p * cr * cr;
    k.d1[j] += p * cc * cr;
    if (i > r.first) {
      k.d0[j - 1] += p * cl * cl;
      k.d1[j - 1] += p * cl * cc;
      k.d2[j - 1] += p * cl * cr;
    }
  }
  return k;
}

std::vector<double> Stiffness::apply(std::span<const double> v) const {
  const std::size_t m = d0.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = v[first + j];
    out[j] += d0[j] * x;
    if (j + 1 < m) {
      out[j] += d1[j] * v[first + j + 1];
      out[j + 1] += d1[j] * x;
    }
    if (j + 2 < m) {
      out[j] += d2[j] * v[first + j + 2];
      out[j + 2] += d2[j] * x;
    }
  }
  return out;
}

double Stiffness::quad(std::span<const double> v) const {
  const auto kv = apply(v);
  double sum = 0.0;
  for (std::size_t j = 0; j < kv.size(); ++j) sum += v[first + j] * kv[j];
  return sum;
}

double energy_F(std::span<const double> v, const WarpedMetric& g, NodeRange r) {
  const auto& q = g.weights();
  const auto& R = g.curvature().R;
  double pot = 0.0;
  for (std::size_t i = r.first; i <= r.last; ++i) pot += q[i] * R[i] * v[i] * v[i];
  return 4.0 * stiffness(g, r).quad(v) + pot;
}

double entropy_N(std::span<const double> v, const WarpedMetric& g, NodeRange r) {
  const auto& q = g.weights();
  double sum = 0.0;
  for (std::size_t i = r.first; i <= r.last; ++i) sum += q[i] * xlogx(v[i] * v[i]);
  return sum;
}

double norm_sq(std::span<const double> v, const WarpedMetric& g, NodeRange r) {
  const auto& q = g.weights();
  double sum = 0.0;
  for (std::size_t i = r.first; i <= r.last; ++i) sum += q[i] * v[i] * v[i];
  return sum;
}

double energy_F(const RadialFunction& v, const WarpedMetric& g, const Domain& d) {
  check_aligned(v, g);
  return energy_F(v, g, resolve(d, g));
}

double entropy_N(const RadialFunction& v, const WarpedMetric& g, const Domain& d) {
  check_aligned(v, g);
  const auto r = resolve(d, g);
  const double m = norm_sq(v, g, r);
  require(std::abs(m - 1.0) <= 1e-8, ErrorKind::PreconditionViolation,
          "entropy needs a unit-norm function (norm^2 = " + std::to_string(m) + ")");
  return entropy_N(v, g, r);
}

bool FunctionalReport::minus_infinity() const { return std::isinf(L) && L < 0; }

double FunctionalReport::recompute() const {
  const double e = F + E0_minus;
  if (e == 0.0) return -std::numeric_limits<double>::infinity();
  return -N + alpha * (0.5 * n) * std::log(e) + s_n;
}

double log_sobolev_value(double F, double N, int n, double alpha) {
  require(F >= 0.0, ErrorKind::NumericalInconsistency, "negative energy in log-Sobolev value");
  if (F == 0.0) return -std::numeric_limits<double>::infinity();
  return -N + alpha * (0.5 * n) * std::log(F) + s_n(n);
}

FunctionalReport log_sobolev_L(const RadialFunction& v, const WarpedMetric& g, double alpha,
                               const Domain& d, std::optional<double> E0_minus) {
  require(alpha >= 1.0, ErrorKind::InvalidInput, "alpha must be at least 1");
  FunctionalReport rep;
  rep.n = g.dim();
  rep.alpha = alpha;
  rep.s_n = s_n(g.dim());
  rep.domain = d.label();
  rep.N = entropy_N(v, g, d);
  const auto r = resolve(d, g);
  rep.F = energy_F(v, g, r);

  const auto& R = g.curvature().R;
  const double minR = *std::min_element(R.begin() + static_cast<long>(r.first),
                                        R.begin() + static_cast<long>(r.last) + 1);
  if (minR >= 0.0) {
    rep.E0_minus = 0.0;
  } else if (E0_minus) {
    rep.E0_minus = std::max(0.0, *E0_minus);
  } else {
    double worst = std::numeric_limits<double>::infinity();
    for (auto& t : sobolev_trials(g)) {
      for (std::size_t i = 0; i < t.v.size(); ++i)
        if (i < r.first || i > r.last || (r.inner_boundary() && i == r.first)) t.v[i] = 0.0;
      t.v[r.last] = 0.0;
      const double m = norm_sq(t.v, g, r);
      if (m <= 0.0) continue;
      worst = std::min(worst, energy_F(t.v, g, r) / m);
    }
    rep.E0_minus = std::isfinite(worst) ? std::max(0.0, -worst) : 0.0;
  }
  const double e = rep.F + rep.E0_minus;
  require(e >= 0.0, ErrorKind::NumericalInconsistency, "F + E0- is negative");
  rep.L = rep.recompute();
  return rep;
}

namespace {

// sqrt u with the density cutoff applied
std::vector<double> root_density(const RadialFunction& u, const WarpedMetric& g) {
  check_aligned(u, g);
  const double mx = *std::max_element(u.begin(), u.end());
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    require(u[i] >= -1e-12, ErrorKind::InvalidDensity, "density is negative");
    v[i] = u[i] < kCut * mx ? 0.0 : std::sqrt(u[i]);
  }
  return v;
}

double mass_of(const RadialFunction& u, const WarpedMetric& g) {
  return integrate(g, u);
}

void check_mass(double m) {
  require(std::abs(m - 1.0) <= 1e-6, ErrorKind::PreconditionViolation,
          "density must have unit mass (mass = " + std::to_string(m) + ")");
}

}  // namespace

double w_entropy(const RadialFunction& u, const WarpedMetric& g, double s) {
  require(s > 0.0, ErrorKind::InvalidInput, "scale must be positive");
  const auto v = root_density(u, g);
  const NodeRange all{0, g.last()};
  const double M = mass_of(u, g);
  check_mass(M);
  const double F = energy_F(v, g, all);
  const double Nu = entropy_N(v, g, all);
  const int n = g.dim();
  return s * F - Nu - (0.5 * n * std::log(4.0 * std::numbers::pi * s) + n) * M;
}

RhoMinimum inf_rho_w(const RadialFunction& u, const WarpedMetric& g) {
  const auto v = root_density(u, g);
  const NodeRange all{0, g.last()};
  const double M = mass_of(u, g);
  check_mass(M);
  const double F = energy_F(v, g, all);
  const int n = g.dim();
  RhoMinimum out;
  out.L = log_sobolev_value(F, entropy_N(v, g, all), n, 1.0);
  if (F <= 0.0) {
    out.rho = std::numeric_limits<double>::infinity();
    out.W = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.rho = 0.5 * n * M / F;
  out.W = w_entropy(u, g, out.rho);
  return out;
}

SolitonFields soliton_fields(const RadialFunction& u, const WarpedMetric& g) {
  check_aligned(u, g);
  const double mx = *std::max_element(u.begin(), u.end());
  require(mx > 0.0, ErrorKind::InvalidDensity, "density vanishes identically");
  const std::size_t np = u.size();
  SolitonFields sf;
  sf.kept.resize(np);
  std::vector<double> f(np);
  for (std::size_t i = 0; i < np; ++i) {
    require(u[i] >= -1e-12, ErrorKind::InvalidDensity, "density is negative");
    sf.kept[i] = u[i] >= kCut * mx;
    f[i] = std::log(std::max(u[i], kCut * mx));
  }
  const auto d = g.stencil().apply(f, Parity::Even);
  const auto& phi = g.phi();
  const auto& px = g.phi_x();
  sf.f_s.resize(np);
  sf.f_ss.resize(np);
  sf.hess_sph.resize(np);
  sf.sigma.resize(np);
  const int n = g.dim();
  for (std::size_t i = 0; i < np; ++i) {
    sf.f_s[i] = d.d1[i] / phi[i];
    sf.f_ss[i] = (d.d2[i] - d.d1[i] * px[i] / phi[i]) / (phi[i] * phi[i]);
    sf.hess_sph[i] = i == 0 ? sf.f_ss[0] : g.psi_s()[i] / g.psi()[i] * sf.f_s[i];
    sf.sigma[i] = g.curvature().R[i] - (sf.f_ss[i] + (n - 1) * sf.hess_sph[i]);
  }
  return sf;
}

QReport q_functional(const RadialFunction& u, const WarpedMetric& g) {
  const double M = mass_of(u, g);
  check_mass(M);
  const auto sf = soliton_fields(u, g);
  const auto& q = g.weights();
  const auto& c = g.curvature();
  const int n = g.dim();
  double tt = 0.0, s1 = 0.0, s2 = 0.0, cut = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = q[i] * u[i];
    if (!sf.kept[i]) {
      cut += std::abs(w);
      continue;
    }
    const double sig = sf.sigma[i];
    const double tr = c.Ric_rad[i] - sf.f_ss[i] - sig / n;
    const double ts = c.Ric_sph[i] - sf.hess_sph[i] - sig / n;
    tt += w * (tr * tr + (n - 1) * ts * ts);
    s1 += w * sig;
    s2 += w * sig * sig;
  }
  QReport rep;
  rep.Q = n * tt + s2 - s1 * s1;
  rep.sigma_mean = s1 / (M - cut);
  rep.cut_fraction = cut / M;
  rep.warn = rep.cut_fraction > 1e-2;
  return rep;
}

std::vector<TrialFunction> sobolev_trials(const WarpedMetric& g, std::uint64_t seed) {
  const auto& s = g.s();
  const double S = g.total_arclength();
  const int n = g.dim();
  auto taper = [&](double t) {
    if (t <= 0.5 * S) return 1.0;
    const double c = std::cos(0.5 * std::numbers::pi * (t - 0.5 * S) / (0.5 * S));
    return c * c;
  };
  std::vector<TrialFunction> out;
  auto add = [&](std::string label, auto shape) {
    TrialFunction t{std::move(label), RadialFunction(s.size())};
    for (std::size_t i = 0; i < s.size(); ++i) t.v[i] = shape(s[i]) * taper(s[i]);
    t.v.back() = 0.0;
    out.push_back(std::move(t));
  };
  for (double f : {0.0025, 0.005, 0.01, 0.02, 0.05}) {
    const double e = f * S;
    add("aubin-talenti:" + std::to_string(f),
        [&](double t) { return std::pow(1.0 + t * t / (e * e), -0.5 * (n - 2)); });
  }
  for (double f : {0.01, 0.05, 0.1, 0.2}) {
    const double w = f * S;
    add("gauss:" + std::to_string(f), [&](double t) { return std::exp(-0.5 * t * t / (w * w)); });
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(0.05, 0.45), width(0.01, 0.05);
  for (int k = 0; k < 4; ++k) {
    const double c = centre(rng) * S;
    const double w = width(rng) * S;
    add("shell:" + std::to_string(k),
        [&](double t) { return std::exp(-0.5 * (t - c) * (t - c) / (w * w)); });
  }
  return out;
}

double euclidean_sobolev_A(int n) {
  const double Sn = 1.0 / (std::numbers::pi * n * (n - 2)) *
                    std::pow(std::tgamma(n) / std::tgamma(0.5 * n), 2.0 / n);
  return 0.25 * Sn;
}

SobolevEstimate sobolev_constant(const WarpedMetric& g, const std::vector<TrialFunction>& trials) {
  require(!trials.empty(), ErrorKind::InvalidInput, "empty trial set");
  const int n = g.dim();
  const double p = 2.0 * n / (n - 2);
  const NodeRange all{0, g.last()};
  const auto& q = g.weights();
  SobolevEstimate est;
  for (const auto& t : trials) {
    check_aligned(t.v, g);
    double lp = 0.0;
    for (std::size_t i = 0; i < t.v.size(); ++i) lp += q[i] * std::pow(std::abs(t.v[i]), p);
    const double F = energy_F(t.v, g, all);
    if (F <= 0.0) continue;
    const double ratio = std::pow(lp, 2.0 / p) / F;
    est.samples.emplace_back(t.label, ratio);
    est.A = std::max(est.A, ratio);
  }
  require(est.A > 0.0, ErrorKind::DegenerateEnergy, "no trial function has positive energy");
  const double cn = ball_volume_unit(n) * std::pow(euclidean_sobolev_A(n), 0.5 * n);
  est.kappa = cn * std::pow(est.A, -0.5 * n);
  return est;
}

void write_report_header(std::ostream& os) { os << "tag,n,alpha,domain,F,N,L,W,Q\n"; }

void write_report_row(std::ostream& os, const std::string& tag, const FunctionalReport& r,
                      std::optional<double> W, std::optional<double> Q) {
  os << std::setprecision(12) << tag << ',' << r.n << ',' << r.alpha << ',' << '"' << r.domain
     << '"' << ',' << r.F << ',' << r.N << ',' << r.L << ',';
  if (W) os << *W;
  os << ',';
  if (Q) os << *Q;
  os << '\n';
}

}  // namespace entroflow
