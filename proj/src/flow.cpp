#include "entroflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "entroflow/error.hpp"
#include "entroflow/functionals.hpp"

namespace entroflow {

std::size_t FlowTrajectory::index_of(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-9 * (1.0 + std::abs(t))) return i;
  throw Error(ErrorKind::InvalidInput, "time " + std::to_string(t) + " is not a stored snapshot");
}

double flow_step_bound(const WarpedMetric& g) {
  const double h = g.min_ds();
  return 0.25 * h * h;
}

std::pair<std::vector<double>, std::vector<double>> ricci_rates(const WarpedMetric& g) {
  const std::size_t np = g.size();
  const int n = g.dim();
  const auto& phi = g.phi();
  const auto& psi = g.psi();
  const auto& px = g.psi_x();
  // phi_x upwinded in the phi equation only; central stencils there are unstable
  const auto fx_up = g.stencil().backward_first(phi, Parity::Even);
  std::vector<double> dphi(np, 0.0), dpsi(np, 0.0);
  for (std::size_t i = 1; i < np; ++i) {
    const double pxx = g.psi_ss()[i] * phi[i] * phi[i] + px[i] * g.phi_x()[i] / phi[i];
    const double pss_up = (pxx - px[i] * fx_up[i] / phi[i]) / (phi[i] * phi[i]);
    const double ps = g.psi_s()[i];
    dpsi[i] = g.psi_ss()[i] - (n - 2) * (1.0 - ps * ps) / psi[i];
    dphi[i] = (n - 1) * pss_up / psi[i] * phi[i];
  }
  // keeps phi(0) = psi_x(0), i.e. no cone angle at the origin
  dphi[0] = g.stencil().first_at(dpsi, Parity::Odd, 0);
  return {std::move(dphi), std::move(dpsi)};
}

bool scalar_curvature_nonnegative(const WarpedMetric& g) {
  const auto& R = g.curvature().R;
  const auto [lo, hi] = std::minmax_element(R.begin(), R.end());
  // far-field R is ~0 and picks up rounding noise of either sign
  return *lo >= -1e-8 * std::max(1.0, std::abs(*hi));
}

namespace {

void record(FlowTrajectory& tr, double t, WarpedMetric g) {
  const auto& c = g.curvature();
  double mk = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    mk = std::max({mk, std::abs(c.K1[i]), std::abs(c.K2[i])});
  require(std::isfinite(mk), ErrorKind::SingularityDetected,
          "curvature blew up at t = " + std::to_string(t));
  tr.min_R.push_back(*std::min_element(c.R.begin(), c.R.end()));
  tr.max_curvature.push_back(mk);
  tr.checkpoints.push_back(tr.times.size());
  tr.times.push_back(t);
  tr.snapshots.push_back(std::move(g));
}

}  // namespace

FlowTrajectory ricci_evolve(const WarpedMetric& g0, double T, double dt, long every) {
  require(T > 0.0, ErrorKind::InvalidInput, "flow duration must be positive");
  const double bound = flow_step_bound(g0);
  if (dt <= 0.0) dt = 0.2 * g0.min_ds() * g0.min_ds();
  require(dt <= bound * (1.0 + 1e-12), ErrorKind::InvalidInput,
          "dt exceeds the stability bound 0.25 (min ds)^2 = " + std::to_string(bound));
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(T / dt - 1e-9)));
  dt = T / steps;
  if (every <= 0) every = std::max<long>(1, steps / 10);

  FlowTrajectory tr;
  tr.step_size = dt;
  tr.steps = steps;
  tr.nonnegative_R = scalar_curvature_nonnegative(g0);
  record(tr, 0.0, g0);

  WarpedMetric g = g0;
  for (long k = 1; k <= steps; ++k) {
    auto [dphi, dpsi] = ricci_rates(g);
    std::vector<double> phi = g.phi(), psi = g.psi();
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi[i] += dt * dphi[i];
      psi[i] += dt * dpsi[i];
    }
    const double t = k * dt;
    try {
      g = g.with_profiles(std::move(phi), std::move(psi));
    } catch (const Error& e) {
      throw Error(ErrorKind::SingularityDetected,
                  "metric degenerated at t = " + std::to_string(t) + " (" + e.what() + ")");
    }
    // a step past the stability bound shows up as a blow-up, never silently
    if (k % every == 0 || k == steps) record(tr, t, g);
  }
  return tr;
}

FlowTrajectory static_trajectory(const WarpedMetric& g, std::vector<double> times) {
  require(times.size() >= 2, ErrorKind::InvalidInput, "need at least two times");
  FlowTrajectory tr;
  tr.nonnegative_R = scalar_curvature_nonnegative(g);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0)
      require(times[i] > times[i - 1], ErrorKind::InvalidInput, "times must increase");
    record(tr, times[i], g);
  }
  tr.step_size = times[1] - times[0];
  tr.steps = static_cast<long>(times.size()) - 1;
  return tr;
}

namespace {

WarpedMetric lerp_metric(const WarpedMetric& a, const WarpedMetric& b, double w) {
  if (w == 0.0) return a;
  if (w == 1.0) return b;
  std::vector<double> phi(a.size()), psi(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    phi[i] = (1.0 - w) * a.phi()[i] + w * b.phi()[i];
    psi[i] = (1.0 - w) * a.psi()[i] + w * b.psi()[i];
  }
  return a.with_profiles(std::move(phi), std::move(psi));
}

const std::vector<double>& mass_weights(const WarpedMetric& g) { return g.weights(); }

}  // namespace

ConjugateHeatSolution conjugate_heat_backward(const FlowTrajectory& traj,
                                              const RadialFunction& final_density, double t2,
                                              double t1, const HeatOptions& opt) {
  require(t1 < t2, ErrorKind::InvalidInput, "need t1 < t2");
  require(opt.substeps >= 1, ErrorKind::InvalidInput, "substeps must be positive");
  const std::size_t i2 = traj.index_of(t2);
  const std::size_t i1 = traj.index_of(t1);
  const auto& g2 = traj.snapshots[i2];
  require(final_density.size() == g2.size(), ErrorKind::InvalidInput,
          "density not aligned with grid");
  for (double u : final_density)
    require(u >= -1e-12 && std::isfinite(u), ErrorKind::InvalidDensity, "negative final density");
  const double m2 = integrate(g2, final_density);
  require(std::abs(m2 - 1.0) <= 1e-6, ErrorKind::PreconditionViolation,
          "final density must have unit mass");

  const std::size_t np = g2.size();
  const std::size_t nu = np - 1;  // u_N = 0
  ConjugateHeatSolution out;
  RadialFunction u = final_density;
  u[nu] = 0.0;
  out.times.push_back(t2);
  out.densities.push_back(u);
  out.mass.push_back(integrate(g2, u));
  out.snapshot.push_back(i2);

  int step = 0;
  for (std::size_t j = i2; j > i1; --j) {
    const auto& hi = traj.snapshots[j];
    const auto& lo = traj.snapshots[j - 1];
    const double dtau = (traj.times[j] - traj.times[j - 1]) / opt.substeps;
    WarpedMetric g_old = hi;
    for (int k = 0; k < opt.substeps; ++k, ++step) {
      const double theta = step < opt.startup ? 1.0 : 0.5;
      WarpedMetric g_new = lerp_metric(hi, lo, static_cast<double>(k + 1) / opt.substeps);
      const auto& q0 = mass_weights(g_old);
      const auto& q1 = mass_weights(g_new);
      std::vector<double> rhs(nu), lower(nu, 0.0), diag(nu), upper(nu, 0.0);
      for (std::size_t i = 0; i < nu; ++i) rhs[i] = q0[i] * u[i];
      if (theta < 1.0) {
        for (std::size_t i = 0; i < nu; ++i) {
          const double c = (1.0 - theta) * dtau * g_old.cell_area()[i] / g_old.cell_ds()[i];
          const double flux = c * (u[i + 1] - u[i]);
          rhs[i] += flux;
          if (i + 1 < nu) rhs[i + 1] -= flux;
        }
      }
      for (std::size_t i = 0; i < nu; ++i) {
        const double c = theta * dtau * g_new.cell_area()[i] / g_new.cell_ds()[i];
        diag[i] = q1[i] + c;
        if (i > 0) {
          const double cl = theta * dtau * g_new.cell_area()[i - 1] / g_new.cell_ds()[i - 1];
          diag[i] += cl;
          lower[i] = -cl;
        }
        if (i + 1 < nu) upper[i] = -c;
      }
      auto sol = solve_tridiagonal(std::move(lower), std::move(diag), std::move(upper),
                                   std::move(rhs));
      for (std::size_t i = 0; i < nu; ++i) u[i] = sol[i];
      u[nu] = 0.0;
      g_old = std::move(g_new);
    }
    const double m = integrate(lo, u);
    require(std::abs(m - out.mass.front()) <= opt.max_drift, ErrorKind::MassDrift,
            "conjugate heat mass drifted by " + std::to_string(m - out.mass.front()));
    out.times.push_back(traj.times[j - 1]);
    out.densities.push_back(u);
    out.mass.push_back(m);
    out.snapshot.push_back(j - 1);
  }
  return out;
}

EntropyReport entropy_audit(const FlowTrajectory& traj, const ConjugateHeatSolution& chs) {
  require(!chs.times.empty(), ErrorKind::InvalidInput, "empty conjugate heat solution");
  for (std::size_t k = 0; k < chs.times.size(); ++k)
    require(chs.snapshot[k] < traj.times.size() &&
                std::abs(traj.times[chs.snapshot[k]] - chs.times[k]) <= 1e-12 * (1 + chs.times[k]),
            ErrorKind::InvalidInput, "checkpoints of trajectory and density are misaligned");
  EntropyReport rep;
  const double t2 = chs.times.front();
  const auto& g2 = traj.snapshots[chs.snapshot.front()];
  rep.rho0 = inf_rho_w(chs.densities.front(), g2).rho;
  rep.min_Q = std::numeric_limits<double>::infinity();

  for (std::size_t kk = chs.times.size(); kk-- > 0;) {
    const auto& g = traj.snapshots[chs.snapshot[kk]];
    const auto& u = chs.densities[kk];
    EntropyRow row;
    row.t = chs.times[kk];
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = std::sqrt(std::max(u[i], 0.0));
    const NodeRange all{0, g.last()};
    row.F = energy_F(v, g, all);
    row.N = entropy_N(v, g, all);
    row.L = log_sobolev_value(row.F, row.N, g.dim(), 1.0);
    row.W = w_entropy(u, g, t2 - row.t + rep.rho0);
    const auto q = q_functional(u, g);
    row.Q = q.Q;
    row.q_warn = q.warn;
    row.QoverF = row.Q / row.F;
    rep.min_Q = std::min(rep.min_Q, row.Q);
    rep.rows.push_back(row);
  }
  auto& rows = rep.rows;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    auto& a = rows[i];
    const auto& b = rows[i + 1];
    a.dLdt_fd = (b.L - a.L) / (b.t - a.t);
    // Q/F varies across the interval; that variation bounds the forward-difference error
    a.tol_fd = std::abs(b.QoverF - a.QoverF) + 1e-2 * std::abs(a.QoverF) + 1e-8;
    if (a.dLdt_fd < a.QoverF - a.tol_fd) rep.dLdt_bound = false;
    if (b.W < a.W - 1e-6 * (1.0 + std::abs(a.W))) rep.W_monotone = false;
  }
  return rep;
}

std::string to_string(SolitonReport::Verdict v) {
  switch (v) {
    case SolitonReport::Verdict::Soliton: return "soliton";
    case SolitonReport::Verdict::NotSoliton: return "not-soliton";
    case SolitonReport::Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SolitonReport soliton_residual(const WarpedMetric& g, const RadialFunction& u, double t) {
  const auto sf = soliton_fields(u, g);
  const auto& q = g.weights();
  const auto& c = g.curvature();
  const int n = g.dim();
  SolitonReport rep;
  rep.t = t;
  rep.f.resize(u.size());
  double total = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    rep.f[i] = -std::log(std::max(u[i], std::numeric_limits<double>::min()));
    if (!sf.kept[i]) continue;
    total += q[i] * u[i];
    s1 += q[i] * u[i] * sf.sigma[i];
  }
  rep.l = s1 / total;
  rep.epsilon = -2.0 * rep.l / n;
  // smallest origin-centred region carrying 99% of the mass
  double cum = 0.0;
  std::size_t k = 0;
  for (; k < u.size(); ++k) {
    if (sf.kept[k]) cum += q[k] * u[k];
    if (cum >= 0.99 * total) break;
  }
  rep.region_nodes = k + 1;
  for (std::size_t i = 0; i <= k && i < u.size(); ++i) {
    if (!sf.kept[i]) continue;
    // Ric + Hess f + (eps/2) g with f = -ln u
    const double rr = c.Ric_rad[i] - sf.f_ss[i] + 0.5 * rep.epsilon;
    const double rs = c.Ric_sph[i] - sf.hess_sph[i] + 0.5 * rep.epsilon;
    rep.residual_traceless = std::max({rep.residual_traceless, std::abs(rr), std::abs(rs)});
    rep.residual_l = std::max(rep.residual_l, std::abs(sf.sigma[i] - rep.l));
  }
  const double worst = std::max(rep.residual_traceless, rep.residual_l);
  if (rep.region_nodes < 10)
    rep.verdict = SolitonReport::Verdict::Inconclusive;
  else if (worst <= 1e-6)
    rep.verdict = SolitonReport::Verdict::Soliton;
  else if (worst > 1e-3)
    rep.verdict = SolitonReport::Verdict::NotSoliton;
  else
    rep.verdict = SolitonReport::Verdict::Inconclusive;
  return rep;
}

SolitonReport soliton_residual(const FlowTrajectory& traj, const ConjugateHeatSolution& chs,
                               double t) {
  for (std::size_t k = 0; k < chs.times.size(); ++k)
    if (std::abs(chs.times[k] - t) <= 1e-9 * (1.0 + std::abs(t)))
      return soliton_residual(traj.snapshots[chs.snapshot[k]], chs.densities[k], t);
  throw Error(ErrorKind::InvalidInput, "no stored density at t = " + std::to_string(t));
}

namespace {

double psi_at_arclength(const WarpedMetric& g, double s) {
  return interp_cubic_radial(g.s(), g.psi(), s, Parity::Odd);
}

double invariant_mismatch(const WarpedMetric& g1, const WarpedMetric& g2, double c) {
  const double k = std::sqrt(c);
  const double smax = std::min(g2.total_arclength(), k * g1.total_arclength());
  const double scale = *std::max_element(g2.psi().begin(), g2.psi().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < g2.size() && g2.s()[i] <= smax; ++i) {
    const double s = g2.s()[i];
    worst = std::max(worst, std::abs(g2.psi()[i] - k * psi_at_arclength(g1, s / k)));
  }
  return worst / scale;
}

struct MapFit {
  double c;
  const WarpedMetric& g1;
  const WarpedMetric& g2;

  double operator()(double a, double b, double d) const {
    const double k = std::sqrt(c);
    const double X = g1.x().back();
    const double ps = *std::max_element(g2.psi().begin(), g2.psi().end());
    const double fs = *std::max_element(g2.phi().begin(), g2.phi().end());
    double worst = 0.0;
    for (std::size_t i = 0; i < g2.size(); ++i) {
      const double x = g2.x()[i];
      const double q = x / b;
      const double e = std::exp(-q * q);
      const double m = x * (1.0 + a * e) + d * x;
      const double dm = 1.0 + a * e * (1.0 - 2.0 * q * q) + d;
      if (dm <= 0.0) return 1e6;
      if (m > X) break;
      const double p1 = k * interp_cubic_radial(g1.x(), g1.psi(), m, Parity::Odd);
      const double f1 = k * interp_cubic_radial(g1.x(), g1.phi(), m, Parity::Even) * dm;
      worst = std::max({worst, std::abs(p1 - g2.psi()[i]) / ps, std::abs(f1 - g2.phi()[i]) / fs});
    }
    return worst;
  }
};

}  // namespace

Alignment align_metrics(const WarpedMetric& g1, const WarpedMetric& g2) {
  require(g1.dim() == g2.dim(), ErrorKind::InvalidInput, "dimension mismatch");
  Alignment al;
  // log-grid, then golden refinement; tiny |ln c| term picks c = 1 on flat space
  auto cost = [&](double lc) { return invariant_mismatch(g1, g2, std::exp(lc)) + 1e-12 * std::abs(lc); };
  const double lo = std::log(1e-2), hi = std::log(1e2);
  const int m = 80;
  double best = 0.0, bestv = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= m; ++i) {
    const double lc = lo + (hi - lo) * i / m;
    const double v = cost(lc);
    if (v < bestv) {
      bestv = v;
      best = lc;
    }
  }
  const double step = (hi - lo) / m;
  const double lc = golden_section(cost, std::max(lo, best - step), std::min(hi, best + step), 1e-12);
  al.c = std::exp(lc);
  al.mismatch = invariant_mismatch(g1, g2, al.c);

  MapFit fit{al.c, g1, g2};
  const double X = g2.x().back();
  for (int sweep = 0; sweep < 4; ++sweep) {
    al.a = golden_section([&](double a) { return fit(a, al.b, al.d); }, -0.5, 0.5, 1e-9);
    al.b = golden_section([&](double b) { return fit(al.a, b, al.d); }, 0.05 * X, 0.5 * X, 1e-9);
    al.d = golden_section([&](double d) { return fit(al.a, al.b, d); }, -0.5, 0.5, 1e-9);
  }
  al.map_mismatch = fit(al.a, al.b, al.d);
  return al;
}

namespace {

double lambda_of(const WarpedMetric& g, const BreatherOptions& opt, MinimizerResult* keep,
                 bool& converged) {
  ContinuationSchedule s = opt.schedule;
  if (s.radii.empty()) {
    const double S = g.total_arclength();
    s.radii = {0.25 * S, 0.5 * S, S};
  }
  const auto w = lambda_whole(g, s, opt.minimizer);
  for (const auto& c : w.by_radius)
    for (const auto& st : c.stages) converged = converged && st.converged;
  if (keep) *keep = w.result;
  return w.lambda;
}

}  // namespace

BreatherReport breather_check(const FlowTrajectory& traj, double t1, double t2,
                              const BreatherOptions& opt) {
  require(t1 < t2, ErrorKind::InvalidInput, "need t1 < t2");
  const std::size_t i1 = traj.index_of(t1);
  const std::size_t i2 = traj.index_of(t2);
  const auto& g1 = traj.snapshots[i1];
  const auto& g2 = traj.snapshots[i2];
  BreatherReport rep;
  rep.alignment = align_metrics(g1, g2);
  MinimizerResult m2;
  bool conv = true;
  rep.lambda1 = lambda_of(g1, opt, nullptr, conv);
  rep.lambda2 = lambda_of(g2, opt, &m2, conv);
  rep.minimizers_converged = conv;
  if (!conv) {
    rep.verdict = "inconclusive: minimizer did not converge";
    return rep;
  }
  rep.candidate = std::abs(rep.lambda1 - rep.lambda2) <= opt.lambda_tol &&
                  rep.alignment.mismatch <= opt.align_tol;
  if (!rep.candidate) {
    rep.verdict = "not a breather";
    return rep;
  }
  RadialFunction u2(m2.v.size());
  for (std::size_t i = 0; i < u2.size(); ++i) u2[i] = m2.v[i] * m2.v[i];
  const double mass = integrate(g2, u2);
  for (auto& a : u2) a /= mass;
  const auto chs = conjugate_heat_backward(traj, u2, t2, t1, opt.heat);
  rep.entropy = entropy_audit(traj, chs);
  bool all_soliton = true, any_not = false;
  for (double t : chs.times) {
    rep.solitons.push_back(soliton_residual(traj, chs, t));
    all_soliton = all_soliton && rep.solitons.back().verdict == SolitonReport::Verdict::Soliton;
    any_not = any_not || rep.solitons.back().verdict == SolitonReport::Verdict::NotSoliton;
  }
  double maxQ = 0.0;
  for (const auto& r : rep.entropy->rows) maxQ = std::max(maxQ, std::abs(r.Q));
  if (all_soliton && maxQ <= 1e-6)
    rep.verdict = "breather => soliton confirmed";
  else if (any_not)
    rep.verdict = "breather candidate, soliton not confirmed";
  else
    rep.verdict = "inconclusive";
  return rep;
}

void save_trajectory(const std::filesystem::path& dir, const FlowTrajectory& traj) {
  std::filesystem::create_directories(dir);
  std::ofstream man(dir / "manifest.txt");
  require(static_cast<bool>(man), ErrorKind::InvalidInput, "cannot write " + dir.string());
  const auto& g = traj.snapshots.front();
  man << std::setprecision(17) << "n = " << g.dim() << "\n"
      << "dt = " << traj.step_size << "\n"
      << "steps = " << traj.steps << "\n"
      << "grid.nodes = " << g.size() << "\n"
      << "grid.extent = " << g.x().back() << "\n"
      << "nonnegative_R = " << (traj.nonnegative_R ? "true" : "false") << "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(4) << std::setfill('0') << i << ".csv";
    std::ofstream f(dir / name.str());
    write_metric_csv(f, traj.snapshots[i]);
    man << "snapshot." << i << " = " << traj.times[i] << " " << name.str() << "\n";
  }
}

void write_entropy_csv(std::ostream& os, const EntropyReport& r) {
  os << "t,W,L,N,F,Q,dLdt_fd,QoverF\n" << std::setprecision(12);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& a = r.rows[i];
    os << a.t << ',' << a.W << ',' << a.L << ',' << a.N << ',' << a.F << ',' << a.Q << ',';
    if (i + 1 < r.rows.size()) os << a.dLdt_fd;
    os << ',' << a.QoverF << '\n';
  }
}

void write_breather_report(std::ostream& os, const BreatherReport& r) {
  os << std::setprecision(12) << "c = " << r.alignment.c << "\n"
     << "map.a = " << r.alignment.a << "\n"
     << "map.b = " << r.alignment.b << "\n"
     << "map.d = " << r.alignment.d << "\n"
     << "mismatch = " << r.alignment.mismatch << "\n"
     << "map_mismatch = " << r.alignment.map_mismatch << "\n"
     << "lambda1 = " << r.lambda1 << "\n"
     << "lambda2 = " << r.lambda2 << "\n";
  for (const auto& s : r.solitons)
    os << "soliton." << s.t << " = " << to_string(s.verdict) << " traceless=" << s.residual_traceless
       << " l=" << s.residual_l << " eps=" << s.epsilon << "\n";
  os << "verdict = " << r.verdict << "\n";
}

}  // namespace entroflow
