#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "entroflow/config.hpp"
#include "entroflow/error.hpp"
#include "entroflow/flow.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/minimizer.hpp"
#include "entroflow/noncollapse.hpp"

#ifndef ENTROFLOW_VERSION
#define ENTROFLOW_VERSION "0.0.0"
#endif

namespace entroflow {

namespace fs = std::filesystem;

namespace {

struct Stage {
  fs::path dir;
  std::vector<fs::path> files;
  std::vector<std::string> plots;  // python snippets

  std::ofstream open(const fs::path& rel) {
    fs::create_directories((dir / rel).parent_path());
    std::ofstream f(dir / rel, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::InvalidInput, "cannot write " + (dir / rel).string());
    files.push_back(rel);
    return f;
  }
};

ContinuationSchedule schedule_of(const Config& cfg) {
  ContinuationSchedule s;
  if (cfg.has("schedule.alphas")) s.alphas = cfg.array("schedule.alphas");
  s.radii = cfg.array("schedule.radii");
  s.tolerances = cfg.array("schedule.tolerances");
  return s;
}

MinimizerOptions minimizer_of(const Config& cfg) {
  MinimizerOptions m;
  m.tolerance = cfg.number("minimizer.tolerance", m.tolerance);
  m.max_iterations = cfg.integer("minimizer.max_iterations", m.max_iterations);
  m.initial_step = cfg.number("minimizer.initial_step", m.initial_step);
  return m;
}

HeatOptions heat_of(const Config& cfg) {
  HeatOptions h;
  h.substeps = static_cast<int>(cfg.integer("heat.substeps", h.substeps));
  h.startup = static_cast<int>(cfg.integer("heat.startup", h.startup));
  h.max_drift = cfg.number("heat.max_drift", h.max_drift);
  return h;
}

FlowTrajectory flow_of(const Config& cfg, const WarpedMetric& g, const RunOptions& opt) {
  const long every = opt.checkpoint_every ? *opt.checkpoint_every : cfg.integer("flow.every", 0);
  return ricci_evolve(g, cfg.number("flow.T"), cfg.number("flow.dt", 0.0), every);
}

void write_flow_csv(Stage& st, const FlowTrajectory& tr) {
  auto f = st.open("flow.csv");
  f << "t,min_R,max_curvature\n" << std::setprecision(12);
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    f << tr.times[i] << ',' << tr.min_R[i] << ',' << tr.max_curvature[i] << '\n';
  st.plots.push_back("plot('flow.csv', 't', ['min_R', 'max_curvature'])");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(8) << v;
  return os.str();
}

std::string run_lambda(const Config& cfg, const WarpedMetric& g, Stage& st) {
  const auto whole = lambda_whole(g, schedule_of(cfg), minimizer_of(cfg));
  {
    auto f = st.open("lambda_stages.csv");
    write_stage_header(f);
    for (std::size_t k = 0; k < whole.by_radius.size(); ++k)
      for (const auto& m : whole.by_radius[k].stages) write_stage_row(f, m.domain.r, m);
  }
  {
    auto f = st.open("minimizer.csv");
    write_profile(f, g, whole.result.v);
  }
  {
    auto f = st.open("lambda.csv");
    f << "r,lambda\n" << std::setprecision(12);
    for (std::size_t k = 0; k < whole.lambdas.size(); ++k)
      f << whole.by_radius[k].result.domain.r << ',' << whole.lambdas[k] << '\n';
  }
  st.plots.push_back("plot('lambda.csv', 'r', ['lambda'])");
  st.plots.push_back("plot('minimizer.csv', 'x', ['v'])");
  return "lambda = " + fmt(whole.lambda) + " (tail " + fmt(whole.tail) + ")" +
         (whole.result.converged ? "" : ", minimizer not converged");
}

std::string run_lambda_infinity(const Config& cfg, const WarpedMetric& g, Stage& st) {
  auto sched = schedule_of(cfg);
  const auto radii = sched.radii;
  const auto inf = lambda_infinity(g, radii, sched, minimizer_of(cfg));
  auto f = st.open("lambda_infinity.csv");
  f << "r,lambda,residual,converged\n" << std::setprecision(12);
  for (std::size_t k = 0; k < inf.radii.size(); ++k)
    f << inf.radii[k] << ',' << inf.results[k].lambda << ',' << inf.results[k].residual << ','
      << (inf.results[k].converged ? 1 : 0) << '\n';
  st.plots.push_back("plot('lambda_infinity.csv', 'r', ['lambda'])");
  return "lambda_inf estimate = " + fmt(inf.lambda_inf) + (inf.monotone ? "" : " (not monotone)");
}

std::string run_flow(const Config& cfg, const WarpedMetric& g, const RunOptions& opt,
                     Stage& st) {
  const auto tr = flow_of(cfg, g, opt);
  write_flow_csv(st, tr);
  if (cfg.flag("flow.snapshots", true)) {
    save_trajectory(st.dir / "snapshots", tr);
    std::vector<fs::path> snaps;
    for (const auto& e : fs::directory_iterator(st.dir / "snapshots"))
      snaps.push_back(fs::path("snapshots") / e.path().filename());
    std::sort(snaps.begin(), snaps.end());
    st.files.insert(st.files.end(), snaps.begin(), snaps.end());
  }
  return std::to_string(tr.steps) + " steps, " + std::to_string(tr.times.size()) +
         " snapshots, final max |K| = " + fmt(tr.max_curvature.back());
}

RadialFunction gaussian_density(const WarpedMetric& g, double scale) {
  RadialFunction u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    u[i] = std::exp(-g.s()[i] * g.s()[i] / (4.0 * scale));
  u.back() = 0.0;
  const double m = integrate(g, u);
  for (auto& x : u) x /= m;
  return u;
}

std::string run_entropy(const Config& cfg, const WarpedMetric& g, const RunOptions& opt,
                        Stage& st) {
  const auto tr = flow_of(cfg, g, opt);
  write_flow_csv(st, tr);
  const double t2 = cfg.number("heat.t2", tr.times.back());
  const double t1 = cfg.number("heat.t1", 0.0);
  const auto& g2 = tr.snapshots.at(tr.index_of(t2));
  RadialFunction u;
  if (cfg.string("heat.final", "gaussian") == "minimizer") {
    auto sched = schedule_of(cfg);
    if (sched.radii.empty()) sched.radii = {0.5 * g2.total_arclength(), g2.total_arclength()};
    const auto w = lambda_whole(g2, sched, minimizer_of(cfg));
    u.resize(g2.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = w.result.v[i] * w.result.v[i];
  } else {
    u = gaussian_density(g2, cfg.number("heat.scale", 1.0));
  }
  const auto chs = conjugate_heat_backward(tr, u, t2, t1, heat_of(cfg));
  const auto rep = entropy_audit(tr, chs);
  {
    auto f = st.open("entropy.csv");
    write_entropy_csv(f, rep);
  }
  st.plots.push_back("plot('entropy.csv', 't', ['W', 'L'])");
  st.plots.push_back("plot('entropy.csv', 't', ['dLdt_fd', 'QoverF'])");
  return std::string("W monotone: ") + (rep.W_monotone ? "yes" : "no") +
         ", dL/dt >= Q/F - tol: " + (rep.dLdt_bound ? "yes" : "no") +
         ", min Q = " + fmt(rep.min_Q);
}

std::string run_breather(const Config& cfg, const WarpedMetric& g, const RunOptions& opt,
                         Stage& st) {
  const auto tr = flow_of(cfg, g, opt);
  write_flow_csv(st, tr);
  BreatherOptions bo;
  bo.schedule = schedule_of(cfg);
  bo.minimizer = minimizer_of(cfg);
  bo.heat = heat_of(cfg);
  bo.lambda_tol = cfg.number("breather.lambda_tol", bo.lambda_tol);
  bo.align_tol = cfg.number("breather.align_tol", bo.align_tol);
  const auto rep =
      breather_check(tr, cfg.number("breather.t1"), cfg.number("breather.t2"), bo);
  {
    auto f = st.open("breather.txt");
    write_breather_report(f, rep);
  }
  if (rep.entropy) {
    auto f = st.open("entropy.csv");
    write_entropy_csv(f, *rep.entropy);
    st.plots.push_back("plot('entropy.csv', 't', ['W', 'L'])");
  }
  return rep.verdict;
}

std::string run_noncollapse(const Config& cfg, const WarpedMetric& g, const RunOptions& opt,
                            Stage& st) {
  const double S = g.total_arclength();
  auto centers = cfg.array("noncollapse.centers");
  auto radii = cfg.array("noncollapse.radii");
  if (!cfg.has("flow.T")) {
    if (centers.empty()) centers = {0.0, S / 8};
    if (radii.empty()) radii = {S / 64, S / 32, S / 16, S / 8};
    const auto rep = kappa_scan(g, centers, radii);
    auto f = st.open("noncollapse.csv");
    write_noncollapse_csv(f, rep);
    st.plots.push_back("plot('noncollapse.csv', 'r', ['ratio'])");
    return rep.empty ? "no admissible ball" : "kappa = " + fmt(rep.kappa);
  }
  const auto tr = flow_of(cfg, g, opt);
  write_flow_csv(st, tr);
  AuditOptions ao;
  ao.centers = centers;
  ao.radii = radii;
  ao.with_lambda = cfg.flag("noncollapse.lambda", false);
  ao.sobolev_factor = cfg.number("noncollapse.sobolev_factor", ao.sobolev_factor);
  ao.kappa_factor = cfg.number("noncollapse.kappa_factor", ao.kappa_factor);
  ao.schedule = schedule_of(cfg);
  ao.minimizer = minimizer_of(cfg);
  ao.seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  const auto rep = alltime_audit(tr, ao);
  {
    auto f = st.open("noncollapse.csv");
    write_noncollapse_csv(f, rep);
  }
  {
    auto f = st.open("noncollapse_t.csv");
    f << "t,sobolev_A,kappa" << (ao.with_lambda ? ",lambda" : "") << '\n' << std::setprecision(12);
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      f << rep.times[i] << ',' << rep.sobolev_A[i] << ',' << rep.kappa_t[i];
      if (ao.with_lambda) f << ',' << rep.lambda_t[i];
      f << '\n';
    }
  }
  st.plots.push_back("plot('noncollapse_t.csv', 't', ['sobolev_A', 'kappa'])");
  std::string h = rep.passed ? "audit passed" : "audit failed";
  for (const auto& s : rep.failures) h += "; " + s;
  return h;
}

void write_plot_script(Stage& st) {
  std::ofstream f(st.dir / "plot.py", std::ios::binary);
  f << "# Plots the CSVs of this run: python3 plot.py\n"
       "import csv\n"
       "import matplotlib\n"
       "matplotlib.use('Agg')\n"
       "import matplotlib.pyplot as plt\n\n\n"
       "def plot(name, x, ys):\n"
       "    with open(name) as fh:\n"
       "        rows = list(csv.DictReader(fh))\n"
       "    fig, ax = plt.subplots()\n"
       "    for y in ys:\n"
       "        pts = [(float(r[x]), float(r[y])) for r in rows if r[y] not in ('', 'nan')]\n"
       "        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker='.', label=y)\n"
       "    ax.set_xlabel(x)\n"
       "    ax.legend()\n"
       "    fig.savefig(name.replace('.csv', '') + '_' + '_'.join(ys) + '.png', dpi=120)\n\n\n";
  for (const auto& p : st.plots) f << p << '\n';
}

void write_manifest(Stage& st, const Config& cfg, std::uint64_t seed) {
  std::ofstream f(st.dir / "manifest.txt", std::ios::binary);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  f << "software = entroflow " << ENTROFLOW_VERSION << '\n'
    << "kind = " << cfg.string("kind") << '\n'
    << "config.sha256 = " << sha256_hex(cfg.text()) << '\n'
    << "seed = " << seed << '\n'
    << "created = " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  for (const auto& rel : st.files)
    f << "file " << rel.generic_string() << " sha256 = " << sha256_file(st.dir / rel) << '\n';
  f << "file plot.py sha256 = " << sha256_file(st.dir / "plot.py") << '\n';
}

}  // namespace

RunSummary run_experiment(const Config& cfg_in, const RunOptions& opt) {
  const auto v = validate_config(cfg_in);
  if (!v.ok()) {
    std::string msg = "invalid config:";
    for (const auto& e : v.errors) msg += "\n  " + e;
    throw Error(ErrorKind::Usage, msg);
  }
  Config cfg = cfg_in;
  if (opt.seed) cfg.set("seed", static_cast<double>(*opt.seed));
  if (opt.checkpoint_every && *opt.checkpoint_every <= 0)
    throw Error(ErrorKind::Usage, "--checkpoint-every must be positive");
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  fs::path out = opt.out.empty() ? fs::path(cfg.string("out", "entroflow_out")) : opt.out;

  Stage st;
  st.dir = out.parent_path() / (out.filename().string() + ".partial");
  fs::remove_all(st.dir);
  fs::create_directories(st.dir);
  RunSummary sum;
  try {
    const auto g = metric_from_config(cfg);
    const auto kind = cfg.string("kind");
    if (kind == "lambda") sum.headline = run_lambda(cfg, g, st);
    else if (kind == "lambda-infinity") sum.headline = run_lambda_infinity(cfg, g, st);
    else if (kind == "flow") sum.headline = run_flow(cfg, g, opt, st);
    else if (kind == "entropy-audit") sum.headline = run_entropy(cfg, g, opt, st);
    else if (kind == "breather-check") sum.headline = run_breather(cfg, g, opt, st);
    else sum.headline = run_noncollapse(cfg, g, opt, st);
    write_plot_script(st);
    write_manifest(st, cfg, seed);
  } catch (...) {
    fs::remove_all(st.dir);
    throw;
  }
  fs::create_directories(out);
  for (const auto& e : fs::directory_iterator(st.dir)) {
    const auto target = out / e.path().filename();
    fs::remove_all(target);
    fs::rename(e.path(), target);
  }
  fs::remove_all(st.dir);
  sum.files = st.files;
  sum.files.push_back("plot.py");
  sum.files.push_back("manifest.txt");
  return sum;
}

}  // namespace entroflow
