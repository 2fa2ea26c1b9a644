#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entroflow/geometry.hpp"
#include "entroflow/minimizer.hpp"

namespace entroflow {

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<WarpedMetric> snapshots;
  double step_size = 0.0;
  long steps = 0;
  std::vector<std::size_t> checkpoints;  // snapshot indices used for audits
  bool nonnegative_R = false;            // min R >= 0 initially
  std::vector<double> min_R;             // per snapshot
  std::vector<double> max_curvature;     // max |K1|, |K2| per snapshot

  std::size_t index_of(double t) const;  // snapshot at time t (must match)
};

// min R >= 0 up to rounding noise in the far field.
bool scalar_curvature_nonnegative(const WarpedMetric& g);

// Largest stable explicit step, c (min ds)^2 with c = 0.25.
double flow_step_bound(const WarpedMetric& g);

// Ricci flow of the warped product in the fixed-x gauge, explicit Euler.
// dt <= 0 picks 0.2 (min ds)^2. A snapshot is stored every `every` steps and
// at T.
FlowTrajectory ricci_evolve(const WarpedMetric& g0, double T, double dt = 0.0, long every = 0);

// Trajectory whose snapshots are all the same metric (flat static flow etc.).
FlowTrajectory static_trajectory(const WarpedMetric& g, std::vector<double> times);

// Rates (dphi/dt, dpsi/dt) used by ricci_evolve.
std::pair<std::vector<double>, std::vector<double>> ricci_rates(const WarpedMetric& g);

struct ConjugateHeatSolution {
  std::vector<double> times;  // decreasing from t2
  std::vector<RadialFunction> densities;
  std::vector<double> mass;
  std::vector<std::size_t> snapshot;  // trajectory index for each stored time
};

struct HeatOptions {
  int substeps = 4;     // per trajectory interval
  int startup = 2;      // implicit Euler steps before Crank-Nicolson
  double max_drift = 1e-4;
};

// Solves the conjugate heat equation backward from t2 to t1 in the mass form
// d/dtau (u dg) = (Laplacian u) dg, tau = t2 - t.
ConjugateHeatSolution conjugate_heat_backward(const FlowTrajectory& traj,
                                              const RadialFunction& final_density, double t2,
                                              double t1, const HeatOptions& opt = {});

struct EntropyRow {
  double t = 0.0;
  double W = 0.0;
  double L = 0.0;
  double N = 0.0;
  double F = 0.0;
  double Q = 0.0;
  double dLdt_fd = 0.0;  // forward difference to the next row
  double QoverF = 0.0;
  double tol_fd = 0.0;
  bool q_warn = false;
};

struct EntropyReport {
  std::vector<EntropyRow> rows;  // increasing t
  double rho0 = 0.0;             // W scale offset at t2
  bool W_monotone = true;        // within 1e-6 (1 + |W|)
  bool dLdt_bound = true;        // dL/dt >= Q/F - tol_fd
  double min_Q = 0.0;
};

EntropyReport entropy_audit(const FlowTrajectory& traj, const ConjugateHeatSolution& chs);

struct SolitonReport {
  enum class Verdict { Soliton, NotSoliton, Inconclusive };
  double t = 0.0;
  double epsilon = 0.0;
  RadialFunction f;
  double l = 0.0;
  double residual_traceless = 0.0;
  double residual_l = 0.0;
  std::size_t region_nodes = 0;
  Verdict verdict = Verdict::Inconclusive;
};
std::string to_string(SolitonReport::Verdict v);

SolitonReport soliton_residual(const WarpedMetric& g, const RadialFunction& u, double t = 0.0);
SolitonReport soliton_residual(const FlowTrajectory& traj, const ConjugateHeatSolution& chs,
                               double t);

struct Alignment {
  double c = 1.0;
  double a = 0.0, b = 1.0, d = 0.0;  // x -> x (1 + a e^{-(x/b)^2}) + d x
  double mismatch = 0.0;             // relative sup-norm of psi as a function of arclength
  double map_mismatch = 0.0;         // relative sup-norm of the pulled-back profiles
};
Alignment align_metrics(const WarpedMetric& g1, const WarpedMetric& g2);

struct BreatherOptions {
  ContinuationSchedule schedule;  // radii for the lambda evaluations
  MinimizerOptions minimizer;
  HeatOptions heat;
  double lambda_tol = 1e-3;
  double align_tol = 1e-4;
};

struct BreatherReport {
  Alignment alignment;
  double lambda1 = 0.0, lambda2 = 0.0;
  bool minimizers_converged = true;
  bool candidate = false;  // lambda and alignment both match
  std::optional<EntropyReport> entropy;
  std::vector<SolitonReport> solitons;
  std::string verdict;
};
BreatherReport breather_check(const FlowTrajectory& traj, double t1, double t2,
                              const BreatherOptions& opt);

void save_trajectory(const std::filesystem::path& dir, const FlowTrajectory& traj);
void write_entropy_csv(std::ostream& os, const EntropyReport& r);
void write_breather_report(std::ostream& os, const BreatherReport& r);

}  // namespace entroflow
