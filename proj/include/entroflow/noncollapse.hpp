#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entroflow/flow.hpp"
#include "entroflow/geometry.hpp"
#include "entroflow/minimizer.hpp"

namespace entroflow {

struct BallSample {
  double t = 0.0;
  double center = 0.0;  // arclength of the on-axis center
  double r = 0.0;
  double max_R = 0.0;   // over the shell range the ball can reach
  double volume = 0.0;
  double ratio = 0.0;   // |B| / r^n
  bool admissible = false;
};

struct NoncollapseReport {
  std::vector<BallSample> samples;
  double kappa = 0.0;  // min ratio over admissible samples
  bool empty = true;   // no admissible sample

  // along a trajectory, one entry per audited checkpoint
  std::vector<double> times;
  std::vector<double> sobolev_A;
  std::vector<double> kappa_t;
  std::vector<double> lambda_t;  // empty unless requested
  bool passed = true;
  std::vector<std::string> failures;
};

// Volume of the metric ball of radius r around the on-axis point at arclength
// `center`. Boundary from geodesic shooting in the meridian surface.
double axial_ball_volume(const WarpedMetric& g, double center, double r,
                         std::size_t rays = 512);

// Scalar curvature ceiling over every shell a ball can touch.
double max_R_on_ball(const WarpedMetric& g, double center, double r);

NoncollapseReport kappa_scan(const WarpedMetric& g, const std::vector<double>& centers,
                             const std::vector<double>& radii, double t = 0.0);

struct AuditOptions {
  std::vector<double> centers;  // default: {0, S/8}
  std::vector<double> radii;    // default: S * {1/64, 1/32, 1/16, 1/8}
  double sobolev_factor = 1.1;
  double kappa_factor = 0.5;
  bool with_lambda = false;
  double lambda_slack = 1e-4;
  ContinuationSchedule schedule;  // used when with_lambda
  MinimizerOptions minimizer;
  std::uint64_t seed = 1;
};

NoncollapseReport alltime_audit(const FlowTrajectory& traj, const AuditOptions& opt = {});

// CSV: t, center_s, r, maxR, ratio, admissible
void write_noncollapse_csv(std::ostream& os, const NoncollapseReport& rep);

}  // namespace entroflow
