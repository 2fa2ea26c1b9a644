#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/geometry.hpp"

namespace entroflow {

struct MinimizerOptions {
  double tolerance = 1e-5;  // weighted L^2 norm of the E-L residual
  long max_iterations = 200000;
  double initial_step = 1.0;
};

struct MinimizerResult {
  RadialFunction v;
  double lambda = 0.0;
  double F = 0.0;
  double N = 0.0;
  double beta = 0.0;
  double m = 0.0;  // max v
  double residual = 0.0;
  double alpha = 1.0;
  int n = 3;
  Domain domain;
  long iterations = 0;
  bool converged = false;
  // lambda >= 0: no attainment claim, the value only bounds the infimum above
  bool upper_bound_only = false;

  // lambda + alpha n/2 - alpha (n/2) ln F - s_n
  double beta_formula() const;
  // -alpha n/2 + N + beta
  double lagrange_defect() const;
  // e^{-alpha n/4} F^{alpha n/4} e^{s_n/2}
  double max_lower_bound() const;
};

// Discrete E-L residual, beta taken from the given lambda.
double el_residual(const RadialFunction& v, const WarpedMetric& g, double alpha,
                   const Domain& d, double lambda);
double el_residual(const RadialFunction& v, const WarpedMetric& g, double alpha,
                   const Domain& d);

// Minimizes L(., g, alpha, d) over nonnegative unit-norm v vanishing on the
// boundary of d. Implicit normalized descent with backtracking.
MinimizerResult minimize(const WarpedMetric& g, double alpha, const Domain& d,
                         std::optional<RadialFunction> init = std::nullopt,
                         const MinimizerOptions& opt = {});
MinimizerResult minimize_ball(const WarpedMetric& g, double alpha, double r,
                              std::optional<RadialFunction> init = std::nullopt,
                              const MinimizerOptions& opt = {});

// Gaussian bump at the origin of width r/4 (balls), or a sine arch across
// the annulus (exteriors); unit norm on the domain.
RadialFunction default_init(const WarpedMetric& g, const Domain& d);

struct ContinuationSchedule {
  std::vector<double> alphas{1.5, 1.25, 1.1, 1.05, 1.01};
  std::vector<double> radii;
  std::vector<double> tolerances;  // per alpha stage; empty: the minimizer option

  void validate() const;
  double tolerance(std::size_t stage, double fallback) const;
};

struct ContinuationResult {
  MinimizerResult result;               // last stage
  std::vector<MinimizerResult> stages;  // one per alpha
  bool monotonicity_violation = false;  // only judged on stages with F >= 1
  bool energy_bounded = true;           // F below 10x the first stage value
};

ContinuationResult continuation_alpha(const WarpedMetric& g, const Domain& d,
                                      const ContinuationSchedule& schedule,
                                      std::optional<RadialFunction> init = std::nullopt,
                                      const MinimizerOptions& opt = {});
ContinuationResult continuation_alpha(const WarpedMetric& g, double r,
                                      const ContinuationSchedule& schedule,
                                      const MinimizerOptions& opt = {});

// -n/2 - (alpha - 1)(n/2) ln(A |B|^{2/n})
double continuation_lower_bound(int n, double alpha, double sobolev_A, double ball_vol);

struct WholeResult {
  MinimizerResult result;                   // alpha = 1 at the largest radius
  std::vector<ContinuationResult> by_radius;
  std::vector<double> lambdas;              // alpha = 1 value per radius
  double lambda = 0.0;
  double tail = 0.0;  // last increment, reported as the error bar
  bool uniform_bounds = true;               // max v and F within 2x across radii
};
// Ball exhaustion. The schedule always ends with an alpha = 1 stage.
WholeResult lambda_whole(const WarpedMetric& g, const ContinuationSchedule& schedule,
                         const MinimizerOptions& opt = {});

struct InfinityResult {
  double lambda_inf = 0.0;
  std::vector<double> radii;
  std::vector<MinimizerResult> results;
  bool monotone = true;
};
// Exteriors M - B(0, r) truncated at the grid end, which must reach 4r.
InfinityResult lambda_infinity(const WarpedMetric& g, std::vector<double> radii,
                               const ContinuationSchedule& schedule = {},
                               const MinimizerOptions& opt = {});

void write_stage_header(std::ostream& os);
void write_stage_row(std::ostream& os, double r, const MinimizerResult& m);
void write_profile(std::ostream& os, const WarpedMetric& g, const RadialFunction& v);

}  // namespace entroflow
