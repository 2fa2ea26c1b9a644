#include "entroflow/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "entroflow/error.hpp"

namespace entroflow {

double MinimizerResult::beta_formula() const {
  return lambda + alpha * 0.5 * n - alpha * 0.5 * n * std::log(F) - s_n(n);
}

double MinimizerResult::lagrange_defect() const { return -alpha * 0.5 * n + N + beta; }

double MinimizerResult::max_lower_bound() const {
  const double e = alpha * 0.25 * n;
  return std::exp(-e) * std::pow(F, e) * std::exp(0.5 * s_n(n));
}

namespace {

// Everything the descent needs for one (metric, alpha, domain) problem.
class Problem {
 public:
  Problem(const WarpedMetric& g, double alpha, const Domain& d)
      : g_(g), alpha_(alpha), range_(resolve(d, g)), n_(g.dim()), K_(stiffness(g, range_)) {
    lo_ = range_.inner_boundary() ? range_.first + 1 : range_.first;
    hi_ = range_.last - 1;
    const auto& R = g.curvature().R;
    double minR = std::numeric_limits<double>::infinity();
    for (std::size_t i = range_.first; i <= range_.last; ++i) minR = std::min(minR, R[i]);
    if (minR < 0.0) {
      RadialFunction probe(g.size(), 0.0);
      probe[range_.first + 1] = 1.0;
      e0_ = log_sobolev_L(normalized(probe), g, 1.0, d).E0_minus;
    }
  }

  NodeRange range() const { return range_; }

  RadialFunction normalized(RadialFunction v) const {
    require(v.size() == g_.size(), ErrorKind::InvalidInput, "function not aligned with grid");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i < lo_ || i > hi_) v[i] = 0.0;
      require(std::isfinite(v[i]), ErrorKind::InvalidInput, "non-finite test function");
      v[i] = std::abs(v[i]);
    }
    const double m = norm_sq(v, g_, range_);
    require(m > 0.0, ErrorKind::InvalidInput, "test function vanishes on the domain");
    const double k = 1.0 / std::sqrt(m);
    for (auto& a : v) a *= k;
    return v;
  }

  double energy(const RadialFunction& v) const {
    const auto& q = g_.weights();
    const auto& R = g_.curvature().R;
    double pot = 0.0;
    for (std::size_t i = lo_; i <= hi_; ++i) pot += q[i] * R[i] * v[i] * v[i];
    const double F = 4.0 * K_.quad(v) + pot + e0_;
    require(std::isfinite(F) && F > 1e-300, ErrorKind::DegenerateEnergy,
            "energy collapsed to zero during descent");
    return F;
  }

  double value(const RadialFunction& v) const {
    return -entropy_N(v, g_, range_) + alpha_ * 0.5 * n_ * std::log(energy(v)) + s_n(n_);
  }

  double residual(const RadialFunction& v, double lambda) const {
    const double F = energy(v);
    const double beta = lambda + alpha_ * 0.5 * n_ - alpha_ * 0.5 * n_ * std::log(F) - s_n(n_);
    const double c = alpha_ * 0.5 * n_ / F;
    const auto& q = g_.weights();
    const auto& R = g_.curvature().R;
    const auto kv = K_.apply(v);
    double sum = 0.0;
    for (std::size_t i = lo_; i <= hi_; ++i) {
      const double lap = -kv[i - K_.first] / q[i];
      const double vlv = v[i] > 0.0 ? v[i] * std::log(v[i]) : 0.0;
      const double r = c * (4.0 * lap - R[i] * v[i]) + 2.0 * vlv + beta * v[i];
      sum += q[i] * r * r;
    }
    return std::sqrt(sum);
  }

  // (Q + dt [c (4K + Q R+) + Q V]) w = Q v + dt c Q R- v, then |w| renormalized
  RadialFunction step(const RadialFunction& v, double dt) const {
    const double F = energy(v);
    const double c = alpha_ * 0.5 * n_ / F;
    const double mx = *std::max_element(v.begin(), v.end());
    const auto& q = g_.weights();
    const auto& R = g_.curvature().R;
    const std::size_t m = hi_ - lo_ + 1;
    const std::size_t off = lo_ - K_.first;
    const double k = dt * c * 4.0;
    std::vector<double> d0(m), d1(m, 0.0), d2(m, 0.0), rhs(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = lo_ + j;
      const double V = 2.0 * std::log(mx / std::max(v[i], mx * 1e-150));
      const double Rp = std::max(R[i], 0.0);
      const double Rm = std::max(-R[i], 0.0);
      d0[j] = q[i] * (1.0 + dt * (c * Rp + V)) + k * K_.d0[off + j];
      d1[j] = k * K_.d1[off + j];
      d2[j] = k * K_.d2[off + j];
      rhs[j] = q[i] * v[i] * (1.0 + dt * c * Rm);
    }
    const auto sol = solve_spd_pentadiagonal(d0, d1, d2, std::move(rhs));
    RadialFunction w(v.size(), 0.0);
    for (std::size_t j = 0; j < m; ++j) w[lo_ + j] = std::abs(sol[j]);
    return normalized(std::move(w));
  }

 private:
  const WarpedMetric& g_;
  double alpha_;
  NodeRange range_;
  int n_;
  Stiffness K_;
  double e0_ = 0.0;
  std::size_t lo_ = 0, hi_ = 0;
};

MinimizerResult finish(const Problem& p, const WarpedMetric& g, double alpha, const Domain& d,
                       RadialFunction v, long it, double residual, bool converged) {
  MinimizerResult out;
  out.n = g.dim();
  out.alpha = alpha;
  out.domain = d;
  out.F = p.energy(v);
  out.N = entropy_N(v, g, p.range());
  out.lambda = -out.N + alpha * 0.5 * out.n * std::log(out.F) + s_n(out.n);
  out.beta = out.beta_formula();
  out.m = *std::max_element(v.begin(), v.end());
  out.residual = residual;
  out.iterations = it;
  out.converged = converged;
  out.upper_bound_only = out.lambda >= 0.0;
  out.v = std::move(v);
  return out;
}

}  // namespace

double el_residual(const RadialFunction& v, const WarpedMetric& g, double alpha, const Domain& d,
                   double lambda) {
  Problem p(g, alpha, d);
  return p.residual(v, lambda);
}

double el_residual(const RadialFunction& v, const WarpedMetric& g, double alpha,
                   const Domain& d) {
  Problem p(g, alpha, d);
  return p.residual(v, p.value(v));
}

RadialFunction default_init(const WarpedMetric& g, const Domain& d) {
  const auto& s = g.s();
  const auto range = resolve(d, g);
  RadialFunction v(g.size(), 0.0);
  if (d.kind == Domain::Kind::Exterior) {
    const double a = s[range.first];
    const double b = s[range.last];
    for (std::size_t i = range.first; i <= range.last; ++i)
      v[i] = std::sin(std::numbers::pi * (s[i] - a) / (b - a));
  } else {
    const double w = 0.25 * s[range.last];
    for (std::size_t i = 0; i <= range.last; ++i) v[i] = std::exp(-0.5 * s[i] * s[i] / (w * w));
  }
  v[range.last] = 0.0;
  const double m = norm_sq(v, g, range);
  for (auto& a : v) a /= std::sqrt(m);
  return v;
}

MinimizerResult minimize(const WarpedMetric& g, double alpha, const Domain& d,
                         std::optional<RadialFunction> init, const MinimizerOptions& opt) {
  require(alpha >= 1.0, ErrorKind::InvalidInput, "alpha must be at least 1");
  require(alpha > 1.0 || init.has_value(), ErrorKind::InvalidInput,
          "alpha = 1 needs a warm start");
  Problem p(g, alpha, d);
  RadialFunction v = p.normalized(init ? std::move(*init) : default_init(g, d));
  double L = p.value(v);
  double dt = opt.initial_step;
  double res = p.residual(v, L);
  long it = 0;
  for (; it < opt.max_iterations && res >= opt.tolerance; ++it) {
    RadialFunction w;
    double Lw = 0.0;
    for (;;) {
      w = p.step(v, dt);
      Lw = p.value(w);
      if (Lw <= L + 1e-15) break;
      dt *= 0.5;
      if (dt < 1e-14) return finish(p, g, alpha, d, std::move(v), it, res, false);
    }
    v = std::move(w);
    L = Lw;
    dt = std::min(dt * 1.5, 1e6);
    res = p.residual(v, L);
  }
  return finish(p, g, alpha, d, std::move(v), it, res, res < opt.tolerance);
}

MinimizerResult minimize_ball(const WarpedMetric& g, double alpha, double r,
                              std::optional<RadialFunction> init, const MinimizerOptions& opt) {
  return minimize(g, alpha, Domain::ball(r), std::move(init), opt);
}

void ContinuationSchedule::validate() const {
  require(!alphas.empty(), ErrorKind::InvalidInput, "empty alpha schedule");
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const bool last = k + 1 == alphas.size();
    require(alphas[k] <= 2.0 && (alphas[k] > 1.0 || (last && alphas[k] == 1.0)),
            ErrorKind::InvalidInput, "alphas must lie in (1, 2], with an optional final 1");
    if (k > 0)
      require(alphas[k] < alphas[k - 1], ErrorKind::InvalidInput,
              "alphas must be strictly decreasing");
  }
  for (std::size_t k = 1; k < radii.size(); ++k)
    require(radii[k] > radii[k - 1], ErrorKind::InvalidInput,
            "radii must be strictly increasing");
  for (double t : tolerances) require(t > 0.0, ErrorKind::InvalidInput, "tolerances must be > 0");
  require(tolerances.empty() || tolerances.size() == alphas.size(), ErrorKind::InvalidInput,
          "one tolerance per alpha stage");
}

double ContinuationSchedule::tolerance(std::size_t stage, double fallback) const {
  return tolerances.empty() ? fallback : tolerances[std::min(stage, tolerances.size() - 1)];
}

ContinuationResult continuation_alpha(const WarpedMetric& g, const Domain& d,
                                      const ContinuationSchedule& schedule,
                                      std::optional<RadialFunction> init,
                                      const MinimizerOptions& opt) {
  schedule.validate();
  ContinuationResult out;
  std::optional<RadialFunction> start = std::move(init);
  for (std::size_t k = 0; k < schedule.alphas.size(); ++k) {
    MinimizerOptions o = opt;
    o.tolerance = schedule.tolerance(k, opt.tolerance);
    auto res = minimize(g, schedule.alphas[k], d, start, o);
    start = res.v;
    if (!out.stages.empty()) {
      const auto& prev = out.stages.back();
      if (prev.F >= 1.0 && res.F >= 1.0 && res.lambda > prev.lambda + 1e-6)
        out.monotonicity_violation = true;
      if (res.F > 10.0 * out.stages.front().F) out.energy_bounded = false;
    }
    out.stages.push_back(std::move(res));
  }
  out.result = out.stages.back();
  return out;
}

ContinuationResult continuation_alpha(const WarpedMetric& g, double r,
                                      const ContinuationSchedule& schedule,
                                      const MinimizerOptions& opt) {
  return continuation_alpha(g, Domain::ball(r), schedule, std::nullopt, opt);
}

double continuation_lower_bound(int n, double alpha, double sobolev_A, double ball_vol) {
  return -0.5 * n - (alpha - 1.0) * 0.5 * n * std::log(sobolev_A * std::pow(ball_vol, 2.0 / n));
}

namespace {

// alpha > 1 part of the schedule
ContinuationSchedule strict_part(const ContinuationSchedule& s) {
  ContinuationSchedule out = s;
  if (out.alphas.back() == 1.0) {
    out.alphas.pop_back();
    if (!out.tolerances.empty()) out.tolerances.pop_back();
  }
  return out;
}

double final_tolerance(const ContinuationSchedule& s, double fallback) {
  return s.alphas.back() == 1.0 ? s.tolerance(s.alphas.size() - 1, fallback) : fallback;
}

// alpha = 1 stage from whichever candidate has the lower value
MinimizerResult final_stage(const WarpedMetric& g, const Domain& d,
                            const std::vector<const RadialFunction*>& candidates,
                            const MinimizerOptions& opt) {
  Problem p(g, 1.0, d);
  const RadialFunction* best = nullptr;
  double bestL = std::numeric_limits<double>::infinity();
  for (const auto* c : candidates) {
    const double L = p.value(p.normalized(*c));
    if (L < bestL) {
      bestL = L;
      best = c;
    }
  }
  return minimize(g, 1.0, d, *best, opt);
}

}  // namespace

WholeResult lambda_whole(const WarpedMetric& g, const ContinuationSchedule& schedule,
                         const MinimizerOptions& opt) {
  schedule.validate();
  require(!schedule.radii.empty(), ErrorKind::InvalidInput, "no radii in schedule");
  const auto strict = strict_part(schedule);
  require(!strict.alphas.empty(), ErrorKind::InvalidInput, "schedule needs an alpha > 1");
  MinimizerOptions fin = opt;
  fin.tolerance = final_tolerance(schedule, opt.tolerance);

  WholeResult out;
  for (double r : schedule.radii) {
    const Domain d = Domain::ball(r);
    auto cont = continuation_alpha(g, d, strict, std::nullopt, opt);
    std::vector<const RadialFunction*> cand{&cont.result.v};
    if (!out.by_radius.empty()) cand.push_back(&out.by_radius.back().result.v);
    auto res = final_stage(g, d, cand, fin);
    if (!out.lambdas.empty())
      require(res.lambda <= out.lambdas.back() + 1e-6, ErrorKind::DomainMonotonicityViolation,
              "lambda increased from radius to radius");
    out.lambdas.push_back(res.lambda);
    cont.stages.push_back(res);
    cont.result = std::move(res);
    out.by_radius.push_back(std::move(cont));
  }
  const auto& first = out.by_radius.front().result;
  for (const auto& c : out.by_radius) {
    const double rm = c.result.m / first.m;
    const double rf = c.result.F / first.F;
    if (rm > 2.0 || rm < 0.5 || rf > 2.0 || rf < 0.5) out.uniform_bounds = false;
  }
  out.result = out.by_radius.back().result;
  out.lambda = out.result.lambda;
  out.tail = out.lambdas.size() > 1 ? out.lambdas.back() - out.lambdas[out.lambdas.size() - 2]
                                    : 0.0;
  return out;
}

InfinityResult lambda_infinity(const WarpedMetric& g, std::vector<double> radii,
                               const ContinuationSchedule& schedule,
                               const MinimizerOptions& opt) {
  require(!radii.empty(), ErrorKind::InvalidInput, "no radii");
  std::sort(radii.begin(), radii.end());
  for (double r : radii)
    require(g.total_arclength() >= 4.0 * r * (1.0 - 1e-9), ErrorKind::InsufficientDomain,
            "outer truncation must reach 4r");
  schedule.validate();
  const auto strict = strict_part(schedule);
  MinimizerOptions fin = opt;
  fin.tolerance = final_tolerance(schedule, opt.tolerance);

  // largest radius first; each smaller exterior also sees the previous minimizer
  std::vector<MinimizerResult> res(radii.size());
  for (std::size_t k = radii.size(); k-- > 0;) {
    const Domain d = Domain::exterior(radii[k]);
    auto cont = continuation_alpha(g, d, strict, std::nullopt, opt);
    std::vector<const RadialFunction*> cand{&cont.result.v};
    if (k + 1 < radii.size()) cand.push_back(&res[k + 1].v);
    res[k] = final_stage(g, d, cand, fin);
  }
  InfinityResult out;
  for (std::size_t k = 1; k < res.size(); ++k)
    if (res[k].lambda < res[k - 1].lambda - 1e-6) out.monotone = false;
  out.radii = radii;
  out.lambda_inf = res.back().lambda;
  out.results = std::move(res);
  return out;
}

void write_stage_header(std::ostream& os) {
  os << "alpha,r,lambda,F,beta,m,residual,iterations\n";
}

void write_stage_row(std::ostream& os, double r, const MinimizerResult& m) {
  os << std::setprecision(12) << m.alpha << ',' << r << ',' << m.lambda << ',' << m.F << ','
     << m.beta << ',' << m.m << ',' << m.residual << ',' << m.iterations << '\n';
}

void write_profile(std::ostream& os, const WarpedMetric& g, const RadialFunction& v) {
  os << "x,v\n" << std::setprecision(15);
  for (std::size_t i = 0; i < g.size(); ++i) os << g.x()[i] << ',' << v[i] << '\n';
}

}  // namespace entroflow
