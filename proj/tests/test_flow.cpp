#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "entroflow/error.hpp"
#include "entroflow/flow.hpp"
#include "entroflow/profiles.hpp"
#include "oracles.hpp"

using namespace entroflow;

namespace {

RadialFunction kernel_on(const WarpedMetric& g, double s, bool renormalize) {
  RadialFunction u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = oracle::heat_kernel(3, s, g.s()[i]);
  if (renormalize) {
    const double m = integrate(g, u);
    for (auto& a : u) a /= m;
  }
  return u;
}

std::vector<double> uniform_times(double T, int k) {
  std::vector<double> t;
  for (int i = 0; i <= k; ++i) t.push_back(T * i / k);
  return t;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("flat space is a fixed point of the flow") {
  const auto g = profiles::flat(3, 10.0, 100);
  const auto tr = ricci_evolve(g, 1.0);
  CHECK(tr.times.back() == doctest::Approx(1.0));
  CHECK(tr.nonnegative_R);
  const auto& end = tr.snapshots.back();
  CHECK(max_abs_diff(end.psi(), g.psi()) <= 1e-8);
  CHECK(max_abs_diff(end.phi(), g.phi()) <= 1e-8);
}

TEST_CASE("round sphere shrinks at rate Ric") {
  const auto g = profiles::sphere_cap(3, 2.5, 250);
  const auto [dphi, dpsi] = ricci_rates(g);
  for (std::size_t i = 1; i + 5 < g.size(); ++i) {
    // d psi/dt = -Ric_sph psi = -2 psi, d phi/dt = -Ric_rad phi = -2 phi
    CHECK(dpsi[i] == doctest::Approx(-2.0 * g.psi()[i]).epsilon(1e-4).scale(1.0));
    CHECK(dphi[i] == doctest::Approx(-2.0).epsilon(1e-4));
  }
}

TEST_CASE("parabolic rescaling commutes with the flow") {
  const auto g = profiles::plummer(3, 1.0, 1.0, 8.0, 160);
  const double a = 4.0, T = 0.05;
  const auto tr = ricci_evolve(g, T);
  const auto tr_a = ricci_evolve(scale_metric(g, a), a * T, a * tr.step_size);
  REQUIRE(tr_a.steps == tr.steps);
  const auto back = scale_metric(tr_a.snapshots.back(), 1.0 / a);
  CHECK(max_abs_diff(back.psi(), tr.snapshots.back().psi()) <= 1e-6);
  CHECK(max_abs_diff(back.phi(), tr.snapshots.back().phi()) <= 1e-6);
}

TEST_CASE("unstable steps are refused") {
  const auto g = profiles::flat(3, 10.0, 100);
  CHECK(flow_step_bound(g) == doctest::Approx(0.25 * 0.01));
  CHECK_THROWS_AS(ricci_evolve(g, 1.0, 0.01), Error);
  CHECK_THROWS_AS(ricci_evolve(g, -1.0), Error);
}

TEST_CASE("backward heat kernel on flat space") {
  const auto g = profiles::flat(3, 24.0, 1200);
  const auto tr = static_trajectory(g, uniform_times(1.0, 20));
  const auto chs = conjugate_heat_backward(tr, kernel_on(g, 1.0, true), 1.0, 0.0);
  CHECK(chs.times.front() == doctest::Approx(1.0));
  CHECK(chs.times.back() == doctest::Approx(0.0));
  const auto expect = kernel_on(g, 2.0, true);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num += g.weights()[i] * std::abs(chs.densities.back()[i] - expect[i]);
    den += g.weights()[i] * expect[i];
  }
  CHECK(num / den <= 1e-4);
  for (double m : chs.mass) CHECK(std::abs(m - 1.0) <= 1e-6);
}

TEST_CASE("entropy audit along a Plummer flow") {
  const auto g = profiles::plummer(3, 1.0, 1.0, 12.0, 400);
  const auto tr = ricci_evolve(g, 0.25, 0.0, 0);
  REQUIRE(tr.nonnegative_R);
  const auto chs = conjugate_heat_backward(tr, kernel_on(tr.snapshots.back(), 0.5, true),
                                           0.25, 0.0);
  const auto rep = entropy_audit(tr, chs);
  CHECK(rep.rows.size() >= 5);
  CHECK(rep.W_monotone);
  CHECK(rep.dLdt_bound);
  CHECK(rep.min_Q >= -1e-8);
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    CHECK(rep.rows[k].W >= rep.rows[k - 1].W - 1e-6 * (1 + std::abs(rep.rows[k].W)));
  std::ostringstream os;
  write_entropy_csv(os, rep);
  CHECK(os.str().rfind("t,W,L,N,F,Q", 0) == 0);
}

TEST_CASE("the Gaussian shrinker is detected as a soliton") {
  const auto g = profiles::flat(3, 30.0, 1500);
  const double tau = 1.5;
  const auto rep = soliton_residual(g, kernel_on(g, tau, false));
  CHECK(rep.verdict == SolitonReport::Verdict::Soliton);
  CHECK(rep.epsilon == doctest::Approx(-1.0 / tau).epsilon(1e-6));
  CHECK(rep.residual_traceless <= 1e-6);
  // an off-centre bump on a curved background is not
  const auto p = profiles::plummer(3, 1.0, 1.0, 12.0, 600);
  RadialFunction u(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    u[i] = std::exp(-(p.s()[i] - 3.0) * (p.s()[i] - 3.0));
  CHECK(soliton_residual(p, u).verdict == SolitonReport::Verdict::NotSoliton);
}

TEST_CASE("alignment recovers scale and radial map") {
  const auto g = profiles::plummer(3, 1.0, 1.0, 14.0, 1400);
  const double c = 1.7;
  auto m = [](double y) { return y * (1.0 + 0.1 * std::exp(-(y / 3) * (y / 3))) - 0.05 * y; };
  auto dm = [](double y) {
    const double e = std::exp(-(y / 3) * (y / 3));
    return 1.0 + 0.1 * e * (1.0 - 2.0 * y * y / 9.0) - 0.05;
  };
  const auto h = scale_metric(radial_reparametrize(g, profiles::uniform_grid(12.0, 1200), m, dm), c);
  const auto al = align_metrics(profiles::plummer(3, 1.0, 1.0, 12.0, 1200), h);
  CHECK(al.c == doctest::Approx(c).epsilon(1e-4));
  CHECK(al.mismatch <= 1e-4);
}

TEST_CASE("trajectories are written with a manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "entroflow_traj_test";
  std::filesystem::remove_all(dir);
  const auto tr = static_trajectory(profiles::flat(3, 4.0, 40), {0.0, 0.5});
  save_trajectory(dir, tr);
  CHECK(std::filesystem::exists(dir / "manifest.txt"));
  CHECK(std::filesystem::exists(dir / "snapshot_0001.csv"));
  std::ifstream f(dir / "snapshot_0001.csv");
  CHECK(read_metric_csv(f, 3).size() == 41);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(tr.index_of(0.3), Error);
}
