#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "entroflow/error.hpp"
#include "entroflow/geometry.hpp"
#include "entroflow/profiles.hpp"
#include "oracles.hpp"

using namespace entroflow;

namespace {

WarpedMetric build(const oracle::Profile& p, double extent, std::size_t cells) {
  auto x = profiles::uniform_grid(extent, cells);
  std::vector<double> phi(x.size()), psi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto X = oracle::Jet::var(x[i]);
    phi[i] = i == 0 ? p.phi(oracle::Jet::var(1e-300)).v : p.phi(X).v;
    psi[i] = i == 0 ? 0.0 : p.psi(X).v;
  }
  return WarpedMetric(3, std::move(x), std::move(phi), std::move(psi));
}

double max_R_error(const WarpedMetric& g, const oracle::Profile& p) {
  double err = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto X = oracle::Jet::var(g.x()[i]);
    const auto c = oracle::warped_curvature(3, p.phi(X), p.psi(X));
    err = std::max(err, std::abs(g.curvature().R[i] - c.R));
  }
  return err;
}

}  // namespace

TEST_CASE("curvature converges at second order on analytic profiles") {
  for (const auto& p : oracle::five_profiles()) {
    const std::string name = p.name;
    CAPTURE(name);
    const double extent = name == "sphere_cap" ? 2.5 : 8.0;
    std::vector<double> h, err;
    for (std::size_t cells : {200u, 400u, 800u}) {
      const auto g = build(p, extent, cells);
      h.push_back(extent / cells);
      err.push_back(max_R_error(g, p));
    }
    for (std::size_t k = 0; k < h.size(); ++k) CHECK(err[k] <= 50.0 * h[k] * h[k]);
    CHECK(oracle::observed_order(h, err) >= 1.9);
  }
}

TEST_CASE("round sphere has K1 = K2 = 1") {
  const auto g = profiles::sphere_cap(3, 2.0, 400);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.curvature().K1[i] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(g.curvature().K2[i] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(g.curvature().R[i] == doctest::Approx(6.0).epsilon(1e-5));
  }
}

TEST_CASE("flat metric is flat and the origin is regular") {
  const auto g = profiles::flat(3, 10.0, 200);
  for (double R : g.curvature().R) CHECK(std::abs(R) < 1e-10);
  CHECK(g.s().back() == doctest::Approx(10.0));
  // plummer: origin value continues the interior
  const auto p = profiles::plummer(3, 1.0, 1.0, 10.0, 400);
  CHECK(p.curvature().R[0] == doctest::Approx(p.curvature().R[1]).epsilon(1e-3));
}

TEST_CASE("quadrature integrates volumes") {
  const auto g = profiles::flat(3, 5.0, 500);
  std::vector<double> one(g.size(), 1.0);
  CHECK(integrate(g, one) == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 125.0).epsilon(1e-4));
  CHECK(ball_volume(g, 2.0) == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 8.0).epsilon(1e-4));
  const auto s = profiles::sphere_cap(3, 3.0, 600);
  for (double r : {0.5, 1.0, 2.0, 2.9})
    CHECK(ball_volume(s, r) == doctest::Approx(oracle::s3_ball_volume(r)).epsilon(1e-4));
  // a Gaussian: int e^{-x^2} over R^3 = pi^{3/2}
  std::vector<double> gauss(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) gauss[i] = std::exp(-g.x()[i] * g.x()[i]);
  CHECK(integrate(g, gauss) == doctest::Approx(std::pow(std::numbers::pi, 1.5)).epsilon(1e-4));
}

TEST_CASE("metric scaling") {
  const auto g = profiles::plummer(3, 1.0, 1.0, 10.0, 400);
  const double a = 2.7;
  const auto h = scale_metric(g, a);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    CHECK(h.curvature().R[i] == doctest::Approx(g.curvature().R[i] / a).epsilon(1e-10));
    CHECK(h.s()[i] == doctest::Approx(std::sqrt(a) * g.s()[i]).epsilon(1e-12));
    CHECK(h.weights()[i] == doctest::Approx(std::pow(a, 1.5) * g.weights()[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(scale_metric(g, -1.0), Error);
}

TEST_CASE("radial reparametrization preserves geometric quantities") {
  const auto g = profiles::plummer(3, 1.0, 1.0, 12.0, 1200);
  // y -> y + 0.1 y e^{-y^2/4}, onto a grid covering [0, 10]
  auto m = [](double y) { return y + 0.1 * y * std::exp(-0.25 * y * y); };
  auto dm = [](double y) { return 1.0 + 0.1 * std::exp(-0.25 * y * y) * (1.0 - 0.5 * y * y); };
  const auto h = radial_reparametrize(g, profiles::uniform_grid(10.0, 1000), m, dm);
  // R as a function of arclength is unchanged
  for (std::size_t i = 10; i < h.size(); i += 50) {
    const double s = h.s()[i];
    double Rg = 0;
    for (std::size_t j = 1; j < g.size(); ++j)
      if (g.s()[j] >= s) {
        const double t = (s - g.s()[j - 1]) / (g.s()[j] - g.s()[j - 1]);
        Rg = (1 - t) * g.curvature().R[j - 1] + t * g.curvature().R[j];
        break;
      }
    CHECK(h.curvature().R[i] == doctest::Approx(Rg).epsilon(1e-3).scale(1.0));
  }
  CHECK_THROWS_AS(
      radial_reparametrize(g, profiles::uniform_grid(10.0, 100), [](double y) { return -y; },
                           [](double) { return -1.0; }),
      Error);
}

TEST_CASE("asymptotic order of a power tail") {
  const auto g = profiles::power_tail(3, 1.0, 200.0, 4000);
  const auto af = af_decay_order(g);
  CHECK(af.tau == doctest::Approx(1.0).epsilon(0.1));
  CHECK(af.L_inf == doctest::Approx(1.0).epsilon(1e-2));
  const auto flat = af_decay_order(profiles::flat(3, 50.0, 500));
  CHECK(flat.exact);
}

TEST_CASE("domains snap to nodes") {
  const auto g = profiles::flat(3, 10.0, 100);
  const auto b = resolve(Domain::ball(3.0), g);
  CHECK(b.first == 0);
  CHECK(g.s()[b.last] == doctest::Approx(3.0));
  const auto e = resolve(Domain::exterior(4.0), g);
  CHECK(e.inner_boundary());
  CHECK(e.last == g.last());
  CHECK_THROWS_AS(resolve(Domain::ball(20.0), g), Error);
}

TEST_CASE("metric csv round trip") {
  const auto g = profiles::gaussian_bump(3, 1.0, 1.0, 8.0, 100);
  std::stringstream ss;
  write_metric_csv(ss, g);
  const auto h = read_metric_csv(ss, 3);
  REQUIRE(h.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(h.psi()[i] == doctest::Approx(g.psi()[i]).epsilon(1e-14));
    CHECK(h.curvature().R[i] == doctest::Approx(g.curvature().R[i]).epsilon(1e-8).scale(1.0));
  }
  std::stringstream bad("x,phi,psi,R\n0,1,0,0\n1,1,oops,0\n");
  CHECK_THROWS_AS(read_metric_csv(bad, 3), Error);
}

TEST_CASE("degenerate metrics are rejected") {
  auto x = profiles::uniform_grid(1.0, 20);
  std::vector<double> phi(x.size(), 1.0), psi = x;
  psi[5] = -0.1;
  try {
    WarpedMetric(3, x, phi, psi);
    FAIL("negative psi accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateMetric);
  }
  std::vector<double> phi0(x.size(), 1.0);
  phi0[3] = 0.0;
  CHECK_THROWS_AS(WarpedMetric(3, x, phi0, x), Error);
}
