#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "entroflow/error.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/profiles.hpp"
#include "oracles.hpp"

using namespace entroflow;

namespace {

constexpr double kPi = std::numbers::pi;

// unit-norm sqrt of a Gaussian density with variance sigma^2 per coordinate
RadialFunction gaussian_root(const WarpedMetric& g, double sigma) {
  RadialFunction v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    v[i] = std::exp(-g.s()[i] * g.s()[i] / (4.0 * sigma * sigma));
  double m = 0;
  for (std::size_t i = 0; i < g.size(); ++i) m += g.weights()[i] * v[i] * v[i];
  for (auto& a : v) a /= std::sqrt(m);
  return v;
}

RadialFunction heat_density(const WarpedMetric& g, double tau) {
  RadialFunction u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = oracle::heat_kernel(3, tau, g.s()[i]);
  const double m = integrate(g, u);
  for (auto& a : u) a /= m;
  return u;
}

}  // namespace

TEST_CASE("normalizing constant") {
  CHECK(s_n(3) == doctest::Approx(-1.5 * std::log(6.0 * kPi) - 1.5));
  CHECK(s_n(4) == doctest::Approx(-2.0 * std::log(8.0 * kPi) - 2.0));
}

TEST_CASE("Gaussians: closed-form F, N and L = 0 at alpha = 1") {
  const auto g = profiles::flat(3, 16.0, 1600);
  for (double sigma : {0.5, 1.0, 2.0}) {
    CAPTURE(sigma);
    const auto v = gaussian_root(g, sigma);
    const double F = energy_F(v, g, Domain::whole());
    const double N = entropy_N(v, g, Domain::whole());
    CHECK(F == doctest::Approx(3.0 / (sigma * sigma)).epsilon(1e-3));
    CHECK(N == doctest::Approx(-1.5 * std::log(2.0 * kPi * std::numbers::e * sigma * sigma))
                   .epsilon(1e-3));
    const auto rep = log_sobolev_L(v, g, 1.0, Domain::whole());
    CHECK(std::abs(rep.L) < 1e-3);
    CHECK(rep.recompute() == doctest::Approx(rep.L).epsilon(1e-14));
    // alpha > 1 on a spread-out Gaussian (F < 1) lowers L
    if (F < 1.0) CHECK(log_sobolev_L(v, g, 1.5, Domain::whole()).L < rep.L);
  }
}

TEST_CASE("discrete energy is second-order consistent") {
  std::vector<double> h, err;
  for (std::size_t cells : {400u, 800u, 1600u}) {
    const auto g = profiles::flat(3, 12.0, cells);
    const auto v = gaussian_root(g, 1.0);
    h.push_back(12.0 / cells);
    err.push_back(std::abs(energy_F(v, g, Domain::whole()) - 3.0));
  }
  CHECK(oracle::observed_order(h, err) > 1.8);
}

TEST_CASE("stiffness form is symmetric and nonnegative") {
  const auto g = profiles::plummer(3, 1.0, 1.0, 8.0, 200);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (const auto d : {Domain::whole(), Domain::ball(4.0), Domain::exterior(2.0)}) {
    const auto r = resolve(d, g);
    const auto K = stiffness(g, r);
    for (int trial = 0; trial < 5; ++trial) {
      RadialFunction a(g.size()), b(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        a[i] = nd(rng);
        b[i] = nd(rng);
      }
      CHECK(K.quad(a) >= 0.0);
      const auto Ka = K.apply(a);
      const auto Kb = K.apply(b);
      double ab = 0, ba = 0;
      for (std::size_t j = 0; j < Ka.size(); ++j) {
        ab += b[r.first + j] * Ka[j];
        ba += a[r.first + j] * Kb[j];
      }
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    }
    // constants carry no energy on the whole grid
    if (d.kind == Domain::Kind::Whole) {
      RadialFunction one(g.size(), 1.0);
      CHECK(std::abs(K.quad(one)) < 1e-10);
    }
  }
}

TEST_CASE("discrete log-Sobolev inequality on flat space") {
  // Gaussians down to the grid scale and single-node spikes stay above 0
  const auto g = profiles::flat(3, 10.0, 200);
  const double h = 10.0 / 200;
  for (double sigma : {0.5 * h, h, 2 * h, 5 * h, 0.5, 1.0}) {
    CAPTURE(sigma);
    CHECK(log_sobolev_L(gaussian_root(g, sigma), g, 1.0, Domain::whole()).L >= -1e-2);
  }
  for (std::size_t k : {0u, 1u, 2u, 5u, 50u}) {
    CAPTURE(k);
    RadialFunction v(g.size(), 0.0);
    v[k] = 1.0 / std::sqrt(g.weights()[k]);
    CHECK(log_sobolev_L(v, g, 1.0, Domain::whole()).L >= -1e-2);
  }
}

TEST_CASE("alpha = 1 functional is scale invariant") {
  const auto g = profiles::plummer(3, 1.0, 1.0, 12.0, 600);
  const auto v = gaussian_root(g, 1.3);
  for (double a : {0.25, 3.0, 40.0}) {
    const auto ga = scale_metric(g, a);
    RadialFunction va = v;
    for (auto& x : va) x *= std::pow(a, -0.75);
    CHECK(log_sobolev_L(va, ga, 1.0, Domain::whole()).L ==
          doctest::Approx(log_sobolev_L(v, g, 1.0, Domain::whole()).L).epsilon(1e-12));
  }
}

TEST_CASE("W entropy of the heat kernel") {
  const auto g = profiles::flat(3, 20.0, 2000);
  for (double tau : {0.5, 1.0, 2.0}) {
    CAPTURE(tau);
    const auto u = heat_density(g, tau);
    CHECK(std::abs(w_entropy(u, g, tau)) < 1e-3);
    const auto rm = inf_rho_w(u, g);
    CHECK(rm.rho == doctest::Approx(tau).epsilon(1e-3));
    CHECK(std::abs(rm.W) < 1e-3);
    CHECK(std::abs(rm.L) < 1e-3);
    // W(s) is minimized near s = tau
    CHECK(w_entropy(u, g, 0.7 * tau) > rm.W);
    CHECK(w_entropy(u, g, 1.4 * tau) > rm.W);
  }
}

TEST_CASE("Q vanishes on the Gaussian soliton and is positive otherwise") {
  const auto g = profiles::flat(3, 20.0, 2000);
  const auto q = q_functional(heat_density(g, 1.0), g);
  CHECK(std::abs(q.Q) < 1e-4);
  CHECK_FALSE(q.warn);
  const auto p = profiles::plummer(3, 1.0, 1.0, 20.0, 2000);
  CHECK(q_functional(heat_density(p, 1.0), p).Q > 1e-3);
}

TEST_CASE("Sobolev constant of flat space") {
  CHECK(euclidean_sobolev_A(3) == doctest::Approx(oracle::sobolev_A3()).epsilon(1e-12));
  const auto g = profiles::flat(3, 200.0, 4000);
  const auto est = sobolev_constant(g, sobolev_trials(g));
  CHECK(est.A <= oracle::sobolev_A3() * 1.01);
  CHECK(est.A >= oracle::sobolev_A3() * 0.9);
  CHECK(est.kappa == doctest::Approx(4.0 * kPi / 3.0).epsilon(0.2));
}

TEST_CASE("functional errors") {
  const auto g = profiles::flat(3, 10.0, 100);
  const auto v = gaussian_root(g, 1.0);
  CHECK_THROWS_AS(log_sobolev_L(v, g, 0.9, Domain::whole()), Error);
  RadialFunction w = v;
  for (auto& a : w) a *= 2.0;
  try {
    entropy_N(w, g, Domain::whole());
    FAIL("non-unit norm accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PreconditionViolation);
  }
  RadialFunction u(g.size(), 0.0);
  CHECK_THROWS_AS(w_entropy(u, g, 1.0), Error);
  CHECK_THROWS_AS(w_entropy(v, g, -1.0), Error);
  RadialFunction shortv(5, 1.0);
  CHECK_THROWS_AS(energy_F(shortv, g, Domain::whole()), Error);
}
