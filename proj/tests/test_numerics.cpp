#include <cmath>
#include <random>

#include "doctest.h"
#include "entroflow/error.hpp"
#include "entroflow/numerics.hpp"

using namespace entroflow;

namespace {

// dense Gaussian elimination with partial pivoting
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

}  // namespace

TEST_CASE("Fornberg weights differentiate polynomials exactly") {
  const std::vector<double> nodes{-0.3, 0.0, 0.4, 0.9, 1.5};
  const double z = 0.2;
  const auto w = fornberg_weights(z, nodes, 2);
  // p(x) = x^4 - 2x^3 + x, degree 4 is exact on 5 nodes
  auto p = [](double x) { return x * x * x * x - 2 * x * x * x + x; };
  double d0 = 0, d1 = 0, d2 = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    d0 += w[k][0] * p(nodes[k]);
    d1 += w[k][1] * p(nodes[k]);
    d2 += w[k][2] * p(nodes[k]);
  }
  CHECK(d0 == doctest::Approx(p(z)).epsilon(1e-12));
  CHECK(d1 == doctest::Approx(4 * z * z * z - 6 * z * z + 1).epsilon(1e-12));
  CHECK(d2 == doctest::Approx(12 * z * z - 12 * z).epsilon(1e-12));
}

TEST_CASE("radial stencil respects parity at the origin") {
  std::vector<double> x(41);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.05 * i;
  const RadialStencil st(x);
  std::vector<double> even(x.size()), odd(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    even[i] = std::cos(x[i]);
    odd[i] = std::sin(x[i]);
  }
  const auto de = st.apply(even, Parity::Even);
  const auto dd = st.apply(odd, Parity::Odd);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(de.d1[i] == doctest::Approx(-std::sin(x[i])).epsilon(1e-5).scale(1.0));
    CHECK(de.d2[i] == doctest::Approx(-std::cos(x[i])).epsilon(1e-4).scale(1.0));
    CHECK(dd.d1[i] == doctest::Approx(std::cos(x[i])).epsilon(1e-5).scale(1.0));
  }
  CHECK(std::abs(de.d1[0]) < 1e-14);
  CHECK(std::abs(dd.d2[0]) < 1e-14);
}

TEST_CASE("banded solvers agree with dense elimination") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 12;
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = u(rng);
    up[i] = u(rng);
    di[i] = 4.0 + u(rng);
    rhs[i] = u(rng);
  }
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = di[i];
    if (i > 0) a[i][i - 1] = lo[i];
    if (i + 1 < n) a[i][i + 1] = up[i];
  }
  const auto ref = dense_solve(a, rhs);
  const auto x = solve_tridiagonal(lo, di, up, rhs);
  for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-12));

  // symmetric positive definite pentadiagonal
  std::vector<double> d0(n), d1(n), d2(n);
  std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    d1[i] = u(rng);
    d2[i] = u(rng);
    d0[i] = 5.0 + u(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    s[i][i] = d0[i];
    if (i + 1 < n) s[i][i + 1] = s[i + 1][i] = d1[i];
    if (i + 2 < n) s[i][i + 2] = s[i + 2][i] = d2[i];
  }
  const auto ref5 = dense_solve(s, rhs);
  const auto x5 = solve_spd_pentadiagonal(d0, d1, d2, rhs);
  for (std::size_t i = 0; i < n; ++i) CHECK(x5[i] == doctest::Approx(ref5[i]).epsilon(1e-12));

  // indefinite input is reported
  d0[3] = -10.0;
  CHECK_THROWS_AS(solve_spd_pentadiagonal(d0, d1, d2, rhs), Error);
}

TEST_CASE("golden section and cubic interpolation") {
  const double m = golden_section([](double t) { return (t - 0.3) * (t - 0.3) + 1.0; }, -1.0,
                                  2.0, 1e-10);
  CHECK(m == doctest::Approx(0.3).epsilon(1e-8));
  std::vector<double> xs{0.0, 0.5, 1.1, 1.7, 2.0, 3.0};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(x * x * x - x + 2.0);
  for (double t : {0.2, 1.3, 2.5}) CHECK(interp_cubic(xs, ys, t) == doctest::Approx(t * t * t - t + 2.0));
  CHECK(interp_cubic(xs, ys, -1.0) == doctest::Approx(ys.front()));
  CHECK(interp_cubic(xs, ys, 9.0) == doctest::Approx(ys.back()));
}
