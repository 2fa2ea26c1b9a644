#include "entroflow/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <lapacke.h>

#include "entroflow/error.hpp"

namespace entroflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DegenerateMetric: return "degenerate-metric";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::PreconditionViolation: return "precondition-violation";
    case ErrorKind::NumericalInconsistency: return "numerical-inconsistency";
    case ErrorKind::InvalidDensity: return "invalid-density";
    case ErrorKind::DegenerateEnergy: return "degenerate-energy";
    case ErrorKind::SingularityDetected: return "singularity-detected";
    case ErrorKind::MassDrift: return "mass-drift";
    case ErrorKind::InsufficientDomain: return "insufficient-domain";
    case ErrorKind::DomainMonotonicityViolation: return "domain-monotonicity-violation";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes,
                                                  int max_order) {
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(max_order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k > 0; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

double ghost_x(std::span<const double> x, long j) {
  return j >= 0 ? x[static_cast<std::size_t>(j)] : -x[static_cast<std::size_t>(-j)];
}

double ghost_f(std::span<const double> f, long j, Parity p) {
  return j >= 0 ? f[static_cast<std::size_t>(j)]
                : static_cast<double>(static_cast<int>(p)) * f[static_cast<std::size_t>(-j)];
}

}  // namespace

RadialStencil::RadialStencil(std::span<const double> x) {
  const long n_last = static_cast<long>(x.size()) - 1;
  require(n_last >= 4, ErrorKind::InvalidInput, "radial stencil needs at least 5 nodes");
  index_.resize(x.size());
  w1_.resize(x.size());
  w2_.resize(x.size());
  up_index_.resize(x.size());
  up_w_.resize(x.size());
  for (long i = 0; i <= n_last; ++i) {
    long lo = i - 2;
    long hi = i + 2;
    if (hi > n_last) {
      lo -= hi - n_last;
      hi = n_last;
    }
    std::array<double, 5> xs{};
    for (long k = 0; k < 5; ++k) {
      index_[i][k] = lo + k;
      xs[k] = ghost_x(x, lo + k);
    }
    const auto c = fornberg_weights(x[i], xs, 2);
    for (int k = 0; k < 5; ++k) {
      w1_[i][k] = c[k][1];
      w2_[i][k] = c[k][2];
    }
    std::array<double, 3> ux{};
    for (long k = 0; k < 3; ++k) {
      up_index_[i][k] = i - 2 + k;
      ux[k] = ghost_x(x, i - 2 + k);
    }
    const auto cu = fornberg_weights(x[i], ux, 1);
    for (int k = 0; k < 3; ++k) up_w_[i][k] = cu[k][1];
  }
}

RadialStencil::Derivatives RadialStencil::apply(std::span<const double> f, Parity parity) const {
  Derivatives d{std::vector<double>(f.size()), std::vector<double>(f.size())};
  for (std::size_t i = 0; i < index_.size(); ++i) {
    // weights sum to zero; differencing against f[i] keeps rounding relative to
    // the local variation instead of the magnitude of f
    double a = 0.0;
    double b = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double v = ghost_f(f, index_[i][k], parity) - f[i];
      a += w1_[i][k] * v;
      b += w2_[i][k] * v;
    }
    d.d1[i] = a;
    d.d2[i] = b;
  }
  return d;
}

double RadialStencil::first_at(std::span<const double> f, Parity parity, std::size_t i) const {
  double a = 0.0;
  for (int k = 0; k < 5; ++k) a += w1_[i][k] * (ghost_f(f, index_[i][k], parity) - f[i]);
  return a;
}

std::vector<double> RadialStencil::backward_first(std::span<const double> f, Parity parity) const {
  std::vector<double> d(f.size());
  for (std::size_t i = 0; i < up_index_.size(); ++i) {
    double a = 0.0;
    for (int k = 0; k < 3; ++k) a += up_w_[i][k] * (ghost_f(f, up_index_[i][k], parity) - f[i]);
    d[i] = a;
  }
  return d;
}

std::vector<double> solve_spd_pentadiagonal(const std::vector<double>& d0,
                                            const std::vector<double>& d1,
                                            const std::vector<double>& d2,
                                            std::vector<double> rhs) {
  const std::size_t n = d0.size();
  require(n > 0 && rhs.size() == n && d1.size() + 1 >= n && d2.size() + 2 >= n,
          ErrorKind::InvalidInput, "pentadiagonal system has inconsistent sizes");
  // upper band storage, column major, ldab = 3
  std::vector<double> ab(3 * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    ab[3 * j + 2] = d0[j];
    if (j >= 1) ab[3 * j + 1] = d1[j - 1];
    if (j >= 2) ab[3 * j] = d2[j - 2];
  }
  const auto m = static_cast<lapack_int>(n);
  const lapack_int info =
      LAPACKE_dpbsv(LAPACK_COL_MAJOR, 'U', m, 2, 1, ab.data(), 3, rhs.data(), m);
  require(info == 0, ErrorKind::NumericalInconsistency,
          "banded system is not positive definite (dpbsv info " + std::to_string(info) + ")");
  return rhs;
}

std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  return rhs;
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol,
                      int max_iter) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && std::abs(b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

namespace {

double lagrange4(const std::array<double, 4>& xs, const std::array<double, 4>& ys, double t) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double l = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) l *= (t - xs[j]) / (xs[i] - xs[j]);
    sum += l * ys[i];
  }
  return sum;
}

double interp_impl(std::span<const double> xs, std::span<const double> ys, double t,
                   bool radial, Parity parity) {
  const long n = static_cast<long>(xs.size());
  t = std::clamp(t, radial ? 0.0 : xs.front(), xs.back());
  long k = static_cast<long>(std::upper_bound(xs.begin(), xs.end(), t) - xs.begin()) - 1;
  k = std::clamp<long>(k, 0, n - 2);
  long lo = k - 1;
  if (!radial && lo < 0) lo = 0;
  if (lo + 3 > n - 1) lo = n - 4;
  std::array<double, 4> px{};
  std::array<double, 4> py{};
  for (long j = 0; j < 4; ++j) {
    px[j] = ghost_x(xs, lo + j);
    py[j] = ghost_f(ys, lo + j, parity);
  }
  return lagrange4(px, py, t);
}

}  // namespace

double interp_cubic(std::span<const double> xs, std::span<const double> ys, double t) {
  return interp_impl(xs, ys, t, false, Parity::Even);
}

double interp_cubic_radial(std::span<const double> xs, std::span<const double> ys, double t,
                           Parity parity) {
  return interp_impl(xs, ys, t, true, parity);
}

}  // namespace entroflow
