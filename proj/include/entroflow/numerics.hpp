#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace entroflow {

// Finite-difference weights for derivatives 0..max_order at z on arbitrary
// nodes (Fornberg 1988). Result is indexed [node][order].
std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes,
                                                  int max_order);

enum class Parity { Even = 1, Odd = -1 };

// Five-point first/second derivative stencils on a radial grid x_0 = 0 < x_1 < ...
// Nodes with negative index are ghosts x_{-k} = -x_k carrying f_{-k} = parity * f_k.
// Near the outer end the stencil becomes one-sided.
class RadialStencil {
 public:
  explicit RadialStencil(std::span<const double> x);

  struct Derivatives {
    std::vector<double> d1;
    std::vector<double> d2;
  };

  Derivatives apply(std::span<const double> f, Parity parity) const;
  double first_at(std::span<const double> f, Parity parity, std::size_t i) const;

  // Second-order backward (upwind) first derivative, ghosts by parity.
  std::vector<double> backward_first(std::span<const double> f, Parity parity) const;

  std::size_t size() const { return index_.size(); }

 private:
  std::vector<std::array<long, 5>> index_;
  std::vector<std::array<double, 5>> w1_;
  std::vector<std::array<double, 5>> w2_;
  std::vector<std::array<long, 3>> up_index_;
  std::vector<std::array<double, 3>> up_w_;
};

// Solves a tridiagonal system in place (Thomas algorithm). lower[0] and
// upper[n-1] are ignored. Returns the solution.
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs);

// Symmetric positive definite pentadiagonal solve (LAPACK dpbsv).
// d1[j] couples unknowns j and j+1, d2[j] couples j and j+2.
std::vector<double> solve_spd_pentadiagonal(const std::vector<double>& d0,
                                            const std::vector<double>& d1,
                                            const std::vector<double>& d2,
                                            std::vector<double> rhs);

// Minimizes a unimodal function on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b, double tol,
                      int max_iter = 200);

// Cubic Lagrange interpolation of samples (xs, ys) at point t, using the four
// nodes around t; values outside the sample range are clamped to the ends.
double interp_cubic(std::span<const double> xs, std::span<const double> ys, double t);

// Same, with parity ghosts for t near zero (xs[0] must be 0).
double interp_cubic_radial(std::span<const double> xs, std::span<const double> ys, double t,
                           Parity parity);

}  // namespace entroflow
