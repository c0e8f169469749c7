#pragma once

#include <cstdint>

namespace rashomon::couple {

/// Target f(x) = sign(x) |x|^alpha with x ~ U[-1, 1]. E[f^2] is finite only
/// for alpha > -1/2.
struct CoupleSpec {
  double alpha = 0.0;

  void validate() const;
  double target(double x) const;
};

/// Population-optimal member of a one-parameter family and its MSE.
struct FamilyFit {
  double coefficient = 0.0;
  double mse = 0.0;
};

/// Best y = b1 x: b1 = 3 / (2 + alpha), mse = 1/(1 + 2 alpha) - 3/(2 + alpha)^2.
FamilyFit best_linear(const CoupleSpec& spec);
/// Best y = b0 sign(x): b0 = 1 / (1 + alpha),
/// mse = 1/(1 + 2 alpha) - 1/(1 + alpha)^2.
FamilyFit best_stump(const CoupleSpec& spec);

/// Same quantities by numerical integration over [0, 1] (the integrands are
/// even), independent of the closed forms.
FamilyFit best_linear_quadrature(const CoupleSpec& spec);
FamilyFit best_stump_quadrature(const CoupleSpec& spec);

/// mse_stump(alpha) - mse_linear(alpha): negative at 0, positive at 1.
double mse_gap(double alpha);

/// Root of mse_gap on (0, 1) by bisection to `tol`; the two families tie there.
double find_couple_exponent(double tol = 1e-12);

struct MonteCarloResult {
  double b1_hat = 0.0;
  double b0_hat = 0.0;
  double mse_linear = 0.0;
  double mse_stump = 0.0;
};

/// Fits both families by sample least squares on n uniform draws and scores
/// them on n fresh draws.
MonteCarloResult couple_montecarlo(const CoupleSpec& spec, long n,
                                   std::uint64_t seed);

}  // namespace rashomon::couple
