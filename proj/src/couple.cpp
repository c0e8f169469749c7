#include "rashomon/couple.hpp"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rashomon/error.hpp"
#include "rashomon/rng.hpp"

namespace rashomon::couple {

void CoupleSpec::validate() const {
  if (!(alpha > -0.5) || !std::isfinite(alpha))
    throw InvalidArgument("couple: alpha must be finite and > -0.5");
}

double CoupleSpec::target(double x) const {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), alpha), x);
}

FamilyFit best_linear(const CoupleSpec& spec) {
  spec.validate();
  const double a = spec.alpha;
  return {3.0 / (2.0 + a), 1.0 / (1.0 + 2.0 * a) - 3.0 / ((2.0 + a) * (2.0 + a))};
}

FamilyFit best_stump(const CoupleSpec& spec) {
  spec.validate();
  const double a = spec.alpha;
  return {1.0 / (1.0 + a), 1.0 / (1.0 + 2.0 * a) - 1.0 / ((1.0 + a) * (1.0 + a))};
}

namespace {

template <typename F>
double integrate01(F f) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, 0.0, 1.0, 1e-14);
}

}  // namespace

FamilyFit best_linear_quadrature(const CoupleSpec& spec) {
  spec.validate();
  const double a = spec.alpha;
  // b1 = E[x f] / E[x^2] with E[x^2] = 1/3.
  const double b1 = 3.0 * integrate01([a](double x) { return std::pow(x, 1.0 + a); });
  const double mse = integrate01([a, b1](double x) {
    const double d = std::pow(x, a) - b1 * x;
    return d * d;
  });
  return {b1, mse};
}

FamilyFit best_stump_quadrature(const CoupleSpec& spec) {
  spec.validate();
  const double a = spec.alpha;
  const double b0 = integrate01([a](double x) { return std::pow(x, a); });
  const double mse = integrate01([a, b0](double x) {
    const double d = std::pow(x, a) - b0;
    return d * d;
  });
  return {b0, mse};
}

double mse_gap(double alpha) {
  const CoupleSpec spec{alpha};
  return best_stump(spec).mse - best_linear(spec).mse;
}

double find_couple_exponent(double tol) {
  double lo = 0.0, hi = 1.0;
  double f_lo = mse_gap(lo);
  if (!(f_lo < 0.0 && mse_gap(hi) > 0.0))
    throw Error("couple: mse gap does not change sign on (0, 1)");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = mse_gap(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

MonteCarloResult couple_montecarlo(const CoupleSpec& spec, long n,
                                   std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw InvalidArgument("couple_montecarlo: n must be >= 1");
  MonteCarloResult r;
  Rng fit_rng = substream(seed, "couple/fit");
  double sxy = 0.0, sxx = 0.0, sabs = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = 2.0 * fit_rng.uniform() - 1.0;
    const double y = spec.target(x);
    sxy += x * y;
    sxx += x * x;
    // sign(x) * y with sign(x)^2 = 1 except at x = 0.
    if (x != 0.0) sabs += std::copysign(1.0, x) * y;
  }
  r.b1_hat = sxx > 0.0 ? sxy / sxx : 0.0;
  r.b0_hat = sabs / static_cast<double>(n);

  Rng test_rng = substream(seed, "couple/test");
  double e_lin = 0.0, e_stump = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = 2.0 * test_rng.uniform() - 1.0;
    const double y = spec.target(x);
    const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    e_lin += (y - r.b1_hat * x) * (y - r.b1_hat * x);
    e_stump += (y - r.b0_hat * s) * (y - r.b0_hat * s);
  }
  r.mse_linear = e_lin / static_cast<double>(n);
  r.mse_stump = e_stump / static_cast<double>(n);
  return r;
}

}  // namespace rashomon::couple
