#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "rashomon/dataset.hpp"
#include "rashomon/rng.hpp"

namespace rashomon {

/// Parameters of the data-generating process
///   y = sin(theta1 * (x1 + theta2 * x2)) + eps,  x ~ N(0, Sigma(rho)),
///   eps ~ N(0, sigma_eps^2),
/// where Sigma(rho) has unit diagonal and rho everywhere else.
/// The defaults give y = sin((3 x1 + x2) / 5) + eps with noise standard
/// deviation 1/3.
struct GenConfig {
  double theta1 = 0.6;
  double theta2 = 1.0 / 3.0;
  double rho = 0.9;
  double sigma_eps = 1.0 / 3.0;
  int n_features = 3;
  int n_train = 1000;
  int n_test = 10000;
  std::uint64_t seed = 1568;

  /// Throws InvalidArgument on a violated invariant.
  void validate() const;
};

/// Lower Cholesky factor of the p x p equicorrelation matrix.
Eigen::MatrixXd equicorrelation_cholesky(int p, double rho);

/// n rows of N(0, Sigma(rho)) drawn from `rng`, one row at a time.
Eigen::MatrixXd sample_features(Rng& rng, int n,
                                const Eigen::MatrixXd& chol);

/// Noise-free signal sin(theta1 * (x1 + theta2 * x2)) for each row.
Eigen::VectorXd signal(const GenConfig& config, const Eigen::MatrixXd& x);

/// Columns "y", "x1".."xp". Train and test come from the substreams
/// "synth/train" and "synth/test" of config.seed.
std::pair<Dataset, Dataset> generate(const GenConfig& config);

/// Population variance of y under the Gaussian design, used as an oracle:
/// with s^2 = theta1^2 Var(x1 + theta2 x2), Var(sin(Z)) = (1 - e^{-2 s^2}) / 2.
double analytic_target_variance(const GenConfig& config);

}  // namespace rashomon
