#include "rashomon/synth.hpp"

#include <cmath>
#include <string>

#include "rashomon/error.hpp"
#include "rashomon/rng.hpp"

namespace rashomon {

void GenConfig::validate() const {
  if (!(rho >= 0.0 && rho < 1.0))
    throw InvalidArgument("rho must lie in [0, 1), got " + std::to_string(rho));
  if (!(sigma_eps >= 0.0) || !std::isfinite(sigma_eps))
    throw InvalidArgument("sigma_eps must be finite and >= 0");
  if (!std::isfinite(theta1) || !std::isfinite(theta2))
    throw InvalidArgument("theta1 and theta2 must be finite");
  if (n_features < 1) throw InvalidArgument("n_features must be >= 1");
  if (n_train < 1 || n_test < 1)
    throw InvalidArgument("n_train and n_test must be >= 1");
}

Eigen::MatrixXd equicorrelation_cholesky(int p, double rho) {
  if (p < 1) throw InvalidArgument("equicorrelation_cholesky: p must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0))
    throw InvalidArgument(
        "equicorrelation_cholesky: rho must lie in [0, 1) for a positive "
        "definite matrix");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(p, p, rho);
  sigma.diagonal().setOnes();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    double d = sigma(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < p; ++i) {
      double s = sigma(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Eigen::MatrixXd sample_features(Rng& rng, int n, const Eigen::MatrixXd& chol) {
  const Eigen::Index p = chol.rows();
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.normal();
    x.row(i) = (chol * z).transpose();
  }
  return x;
}

Eigen::VectorXd signal(const GenConfig& config, const Eigen::MatrixXd& x) {
  Eigen::VectorXd lin = x.col(0);
  if (x.cols() > 1) lin += config.theta2 * x.col(1);
  return (config.theta1 * lin).array().sin().matrix();
}

namespace {

Dataset draw(const GenConfig& config, const Eigen::MatrixXd& chol, int n,
             const char* label) {
  Rng rng = substream(config.seed, label);
  Eigen::MatrixXd x = sample_features(rng, n, chol);
  Eigen::VectorXd y = signal(config, x);
  for (int i = 0; i < n; ++i) y(i) += config.sigma_eps * rng.normal();

  std::vector<std::string> names{"y"};
  for (int j = 1; j <= config.n_features; ++j)
    names.push_back("x" + std::to_string(j));
  Eigen::MatrixXd values(n, config.n_features + 1);
  values.col(0) = y;
  values.rightCols(config.n_features) = x;
  return Dataset(std::move(names), "y", std::move(values));
}

}  // namespace

std::pair<Dataset, Dataset> generate(const GenConfig& config) {
  config.validate();
  const Eigen::MatrixXd chol =
      equicorrelation_cholesky(config.n_features, config.rho);
  return {draw(config, chol, config.n_train, "synth/train"),
          draw(config, chol, config.n_test, "synth/test")};
}

double analytic_target_variance(const GenConfig& config) {
  config.validate();
  double var_lin = 1.0;
  if (config.n_features > 1)
    var_lin = 1.0 + config.theta2 * config.theta2 +
              2.0 * config.theta2 * config.rho;
  const double s2 = config.theta1 * config.theta1 * var_lin;
  return 0.5 * (1.0 - std::exp(-2.0 * s2)) +
         config.sigma_eps * config.sigma_eps;
}

}  // namespace rashomon
