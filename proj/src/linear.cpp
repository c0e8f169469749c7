#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "rashomon/error.hpp"
#include "rashomon/model.hpp"

namespace rashomon {
namespace linear {
namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

}  // namespace

Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y) {
  const Eigen::MatrixXd design = with_intercept(x);
  const Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SingularError("normal equations are not positive definite");
  return llt.solve(design.transpose() * y);
}

Eigen::VectorXd solve_qr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd design = with_intercept(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols())
    throw SingularError("design matrix is rank deficient (rank " +
                        std::to_string(qr.rank()) + " of " +
                        std::to_string(design.cols()) + ")");
  return qr.solve(y);
}

}  // namespace linear

Model fit_linear(const Dataset& train) {
  const Eigen::MatrixXd x = train.features();
  const Eigen::VectorXd y = train.target();
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n <= p + 1)
    throw InvalidArgument("fit_linear needs more than p + 1 rows");

  const Eigen::VectorXd beta = linear::solve_qr(x, y);
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = x;
  const Eigen::VectorXd residuals = y - design * beta;

  LinearFit fit;
  fit.intercept = beta(0);
  fit.coefficients = beta.tail(p);
  fit.residual_df = static_cast<int>(n - p - 1);
  fit.residual_variance = residuals.squaredNorm() / fit.residual_df;

  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::MatrixXd gram_inv =
      gram.ldlt().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
  fit.standard_errors =
      (fit.residual_variance * gram_inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
  fit.t_statistics.resize(p + 1);
  fit.p_values.resize(p + 1);
  const boost::math::students_t dist(fit.residual_df);
  for (Eigen::Index j = 0; j <= p; ++j) {
    const double se = fit.standard_errors(j);
    if (se > 0.0) {
      const double t = beta(j) / se;
      fit.t_statistics(j) = t;
      fit.p_values(j) =
          2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    } else {
      fit.t_statistics(j) = std::numeric_limits<double>::quiet_NaN();
      fit.p_values(j) = std::numeric_limits<double>::quiet_NaN();
    }
  }

  Model model;
  model.family = Family::linear;
  model.label = "linear regression";
  model.feature_names = train.feature_names();
  model.target_name = train.target_name();
  model.fit = std::move(fit);
  return model;
}

}  // namespace rashomon
