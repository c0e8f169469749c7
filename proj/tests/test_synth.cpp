#include <cmath>

#include "doctest.h"
#include "rashomon/error.hpp"
#include "rashomon/synth.hpp"

using namespace rashomon;

namespace {

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ca = a.array() - a.mean();
  const Eigen::ArrayXd cb = b.array() - b.mean();
  return (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
}

double variance(const Eigen::VectorXd& v) {
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("equicorrelation cholesky") {
  const Eigen::MatrixXd l2 = equicorrelation_cholesky(2, 0.9);
  CHECK(l2(0, 0) == doctest::Approx(1.0));
  CHECK(l2(0, 1) == 0.0);
  CHECK(l2(1, 0) == doctest::Approx(0.9));
  CHECK(l2(1, 1) == doctest::Approx(std::sqrt(0.19)).epsilon(1e-12));

  const Eigen::MatrixXd l1 = equicorrelation_cholesky(1, 0.9);
  CHECK(l1.rows() == 1);
  CHECK(l1(0, 0) == 1.0);

  const Eigen::MatrixXd l0 = equicorrelation_cholesky(3, 0.0);
  CHECK((l0 - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);

  for (double rho : {0.0, 0.3, 0.9, 0.99}) {
    const Eigen::MatrixXd l = equicorrelation_cholesky(4, rho);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(4, 4, rho);
    sigma.diagonal().setOnes();
    CHECK((l * l.transpose() - sigma).cwiseAbs().maxCoeff() < 1e-14);
  }

  CHECK_THROWS_AS(equicorrelation_cholesky(3, 1.0), InvalidArgument);
  CHECK_THROWS_AS(equicorrelation_cholesky(3, -0.1), InvalidArgument);
  CHECK_THROWS_AS(equicorrelation_cholesky(0, 0.5), InvalidArgument);
}

TEST_CASE("analytic target variance") {
  // Var(sin(Z)) for Z ~ N(0, s2) is (1 - exp(-2 s2)) / 2; here
  // s2 = 0.36 * Var(x1 + x2 / 3) = 0.36 * (1 + 1/9 + 2 * 0.9 / 3) = 0.616.
  const double s2 = 0.36 * (1.0 + 1.0 / 9.0 + 0.6);
  CHECK(s2 == doctest::Approx(0.616).epsilon(1e-12));
  const double oracle = (1.0 - std::exp(-2.0 * s2)) / 2.0 + 1.0 / 9.0;
  CHECK(analytic_target_variance(GenConfig{}) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle == doctest::Approx(0.4653).epsilon(1e-3));
}

TEST_CASE("large sample matches the design") {
  GenConfig c;
  c.n_train = 100000;
  c.n_test = 1;
  const auto [train, test] = generate(c);
  CHECK(train.rows() == 100000);
  CHECK(test.rows() == 1);
  CHECK(train.column_names() == std::vector<std::string>{"y", "x1", "x2", "x3"});
  const Eigen::MatrixXd x = train.features();
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(x.col(i).mean()) < 0.02);
    CHECK(std::abs(variance(x.col(i)) - 1.0) < 0.02);
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(corr(x.col(i), x.col(j)) - 0.9) < 0.01);
  }
  CHECK(std::abs(variance(train.target()) - 0.4653) < 0.01);
}

TEST_CASE("noise free target equals the signal") {
  GenConfig c;
  c.sigma_eps = 0.0;
  c.n_train = 50;
  c.n_test = 5;
  const auto [train, test] = generate(c);
  const Eigen::VectorXd s = signal(c, train.features());
  CHECK((s - train.target()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd x = train.features();
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    CHECK(s(r) == doctest::Approx(std::sin(0.6 * (x(r, 0) + x(r, 1) / 3.0))).epsilon(1e-14));
}

TEST_CASE("generation is deterministic and seed sensitive") {
  GenConfig c;
  c.n_train = 100;
  c.n_test = 100;
  const auto a = generate(c);
  const auto b = generate(c);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK_FALSE(a.first.values().isApprox(a.second.values()));
  c.seed += 1;
  CHECK_FALSE(generate(c).first == a.first);
}

TEST_CASE("invalid configurations are rejected") {
  GenConfig c;
  c.rho = 1.0;
  CHECK_THROWS_AS(generate(c), InvalidArgument);
  c = GenConfig{};
  c.n_train = 0;
  CHECK_THROWS_AS(generate(c), InvalidArgument);
  c = GenConfig{};
  c.sigma_eps = -1.0;
  CHECK_THROWS_AS(generate(c), InvalidArgument);
  c = GenConfig{};
  c.n_features = 0;
  CHECK_THROWS_AS(generate(c), InvalidArgument);
}
