#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>

#include <nlohmann/json.hpp>

#include "snv/fit.hpp"

using namespace snv;

namespace {

FitProblem exp_problem(const std::vector<double>& t, const std::vector<double>& y) {
  FitProblem pb;
  pb.names = {"a", "tau", "b"};
  pb.initial = {5.0, 2.0, 0.0};
  pb.model = [&t](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = p[0] * std::exp(-t[i] / p[1]) + p[2];
  };
  pb.y = y;
  return pb;
}

} // namespace

TEST_SUITE("fit") {

TEST_CASE("exact recovery on noiseless exponential") {
  std::vector<double> t, y;
  for (int i = 0; i < 60; ++i) {
    t.push_back(0.25 * i);
    y.push_back(12.0 * std::exp(-t.back() / 3.3) + 0.7);
  }
  auto pb = exp_problem(t, y);
  const auto r = levenberg_marquardt(pb);
  CHECK(r.converged);
  CHECK(r.value("a") == doctest::Approx(12.0).epsilon(1e-9));
  CHECK(r.value("tau") == doctest::Approx(3.3).epsilon(1e-9));
  CHECK(r.value("b") == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(r.dof == 57);
  CHECK(r.chi2 < 1e-15);
}

TEST_CASE("poisson deviance fit of counts") {
  std::mt19937_64 rng(5);
  std::vector<double> t, y;
  for (int i = 0; i < 200; ++i) {
    t.push_back(0.1 * i);
    std::poisson_distribution<int> pd(500.0 * std::exp(-t.back() / 4.0) + 3.0);
    y.push_back(pd(rng));
  }
  auto pb = exp_problem(t, y);
  pb.initial = {300.0, 2.0, 1.0};
  pb.lower = {0.0, 1e-3, 0.0};
  pb.objective = Objective::poisson;
  const auto r = levenberg_marquardt(pb);
  CHECK(r.converged);
  CHECK(std::abs(r.value("tau") - 4.0) < 4.0 * r.error("tau"));
  CHECK(r.error("tau") > 0.0);
  CHECK(r.reduced_chi2 == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("fixed parameters and bounds") {
  std::vector<double> t, y;
  for (int i = 0; i < 30; ++i) {
    t.push_back(0.5 * i);
    y.push_back(4.0 * std::exp(-t.back() / 2.0) + 1.0);
  }
  auto pb = exp_problem(t, y);
  pb.fixed = {false, false, true};
  pb.initial[2] = 1.0;
  auto r = levenberg_marquardt(pb);
  CHECK(r.value("b") == 1.0);
  CHECK(r.error("b") == 0.0);
  CHECK(r.value("tau") == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.dof == 28);

  // true b = 1 lies outside the box, so b ends on its bound
  pb.fixed.clear();
  pb.initial = {3.0, 1.0, 0.0};
  pb.lower = {0.0, 0.01, -1.0};
  pb.upper = {100.0, 100.0, 0.5};
  r = levenberg_marquardt(pb);
  CHECK(r.converged);
  CHECK(r.value("b") == 0.5);
}

TEST_CASE("covariance is symmetric with non-negative diagonal") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> t, y, s;
  for (int i = 0; i < 80; ++i) {
    t.push_back(0.2 * i);
    y.push_back(3.0 * std::exp(-t.back() / 1.5) + 0.2 + noise(rng));
    s.push_back(0.05);
  }
  auto pb = exp_problem(t, y);
  pb.sigma = s;
  const auto r = levenberg_marquardt(pb);
  CHECK((r.covariance - r.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-12 * r.covariance.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(r.covariance(i, i) >= 0.0);
  // residuals average to zero
  std::vector<double> m(t.size());
  pb.model(r.values, m);
  double mean = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) mean += y[i] - m[i];
  CHECK(std::abs(mean / t.size()) < 3.0 * 0.05 / std::sqrt(t.size()));
}

TEST_CASE("linear least squares") {
  Eigen::MatrixXd x(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i;
    y[i] = 2.0 - 0.5 * i;
  }
  const auto b = linear_least_squares(x, y);
  CHECK(b[0] == doctest::Approx(2.0));
  CHECK(b[1] == doctest::Approx(-0.5));
}

TEST_CASE("result accessors and json round trip") {
  FitResult r;
  r.model = "m";
  r.names = {"x", "y"};
  r.values = {1.5, -2.0};
  r.covariance = Eigen::MatrixXd::Identity(2, 2) * 0.25;
  r.converged = true;
  r.add_flag("f");
  r.add_flag("f");
  r.derived = {{"d", 3.0}};
  CHECK(r.error("x") == doctest::Approx(0.5));
  CHECK(r.flags.size() == 1);
  CHECK_THROWS_AS(r.value("z"), std::out_of_range);
  nlohmann::json j = r;
  const auto back = j.get<FitResult>();
  CHECK(back.value("y") == -2.0);
  CHECK(back.error("y") == doctest::Approx(0.5));
  CHECK(back.has_flag("f"));
  CHECK(back.derived_value("d") == 3.0);
}

}
