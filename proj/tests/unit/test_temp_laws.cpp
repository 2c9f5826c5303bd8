#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>

#include "snv/levels.hpp"
#include "snv/temp_laws.hpp"

using namespace snv;

namespace {

TempSeries linewidth_series(double g0, double c3, double offset, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  TempSeries s;
  for (double t = 4.0; t <= 40.0; t += 3.0) {
    TempPoint p;
    p.t_k = t;
    const double tt = t + offset;
    p.linewidth_ghz = g0 + c3 * tt * tt * tt + (noise > 0 ? noise * n(rng) : 0.0);
    if (noise > 0) p.linewidth_err = noise;
    s.entries.push_back(p);
  }
  return s;
}

TempSeries dw_series(double s_hr, double tc, const std::vector<double>& temps) {
  TempSeries s;
  for (double t : temps) {
    TempPoint p;
    p.t_k = t;
    p.dw = dw_factor({s_hr, tc}, t);
    s.entries.push_back(p);
  }
  return s;
}

} // namespace

TEST_SUITE("temp_laws") {

TEST_CASE("model names") {
  CHECK(linewidth_model_from_string("T_plus_T3") == LinewidthModel::T_plus_T3);
  CHECK(std::string(to_string(LinewidthModel::T3_plus_T5)) == "T3_plus_T5");
  CHECK_THROWS_AS(linewidth_model_from_string("T7"), std::invalid_argument);
}

TEST_CASE("cubic linewidth law recovered exactly") {
  const auto s = linewidth_series(0.03, 2e-5, 0.0, 0.0, 1);
  const auto r = fit_linewidth_series(s, LinewidthModel::T3);
  CHECK(r.converged);
  CHECK(r.value("gamma0_ghz") == doctest::Approx(0.03).epsilon(1e-7));
  CHECK(r.value("c_cubic") == doctest::Approx(2e-5).epsilon(1e-7));
  CHECK(r.value("c_linear") == 0.0);
  CHECK(r.model == "linewidth:T3");
  CHECK(evaluate_law(r, 25.0) == doctest::Approx(0.03 + 2e-5 * 25.0 * 25.0 * 25.0).epsilon(1e-7));
}

TEST_CASE("shared temperature offset") {
  const auto s = linewidth_series(0.03, 2e-5, 3.0, 0.0, 1);
  const auto r = fit_linewidth_series(s, LinewidthModel::T3, {true, 0.0});
  CHECK(std::abs(r.value("t_offset_k") - 3.0) < 1.0);
  CHECK(r.domain_min == doctest::Approx(4.0 + r.value("t_offset_k")));
}

TEST_CASE("too few points or too small a span") {
  TempSeries two;
  two.entries = {{4.0, 0.1}, {20.0, 0.3}};
  CHECK_THROWS_AS(fit_linewidth_series(two, LinewidthModel::T3), std::invalid_argument);
  TempSeries narrow;
  for (double t : {10.0, 12.0, 14.0, 16.0, 18.0}) narrow.entries.push_back({t, 0.1 + 1e-5 * t * t * t});
  CHECK_THROWS_AS(fit_linewidth_series(narrow, LinewidthModel::T3), std::invalid_argument);
  TempSeries unordered;
  unordered.entries = {{5.0, 0.1}, {4.0, 0.1}};
  CHECK_THROWS_AS(unordered.validate(), std::invalid_argument);
}

TEST_CASE("model comparison on noisy cubic data") {
  const auto s = linewidth_series(0.03, 2e-5, 0.0, 0.01, 21);
  const auto all = compare_linewidth_models(s);
  REQUIRE(all.size() == 3);
  const auto& t3 = all[0];
  CHECK(t3.model == "linewidth:T3");
  CHECK(t3.reduced_chi2 < 3.0);
  CHECK(std::abs(t3.value("c_cubic") - 2e-5) < 4.0 * t3.error("c_cubic"));
  const auto& t5 = all[2];
  CHECK(std::abs(t5.value("c_quintic")) < 4.0 * t5.error("c_quintic"));
}

TEST_CASE("quartic shift law") {
  TempSeries s;
  for (double t = 5.0; t <= 60.0; t += 5.0) {
    TempPoint p;
    p.t_k = t;
    p.shift_ghz = -4e-6 * t * t * t * t;
    s.entries.push_back(p);
  }
  const auto r = fit_shift_series(s);
  CHECK(std::abs(r.value("alpha_quadratic")) < 1e-9);
  CHECK(r.value("beta_quartic") < 0.0);
  CHECK(r.value("beta_quartic") == doctest::Approx(-4e-6).epsilon(1e-6));
}

TEST_CASE("debye-waller series") {
  const std::vector<double> temps{5, 50, 100, 150, 200, 250, 300, 350};
  const auto r = fit_dw_series(dw_series(0.57, 680.0, temps));
  CHECK(r.value("huang_rhys_s") == doctest::Approx(0.57).epsilon(1e-6));
  CHECK(r.value("t_cutoff_k") == doctest::Approx(680.0).epsilon(1e-6));
  CHECK(r.derived_value("dw0") == doctest::Approx(std::exp(-0.57)).epsilon(1e-6));
  CHECK(r.derived_value("phonon_energy_mev") == doctest::Approx(58.60).epsilon(1e-4));
  CHECK(evaluate_law(r, 300.0) == doctest::Approx(dw_factor({0.57, 680.0}, 300.0)).epsilon(1e-6));

  TempSeries flat;
  for (double t : temps) {
    TempPoint p;
    p.t_k = t;
    p.dw = 0.6;
    flat.entries.push_back(p);
  }
  CHECK(fit_dw_series(flat).has_flag("t_cutoff_unbounded"));

  auto bad = dw_series(0.57, 680.0, temps);
  bad.entries[2].dw = 1.3;
  CHECK_THROWS_AS(fit_dw_series(bad), std::invalid_argument);
  CHECK_THROWS_AS(fit_dw_series(dw_series(0.57, 680.0, {5, 40, 80, 120})), std::invalid_argument);
}

TEST_CASE("thermometer inversion") {
  const auto law = fit_linewidth_series(linewidth_series(0.03, 2e-5, 0.0, 0.0, 1), LinewidthModel::T3);
  for (double t = 5.0; t <= 40.0; t += 2.5) {
    const auto rd = invert_thermometer(Observable::linewidth, evaluate_law(law, t), law);
    CHECK(rd.t_k == doctest::Approx(t).epsilon(1e-9));
    CHECK(rd.ci_low_k <= rd.t_k);
    CHECK(rd.ci_high_k >= rd.t_k);
  }
  const auto with_err = invert_thermometer(Observable::linewidth, evaluate_law(law, 30.0), law, {0.01, 0.95, {}});
  const double slope = 3.0 * 2e-5 * 30.0 * 30.0;
  CHECK(with_err.sigma_k == doctest::Approx(0.01 / slope).epsilon(1e-3));
  CHECK(with_err.ci_high_k - with_err.t_k == doctest::Approx(1.959964 * with_err.sigma_k).epsilon(1e-5));

  CHECK_THROWS_AS(invert_thermometer(Observable::linewidth, 0.01, law), std::range_error);
  CHECK_THROWS_AS(invert_thermometer(Observable::linewidth, 100.0, law), std::range_error);
  CHECK_THROWS_AS(invert_thermometer(Observable::shift, 0.1, law), std::invalid_argument);
}

TEST_CASE("shift inversion needs a range") {
  TempSeries s;
  for (double t = 5.0; t <= 60.0; t += 5.0) {
    TempPoint p;
    p.t_k = t;
    p.shift_ghz = -4e-6 * t * t * t * t;
    s.entries.push_back(p);
  }
  const auto law = fit_shift_series(s);
  const double v = evaluate_law(law, 33.0);
  CHECK_THROWS_AS(invert_thermometer(Observable::shift, v, law), std::invalid_argument);
  InversionOptions o;
  o.range_k = std::make_pair(5.0, 60.0);
  CHECK(invert_thermometer(Observable::shift, v, law, o).t_k == doctest::Approx(33.0).epsilon(1e-9));
}

TEST_CASE("normal quantile") {
  CHECK(normal_two_sided_quantile(0.95) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(normal_two_sided_quantile(0.6826894921) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(normal_two_sided_quantile(1.0), std::domain_error);
}

}
