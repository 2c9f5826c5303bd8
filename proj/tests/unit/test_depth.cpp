#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>

#include <nlohmann/json.hpp>

#include "snv/depth.hpp"

using namespace snv;

namespace {

// removed thickness by a Riemann scan of the unnormalised Gaussian tail
double riemann_removed(double mu, double sigma, double fraction_left) {
  const double h = 0.001;
  const double zmax = mu + 12.0 * sigma;
  std::vector<double> tail;
  double acc = 0.0;
  const int n = static_cast<int>(zmax / h);
  tail.resize(n + 1);
  for (int i = n; i >= 0; --i) {
    const double z = (i + 0.5) * h;
    acc += std::exp(-0.5 * std::pow((z - mu) / sigma, 2)) * h;
    tail[i] = acc;
  }
  const double total = tail[0];
  for (int i = 0; i <= n; ++i)
    if (tail[i] <= fraction_left * total) return i * h;
  return zmax;
}

} // namespace

TEST_SUITE("depth") {

TEST_CASE("profile is normalised over the half line") {
  const ImplantProfile p{40.0, 30.0, 5.0};
  double a = 0.0;
  for (int i = 0; i < 400000; ++i) a += p.density((i + 0.5) * 0.001) * 0.001;
  CHECK(a == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(p.remaining_rate(0.0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(p.remaining_rate(-3.0) == p.remaining_rate(0.0));
  CHECK(p.density(-1.0) == 0.0);
}

TEST_CASE("rates scale linearly with the reference") {
  const auto a = normalize_profile(1000.0, 168.0);
  const auto b = normalize_profile(3000.0, 168.0);
  for (double s : {0.0, 100.0, 168.0, 250.0}) CHECK(b.remaining_rate(s) == doctest::Approx(3.0 * a.remaining_rate(s)));
  CHECK(depth_from_countrate(a, 400.0) == doctest::Approx(depth_from_countrate(b, 1200.0)).epsilon(1e-9));
  CHECK_THROWS_AS(normalize_profile(0.0, 168.0), std::invalid_argument);
}

TEST_CASE("full and half rates") {
  const auto p = normalize_profile(1e4, 168.0, 30.0);
  const double w = wing_depth(p);
  const auto full = estimate_depth(p, 1e4);
  CHECK(full.removed_nm == 0.0);
  CHECK(full.depth_nm == doctest::Approx(168.0 + w));
  const auto half = estimate_depth(p, 5e3);
  CHECK(half.removed_nm == doctest::Approx(168.0).epsilon(1e-6));
  CHECK(half.depth_nm == doctest::Approx(w).epsilon(1e-6));
  DepthOptions peak;
  peak.anchor = DepthAnchor::peak;
  CHECK(estimate_depth(p, 5e3, peak).depth_nm == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(estimate_depth(p, 1e4, peak).depth_nm == doctest::Approx(168.0));
}

TEST_CASE("matches a riemann-scan oracle") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mu(140.0, 200.0), sg(15.0, 45.0), frac(0.02, 0.98);
  for (int trial = 0; trial < 10; ++trial) {
    const double m = mu(rng), s = sg(rng), f = frac(rng);
    const auto p = normalize_profile(1.0, m, s);
    const double removed = riemann_removed(m, s, f);
    const auto e = estimate_depth(p, f);
    CHECK(std::abs(e.removed_nm - removed) < 0.02);
    CHECK(std::abs(e.depth_nm - std::max(0.0, m + wing_depth(p) - removed)) < 0.02);
  }
}

TEST_CASE("monotone and round trip") {
  const auto p = normalize_profile(2e4, 168.0, 30.0);
  // fewer emitters left means more material removed, so a shallower ensemble
  double prev = -INFINITY;
  for (double r = 100.0; r < 2e4; r *= 1.3) {
    const auto e = estimate_depth(p, r);
    CHECK(e.depth_nm >= prev);
    prev = e.depth_nm;
    CHECK(p.remaining_rate(e.removed_nm) == doctest::Approx(r).epsilon(1e-6));
  }
}

TEST_CASE("wing depths") {
  const ImplantProfile p{168.0, 30.0, 1.0};
  CHECK(wing_depth(p, 0.01) == doctest::Approx(3.0349 * 30.0).epsilon(1e-4));
  CHECK(wing_depth(p, std::exp(-0.5)) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(wing_depth(p, 1.0) == 0.0);
  CHECK_THROWS_AS(wing_depth(p, 0.0), std::domain_error);
  CHECK_THROWS_AS(wing_depth(p, 1.5), std::domain_error);
}

TEST_CASE("zero and out of range rates") {
  const auto p = normalize_profile(100.0, 168.0);
  const auto z = estimate_depth(p, 0.0);
  CHECK(z.depth_nm == 0.0);
  CHECK(std::isinf(z.removed_nm));
  CHECK_THROWS_AS(estimate_depth(p, 101.0), std::range_error);
  CHECK_THROWS_AS(estimate_depth(p, -1.0), std::domain_error);
  CHECK_THROWS_AS(estimate_depth(p, NAN), std::domain_error);
}

TEST_CASE("tabulated profile agrees with the gaussian") {
  const ImplantProfile g{168.0, 30.0, 500.0};
  std::vector<double> z, rho;
  for (int i = 0; i <= 4000; ++i) {
    z.push_back(0.1 * i);
    rho.push_back(g.density(z.back()));
  }
  const EmpiricalProfile e(z, rho, 500.0);
  CHECK(e.peak_depth() == doctest::Approx(168.0));
  CHECK(e.deep_wing(0.01) - e.peak_depth() == doctest::Approx(wing_depth(g)).epsilon(1e-3));
  for (double r : {50.0, 200.0, 450.0}) {
    CHECK(e.estimate(r).removed_nm == doctest::Approx(estimate_depth(g, r).removed_nm).epsilon(1e-4));
    CHECK(e.estimate(r).depth_nm == doctest::Approx(estimate_depth(g, r).depth_nm).epsilon(1e-3));
  }
  CHECK(e.remaining_rate(-1.0) == 500.0);
  CHECK(e.remaining_rate(1e4) == 0.0);
  CHECK_THROWS_AS(EmpiricalProfile({1.0, 0.5}, {1.0, 1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("profile json") {
  nlohmann::json j = {{"mean_depth_nm", 150.0}, {"total_amplitude_cps", 7.0}};
  const auto p = j.get<ImplantProfile>();
  CHECK(p.mean_depth_nm == 150.0);
  CHECK(p.straggle_sigma_nm == 30.0);
  CHECK_THROWS(nlohmann::json({{"mean_depth_nm", 150.0}}).get<ImplantProfile>());
  nlohmann::json back = p;
  CHECK(back["total_amplitude_cps"] == 7.0);
}

}
