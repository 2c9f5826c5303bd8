#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>

#include <nlohmann/json.hpp>

#include "snv/levels.hpp"
#include "snv/units.hpp"

using namespace snv;

TEST_SUITE("levels") {

TEST_CASE("boltzmann ratio") {
  const auto ls = LevelStructure::snv_default();
  const long double hnu_over_k = 6.62607015e-34L * 3030e9L / 1.380649e-23L;
  CHECK(boltzmann_upper_fraction(ls, static_cast<double>(hnu_over_k)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(boltzmann_upper_fraction(ls, 75.0) == doctest::Approx(static_cast<double>(std::exp(-hnu_over_k / 75.0L))).epsilon(1e-9));
  CHECK(boltzmann_upper_fraction(ls, 75.0) == doctest::Approx(0.1438).epsilon(1e-3));
  CHECK(boltzmann_upper_fraction(ls, INFINITY) == 1.0);
  CHECK(boltzmann_upper_fraction(ls, 1e12) == doctest::Approx(1.0));
  CHECK_THROWS_AS(boltzmann_upper_fraction(ls, 0.0), std::domain_error);
  CHECK_THROWS_AS(boltzmann_upper_fraction(ls, -3.0), std::domain_error);
  double prev = 0.0;
  for (double t = 1.0; t < 2000.0; t *= 1.3) {
    const double r = boltzmann_upper_fraction(ls, t);
    CHECK(r > prev);
    CHECK(r <= 1.0);
    prev = r;
  }
}

TEST_CASE("transition table") {
  const auto ls = LevelStructure::snv_default();
  const auto t = transition_table(ls);
  const auto& a = t[0];
  const auto& b = t[1];
  const auto& c = t[2];
  const auto& d = t[3];
  CHECK(c.frequency_ghz - d.frequency_ghz == doctest::Approx(830.0).epsilon(1e-12));
  CHECK(a.frequency_ghz - c.frequency_ghz == doctest::Approx(3030.0).epsilon(1e-12));
  CHECK(b.frequency_ghz - d.frequency_ghz == doctest::Approx(3030.0).epsilon(1e-12));
  CHECK(d.energy_ev < c.energy_ev);
  CHECK(c.energy_ev < b.energy_ev);
  CHECK(b.energy_ev < a.energy_ev);
  CHECK(a.wavelength_nm < d.wavelength_nm);
  LevelStructure deg = ls;
  deg.ground_splitting_ghz = 0.0;
  const auto td = transition_table(deg);
  CHECK(td[2].frequency_ghz == doctest::Approx(td[3].frequency_ghz).epsilon(1e-15));
}

TEST_CASE("fourier limit") {
  CHECK(fourier_limit_mhz(7.61) == doctest::Approx(20.91).epsilon(5e-4));
  CHECK(fourier_limit_mhz(1.0) == doctest::Approx(1.0 / (2.0 * 3.14159265358979323846 * 1e-9) / 1e6).epsilon(1e-12));
  CHECK(fourier_limit_mhz(INFINITY) == 0.0);
  CHECK_THROWS_AS(fourier_limit_mhz(0.0), std::domain_error);
  CHECK_THROWS_AS(fourier_limit_mhz(-1.0), std::domain_error);
}

TEST_CASE("debye-waller law") {
  CHECK(dw_factor({0.57, 680.0}, 0.0) == doctest::Approx(0.5655).epsilon(1e-4));
  const long double k = 2.0L * 3.14159265358979323846L * 3.14159265358979323846L / 3.0L;
  const long double oracle = std::exp(-0.57L * (1.0L + k * 300.0L * 300.0L / (680.0L * 680.0L)));
  CHECK(dw_factor({0.57, 680.0}, 300.0) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-12));
  CHECK(dw_factor({0.57, 680.0}, 300.0) == doctest::Approx(0.2725).epsilon(5e-4));
  for (double t : {0.0, 10.0, 300.0, 1000.0}) CHECK(dw_factor({0.0, 680.0}, t) == 1.0);
}

TEST_CASE("debye-waller properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s(0.01, 3.0), tc(200.0, 2000.0), t(0.0, 600.0);
  for (int i = 0; i < 300; ++i) {
    const DWParams p{s(rng), tc(rng)};
    double t1 = t(rng), t2 = t(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (t2 - t1 > 1e-6) CHECK(dw_factor(p, t1) > dw_factor(p, t2));
    const double v = dw_factor(p, t1);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    const DWParams q{s(rng), p.t_cutoff_k};
    const DWParams sum{p.huang_rhys_s + q.huang_rhys_s, p.t_cutoff_k};
    CHECK(dw_factor(sum, t1) == doctest::Approx(dw_factor(p, t1) * dw_factor(q, t1)).epsilon(1e-12));
  }
}

TEST_CASE("linewidth and shift laws") {
  const LinewidthLaw lw{0.05, 0.0, 2e-5};
  const ShiftLaw sh{0.0, -3e-7};
  CHECK(linewidth_at(lw, 0.0) == 0.05);
  CHECK(lineshift_at(sh, 0.0) == 0.0);
  for (double t : {3.0, 17.0, 60.0}) {
    CHECK(linewidth_at(lw, 2 * t) - 0.05 == doctest::Approx(8.0 * (linewidth_at(lw, t) - 0.05)).epsilon(1e-12));
    CHECK(lineshift_at(sh, 2 * t) == doctest::Approx(16.0 * lineshift_at(sh, t)).epsilon(1e-12));
  }
  CHECK(linewidth_at({1.0, 0.5, 0.0}, 4.0) == doctest::Approx(3.0));
  CHECK_THROWS_AS((LinewidthLaw{-1.0, 0.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("default profile and json") {
  const auto ls = LevelStructure::snv_default();
  CHECK(ls.zpl_wavelength_nm == 619.7);
  CHECK(ls.ground_splitting_ghz < ls.excited_splitting_ghz);
  nlohmann::json j = ls;
  j["excited_lifetime_ns"] = 7.61;
  const auto back = j.get<LevelStructure>();
  CHECK(back.excited_lifetime_ns == 7.61);
  CHECK(back.ground_splitting_ghz == 830.0);
  CHECK(nlohmann::json::object().get<LevelStructure>().excited_splitting_ghz == 3030.0);
  j["ground_splitting_ghz"] = -1.0;
  CHECK_THROWS_AS(j.get<LevelStructure>(), std::invalid_argument);
}

}
