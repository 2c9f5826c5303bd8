#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>

#include "snv/units.hpp"

using namespace snv;

TEST_SUITE("units") {

TEST_CASE("wavelength to photon energy") {
  CHECK(convert({620.0, EnergyUnit::nm}, EnergyUnit::eV).value == doctest::Approx(1.99974).epsilon(5e-6));
  CHECK(convert({1239.841984, EnergyUnit::nm}, EnergyUnit::eV).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("thermal equivalents") {
  // k_B T for 680 K
  CHECK(convert({680.0, EnergyUnit::K}, EnergyUnit::meV).value == doctest::Approx(58.60).epsilon(1e-4));
  // h nu / k_B with the constants written out independently
  const double h = 6.62607015e-34, kb = 1.380649e-23;
  const double oracle = h * 3030e9 / kb;
  const double got = convert({3030.0, EnergyUnit::GHz}, EnergyUnit::K).value;
  CHECK(got == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(got == doctest::Approx(145.4).epsilon(5e-4));
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(convert({0.0, EnergyUnit::nm}, EnergyUnit::eV), std::domain_error);
  CHECK_THROWS_AS(convert({-5.0, EnergyUnit::nm}, EnergyUnit::GHz), std::domain_error);
  CHECK_THROWS_AS(convert({NAN, EnergyUnit::eV}, EnergyUnit::meV), std::domain_error);
  CHECK_THROWS_AS(convert({0.0, EnergyUnit::eV}, EnergyUnit::nm), std::domain_error);
  CHECK_THROWS_AS(energy_unit_from_string("furlong"), std::invalid_argument);
  CHECK(energy_unit_from_string("meV") == EnergyUnit::meV);
}

TEST_CASE("round trip over all unit pairs") {
  const EnergyUnit all[] = {EnergyUnit::nm, EnergyUnit::eV, EnergyUnit::meV, EnergyUnit::GHz, EnergyUnit::K};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logv(-3.0, 6.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double v = std::pow(10.0, logv(rng));
    for (auto a : all)
      for (auto b : all) {
        const EnergyQuantity x{v, a};
        const auto back = convert(convert(x, b), a);
        CHECK(back.unit == a);
        CHECK(std::abs(back.value - v) <= 1e-9 * v);
      }
  }
}

TEST_CASE("monotone conversions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(100.0, 2000.0);
  for (int i = 0; i < 200; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    // wavelength reverses order
    CHECK(convert({a, EnergyUnit::nm}, EnergyUnit::eV).value > convert({b, EnergyUnit::nm}, EnergyUnit::eV).value);
    // energy-like units preserve it
    CHECK(convert({a, EnergyUnit::GHz}, EnergyUnit::K).value < convert({b, EnergyUnit::GHz}, EnergyUnit::K).value);
    CHECK(convert({a, EnergyUnit::meV}, EnergyUnit::GHz).value < convert({b, EnergyUnit::meV}, EnergyUnit::GHz).value);
  }
}

TEST_CASE("spectrum validation") {
  CHECK_THROWS_AS(Spectrum({1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum({1.0, 2.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum({1.0, 2.0}, {0.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum({1.0, 2.0}, {0.0, 1.0}, 0.0), std::invalid_argument);
  Spectrum s({600.0, 610.0}, {1.0, 2.0});
  CHECK(s.instrument_fwhm_ghz() == 10.0);
}

TEST_CASE("energy axis conserves integrated intensity") {
  std::vector<double> wl, c;
  for (int i = 0; i <= 4000; ++i) {
    const double l = 600.0 + 0.01 * i;
    wl.push_back(l);
    c.push_back(std::exp(-0.5 * std::pow((l - 620.0) / 2.0, 2)));
  }
  const Spectrum s(wl, c);
  const auto es = to_energy(s);
  auto trap = [](std::span<const double> x, std::span<const double> y) {
    double a = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) a += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return a;
  };
  CHECK(trap(es.energy_ev(), es.intensity()) == doctest::Approx(trap(s.wavelength_nm(), s.counts())).epsilon(1e-5));
  const auto back = to_wavelength(es);
  for (std::size_t i = 0; i < s.size(); i += 97) {
    CHECK(back.wavelength_nm()[i] == doctest::Approx(s.wavelength_nm()[i]).epsilon(1e-12));
    CHECK(back.counts()[i] == doctest::Approx(s.counts()[i]).epsilon(1e-12));
  }
}

TEST_CASE("photon stream helpers") {
  PhotonStream s;
  s.records = {{10, 0}, {20, 1}, {20, 0}};
  CHECK(s.count(0) == 2);
  CHECK(s.effective_duration_ps() == 20);
  s.duration_ps = 100;
  CHECK(s.effective_duration_ps() == 100);
  CHECK_NOTHROW(validate_stream(s));
  s.records.push_back({5, 0});
  CHECK_THROWS_AS(validate_stream(s), std::invalid_argument);
  s.records.back() = {30, 2};
  CHECK_THROWS_AS(validate_stream(s), std::invalid_argument);
}

}
