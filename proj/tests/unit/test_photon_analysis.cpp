#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <random>

#include "snv/photon_analysis.hpp"

using namespace snv;

namespace {

double g2_exact(double tau, double g0, double ta) { return 1.0 - (1.0 - g0) * std::exp(-std::abs(tau) / ta); }

// midpoint rule, fine enough to be exact at 1e-10
double bin_average_oracle(double lo, double hi, double g0, double ta) {
  const int n = 20000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += g2_exact(lo + (i + 0.5) * h, g0, ta);
  return s / n;
}

CorrelationCurve model_curve(double g0, double ta, double bw, double window) {
  CorrelationCurve c;
  c.bin_width_ns = bw;
  const int half = static_cast<int>(std::round(window / bw));
  for (int k = -half; k <= half; ++k) {
    const double t = k * bw;
    c.tau_ns.push_back(t);
    c.g2.push_back(g2_model_bin_average(t - bw / 2, t + bw / 2, g0, ta));
    c.error.push_back(0.01);
  }
  return c;
}

PolarizationScan cos2_scan(double visibility, double dipole_deg, double amp, double dark) {
  PolarizationScan s;
  const double plate0 = dipole_deg / 2.0;
  const double b = amp * (1.0 - visibility) / (2.0 * visibility);
  for (int k = 0; k < 36; ++k) {
    const double th = 5.0 * k;
    const double c = std::cos(2.0 * (th - plate0) * M_PI / 180.0);
    s.angles_deg.push_back(th);
    s.counts_cps.push_back(amp * c * c + b + dark);
  }
  s.dark_rate_cps = dark;
  return s;
}

} // namespace

TEST_SUITE("photon_analysis") {

TEST_CASE("bin average matches quadrature") {
  const double cases[][4] = {{-0.25, 0.25, 0.05, 13.0}, {0.0, 0.5, 0.0, 2.0}, {3.0, 3.5, 0.3, 7.0}, {-8.0, -7.0, 0.1, 1.0}};
  for (const auto& c : cases)
    CHECK(g2_model_bin_average(c[0], c[1], c[2], c[3]) == doctest::Approx(bin_average_oracle(c[0], c[1], c[2], c[3])).epsilon(1e-9));
}

TEST_CASE("accumulator matches a brute-force pair count") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> t(0, 2'000'000);
  std::bernoulli_distribution ch(0.5);
  PhotonStream s;
  for (int i = 0; i < 400; ++i) s.records.push_back({t(rng), static_cast<std::uint8_t>(ch(rng))});
  std::sort(s.records.begin(), s.records.end(), [](auto& a, auto& b) { return a.timestamp_ps < b.timestamp_ps; });
  s.duration_ps = 2'000'001;
  const auto g = g2_histogram(s, 10.0, 200.0);
  std::vector<double> brute(g.counts.size(), 0.0);
  for (const auto& a : s.records)
    for (const auto& b : s.records) {
      if (a.channel != 0 || b.channel != 1) continue;
      const double d = (b.timestamp_ps - a.timestamp_ps) * 1e-3;
      for (std::size_t k = 0; k < g.tau_ns.size(); ++k)
        if (d >= g.tau_ns[k] - 5.0 && d < g.tau_ns[k] + 5.0) brute[k] += 1.0;
    }
  for (std::size_t k = 0; k < brute.size(); ++k) CHECK(g.counts[k] == brute[k]);
  // symmetric bin layout
  for (std::size_t k = 0; k < g.tau_ns.size(); ++k) CHECK(g.tau_ns[k] == doctest::Approx(-g.tau_ns[g.tau_ns.size() - 1 - k]));
}

TEST_CASE("g2 fit recovers a noiseless model") {
  const auto c = model_curve(0.05, 13.0, 0.5, 150.0);
  const auto r = fit_g2(c);
  CHECK(r.converged);
  CHECK(r.value("g2_0") == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(r.value("tau_anti_ns") == doctest::Approx(13.0).epsilon(1e-6));
  CHECK(!r.has_flag("window_too_short"));
  const auto short_window = fit_g2(model_curve(0.05, 13.0, 0.5, 40.0));
  CHECK(short_window.has_flag("window_too_short"));
}

TEST_CASE("flat g2 is flagged") {
  auto c = model_curve(1.0, 5.0, 0.5, 50.0);
  const auto r = fit_g2(c);
  CHECK(r.has_flag("no_antibunching"));
  CHECK(r.has_flag("tau_unbounded"));
  CHECK(!r.converged);
}

TEST_CASE("g2 input errors") {
  PhotonStream s;
  CHECK_THROWS_AS(g2_histogram(s, 1.0, 10.0), std::invalid_argument);
  s.records = {{0, 0}, {5, 0}};
  CHECK_THROWS_AS(g2_histogram(s, 1.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(G2Accumulator(0.0, 10.0), std::invalid_argument);
  G2Accumulator acc(1.0, 10.0);
  acc.add({100, 0});
  CHECK_THROWS_AS(acc.add({50, 1}), std::invalid_argument);
}

TEST_CASE("lifetime fit") {
  TcspcHistogram h;
  h.bin_width_ns = 0.1;
  for (int k = 0; k < 1000; ++k) h.counts.push_back(5000.0 * std::exp(-0.1 * k / 7.61) + 2.0);
  const auto r = fit_lifetime(h);
  CHECK(r.converged);
  CHECK(r.value("tau_ns") == doctest::Approx(7.61).epsilon(1e-6));
  CHECK(r.value("background") == doctest::Approx(2.0).epsilon(1e-5));
  const auto nb = fit_lifetime(h, {false});
  CHECK(nb.value("background") == 0.0);

  TcspcHistogram z;
  z.counts.assign(100, 0.0);
  CHECK_THROWS_AS(fit_lifetime(z), std::invalid_argument);
  z.counts[99] = 10.0;
  CHECK_THROWS_AS(fit_lifetime(z), std::invalid_argument);
}

TEST_CASE("saturation fit") {
  std::vector<SaturationPoint> pts;
  for (double p : {10.0, 25.0, 50.0, 100.0, 200.0, 400.0, 800.0, 1600.0}) pts.push_back({p, 120e3 * p / (p + 200.0)});
  const auto r = fit_saturation(pts);
  CHECK(r.value("i_inf_cps") == doctest::Approx(120e3).epsilon(1e-9));
  CHECK(r.value("p_sat_uw") == doctest::Approx(200.0).epsilon(1e-9));
  const double ps = r.value("p_sat_uw");
  CHECK(r.value("i_inf_cps") * ps / (ps + ps) == doctest::Approx(60e3));
  CHECK(!r.has_flag("insufficient_span"));

  std::vector<SaturationPoint> low;
  for (double p : {1.0, 2.0, 3.0, 4.0}) low.push_back({p, 120e3 * p / (p + 200.0)});
  CHECK(fit_saturation(low).has_flag("insufficient_span"));

  std::vector<SaturationPoint> zero{{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
  CHECK(fit_saturation(zero).has_flag("degenerate"));
  CHECK_THROWS_AS(fit_saturation(std::vector<SaturationPoint>{{1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("saturation with linear background") {
  std::vector<SaturationPoint> pts;
  for (double p = 20.0; p <= 2000.0; p *= 1.5) pts.push_back({p, 80e3 * p / (p + 150.0) + 4.0 * p});
  const auto r = fit_saturation(pts, {true, {}});
  CHECK(r.value("p_sat_uw") == doctest::Approx(150.0).epsilon(1e-6));
  CHECK(r.value("linear_bg_cps_per_uw") == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("polarisation fit") {
  const auto full = fit_polarization(cos2_scan(1.0, 60.0, 1000.0, 0.0));
  CHECK(full.derived_value("visibility") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(full.derived_value("dipole_angle_deg") == doctest::Approx(60.0).epsilon(1e-9));

  const auto r = fit_polarization(cos2_scan(0.85, 45.0, 5000.0, 300.0));
  CHECK(r.derived_value("visibility") == doctest::Approx(0.85).epsilon(1e-9));
  CHECK(r.derived_value("dipole_angle_deg") == doctest::Approx(45.0).epsilon(1e-9));
  CHECK(r.value("theta0_deg") == doctest::Approx(22.5).epsilon(1e-9));

  // a 90 degree plate rotation maps onto the same dipole
  auto s = cos2_scan(0.7, 30.0, 1000.0, 0.0);
  for (auto& a : s.angles_deg) a += 90.0;
  CHECK(fit_polarization(s).derived_value("dipole_angle_deg") == doctest::Approx(30.0).epsilon(1e-9));

  PolarizationScan u;
  for (int k = 0; k < 19; ++k) {
    u.angles_deg.push_back(10.0 * k);
    u.counts_cps.push_back(500.0);
  }
  CHECK(fit_polarization(u).has_flag("unpolarized"));

  PolarizationScan narrow;
  narrow.angles_deg = {0, 10, 20, 30, 40};
  narrow.counts_cps = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(fit_polarization(narrow), std::invalid_argument);
}

}
