#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "snv/spectral_fit.hpp"

using namespace snv;

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) g.push_back(lo + i * step);
  return g;
}

PeakModel lorentz(double nm, double fwhm_ghz, double area) {
  PeakModel p;
  p.kind = PeakKind::lorentzian;
  p.center_ev = nm_to_ev(nm);
  p.fwhm_lorentz_ghz = fwhm_ghz;
  p.area = area;
  return p;
}

PeakModel gauss_at_offset(double zpl_nm, double offset_mev, double fwhm_mev, double area) {
  PeakModel p;
  p.kind = PeakKind::gaussian;
  p.center_ev = nm_to_ev(zpl_nm) - 1e-3 * offset_mev;
  p.fwhm_gauss_ghz = ev_to_ghz(1e-3 * fwhm_mev);
  p.area = area;
  return p;
}

Spectrum render(const std::vector<double>& g, const std::vector<PeakModel>& peaks, double scale = 1.0) {
  auto y = render_peaks(g, peaks);
  for (auto& v : y) v *= scale;
  return Spectrum(g, y);
}

} // namespace

TEST_SUITE("spectral_fit") {

TEST_CASE("render converts energy density to wavelength density") {
  const auto g = grid(600.0, 640.0, 0.001);
  const auto y = render_peaks(g, std::vector<PeakModel>{gauss_at_offset(619.7, 0.0, 5.0, 3.0)});
  double a = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) a += 0.5 * (y[i] + y[i - 1]) * (g[i] - g[i - 1]);
  CHECK(a == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("lorentzian fit is exact on noiseless data") {
  const auto g = grid(619.5, 619.9, 0.0004);
  const auto s = render(g, {lorentz(619.7, 15.0, 1e4)});
  const std::vector<PeakModel> seed{lorentz(619.705, 12.0, 8e3)};
  const auto r = fit_peaks(s, seed);
  CHECK(r.fit.converged);
  REQUIRE(r.peaks.size() == 1);
  CHECK(r.peaks[0].center_nm() == doctest::Approx(619.7).epsilon(1e-9));
  CHECK(r.peaks[0].fwhm_lorentz_ghz == doctest::Approx(15.0).epsilon(1e-6));
  CHECK(r.peaks[0].area == doctest::Approx(1e4).epsilon(1e-6));
}

TEST_CASE("voigt fit holds the instrument width") {
  const auto g = grid(619.5, 619.9, 0.0004);
  PeakModel truth = lorentz(619.7, 15.0, 1e4);
  truth.kind = PeakKind::voigt;
  truth.fwhm_gauss_ghz = 10.0;
  const auto s = render(g, {truth});
  PeakModel seed = truth;
  seed.fwhm_gauss_ghz = 0.0;
  seed.fwhm_lorentz_ghz = 20.0;
  const auto r = fit_peaks(s, std::vector<PeakModel>{seed});
  CHECK(r.peaks[0].fwhm_gauss_ghz == 10.0);
  CHECK(r.peaks[0].fwhm_lorentz_ghz == doctest::Approx(15.0).epsilon(1e-6));
}

TEST_CASE("fit input errors") {
  const auto g = grid(619.5, 619.9, 0.01);
  const auto s = render(g, {lorentz(619.7, 15.0, 1e4)});
  CHECK_THROWS_AS(fit_peaks(s, std::vector<PeakModel>{}), std::invalid_argument);
  CHECK_THROWS_AS(fit_peaks(s, std::vector<PeakModel>{lorentz(630.0, 15.0, 1.0)}), std::invalid_argument);
}

TEST_CASE("debye-waller fraction") {
  const auto g = grid(612.0, 700.0, 0.01);
  const std::vector<PeakModel> truth{lorentz(619.7, 200.0, 500.0), gauss_at_offset(619.7, 60.0, 25.0, 500.0)};
  DebyeWallerOptions o;
  o.zpl = {612.0, 625.0};
  o.psb = {625.0, 700.0};
  o.seeds = truth;
  o.seeds[0].area = 300.0;
  o.seeds[1].area = 800.0;
  const auto half = debye_waller(render(g, truth), o);
  CHECK(half.dw == doctest::Approx(0.5).epsilon(1e-6));
  const auto scaled = debye_waller(render(g, truth, 37.0), o);
  CHECK(scaled.dw == doctest::Approx(half.dw).epsilon(1e-9));
  CHECK(scaled.total_area == doctest::Approx(37.0 * half.total_area).epsilon(1e-6));

  o.seeds = {truth[0]};
  const auto only = debye_waller(render(g, {truth[0]}), o);
  CHECK(only.dw == doctest::Approx(1.0));

  o.zpl = {500.0, 625.0};
  CHECK_THROWS_AS(debye_waller(render(g, truth), o), std::invalid_argument);
}

TEST_CASE("sideband peaks are matched to the reference table") {
  const auto g = grid(600.0, 700.0, 0.02);
  std::vector<PeakModel> peaks{lorentz(619.7, 100.0, 2000.0)};
  for (double off : {46.0, 76.0, 109.0, 122.0, 148.0, 181.0}) peaks.push_back(gauss_at_offset(619.7, off, 3.0, 40.0));
  peaks.push_back(gauss_at_offset(619.7, 29.0, 3.0, 40.0));
  const auto rep = find_psb_peaks(render(g, peaks), 619.7);
  CHECK(rep.peaks.size() == 7);
  CHECK(rep.matched() == 6);
  CHECK(rep.unmatched() == 1);
  for (const auto& p : rep.peaks) {
    if (std::abs(p.offset_mev - 29.0) < 2.0) {
      CHECK(!p.matched);
    } else {
      CHECK(p.matched);
      CHECK(std::abs(p.distance_mev) < 2.0);
    }
  }
  const auto flat = find_psb_peaks(Spectrum(g, std::vector<double>(g.size(), 5.0)), 619.7);
  CHECK(flat.peaks.empty());
  PsbOptions bad;
  bad.table.offsets_mev = {50.0, 40.0};
  CHECK_THROWS_AS(find_psb_peaks(render(g, peaks), 619.7, bad), std::invalid_argument);
}

TEST_CASE("smoothing and local maxima") {
  std::vector<double> y;
  for (int i = 0; i < 50; ++i) y.push_back(1.0 + 0.1 * i + 0.02 * i * i - 1e-3 * i * i * i);
  const auto s = savitzky_golay(y, {9, 3});
  // cubic data is reproduced exactly
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(s[i] == doctest::Approx(y[i]).epsilon(1e-9));
  CHECK_THROWS_AS(savitzky_golay(y, {8, 3}), std::invalid_argument);
  const std::vector<double> z{0, 1, 0, 3, 3, 0, 2, 1.5, 2.5, 0};
  const auto pk = find_local_peaks(z, 0.6);
  REQUIRE(pk.size() == 3);
  CHECK(pk[0].index == 1);
  CHECK(pk[1].prominence == 3.0);
  CHECK(pk[2].index == 8);
}

TEST_CASE("mirror spectrum") {
  std::vector<double> e, v;
  for (int i = 0; i <= 400; ++i) {
    e.push_back(1.8 + 0.0005 * i);
    v.push_back(std::exp(-std::pow((e.back() - 1.878) / 0.004, 2)) + 0.1 * i);
  }
  const EnergySpectrum s(e, v);
  const double e0 = 1.9;
  const auto m = mirror_spectrum(s, e0);
  const auto mm = mirror_spectrum(m, e0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(mm.energy_ev()[i] == doctest::Approx(e[i]).epsilon(1e-14));
    CHECK(mm.intensity()[i] == v[i]);
  }
  // the zpl energy is a fixed point
  CHECK(m.energy_ev()[200] == doctest::Approx(e0).epsilon(1e-14));
  CHECK(m.intensity()[200] == v[200]);
  // feature 22 meV below maps 22 meV above
  std::size_t top = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (std::abs(m.energy_ev()[i] - 1.922) < std::abs(m.energy_ev()[top] - 1.922)) top = i;
  CHECK(m.intensity()[top] == doctest::Approx(1.0 + 0.1 * (400 - top)).epsilon(1e-9));
  CHECK_THROWS_AS(mirror_spectrum(s, 3.0), std::invalid_argument);
}

TEST_CASE("mirror places a 122 meV sideband above the line") {
  const auto g = grid(600.0, 700.0, 0.01);
  const auto s = render(g, {gauss_at_offset(619.7, 122.0, 5.0, 10.0)});
  const double e0 = nm_to_ev(619.7);
  const auto m = mirror_spectrum(s, e0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.intensity()[i] > m.intensity()[best]) best = i;
  CHECK(1e3 * (m.energy_ev()[best] - e0) == doctest::Approx(122.0).epsilon(2e-3));
}

TEST_CASE("a2u resonance fit") {
  for (double w : {190.0, 120.0}) {
    std::vector<ExcitationPoint> pts;
    for (int i = 0; i <= 60; ++i) {
      const double e = 2.05 + 0.01 * i;
      const double g = 0.5e-3 * w, d = e - 2.348;
      pts.push_back({e, 3.0 * g * g / (d * d + g * g) + 0.2});
    }
    const auto r = fit_a2u_resonance(pts);
    CHECK(r.converged);
    CHECK(r.value("center_ev") == doctest::Approx(2.348).epsilon(1e-9));
    CHECK(r.value("fwhm_mev") == doctest::Approx(w).epsilon(1e-7));
    CHECK(r.value("amplitude") == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(r.value("offset") == doctest::Approx(0.2).epsilon(1e-6));
  }
  std::vector<ExcitationPoint> flat;
  for (int i = 0; i < 10; ++i) flat.push_back({2.0 + 0.1 * i, 4.0});
  CHECK(fit_a2u_resonance(flat).has_flag("degenerate"));
  CHECK_THROWS_AS(fit_a2u_resonance(std::vector<ExcitationPoint>(3, {2.0, 1.0})), std::invalid_argument);
}

TEST_CASE("peak json round trip") {
  PeakModel p = lorentz(619.7, 15.0, 2.0);
  nlohmann::json j = p;
  const auto b = j.get<PeakModel>();
  CHECK(b.kind == PeakKind::lorentzian);
  CHECK(b.center_ev == p.center_ev);
  CHECK(b.area == 2.0);
}

}
