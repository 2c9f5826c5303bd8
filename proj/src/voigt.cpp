#include "snv/voigt.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "snv/units.hpp"

namespace snv {

namespace {

constexpr int kTerms = 40;

struct WeidemanTable {
  std::array<double, kTerms> a{}; // coefficient of Z^n
  double l = 0.0;

  WeidemanTable() {
    constexpr int m = 2 * kTerms;
    constexpr int m2 = 2 * m;
    l = std::sqrt(kTerms / std::sqrt(2.0));
    // f sampled at k = -m+1 .. m-1 with a leading zero, then fftshift'ed
    std::array<double, m2> f{};
    f[0] = 0.0;
    for (int k = -m + 1; k <= m - 1; ++k) {
      const double theta = k * constants::pi / m;
      const double t = l * std::tan(theta / 2.0);
      f[static_cast<std::size_t>(k + m)] = std::exp(-t * t) * (l * l + t * t);
    }
    std::array<double, m2> shifted{};
    for (int i = 0; i < m2; ++i) shifted[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>((i + m2 / 2) % m2)];
    // real part of the DFT; only indices 1..kTerms are needed
    for (int j = 1; j <= kTerms; ++j) {
      double s = 0.0;
      for (int i = 0; i < m2; ++i)
        s += shifted[static_cast<std::size_t>(i)] * std::cos(2.0 * constants::pi * j * i / m2);
      a[static_cast<std::size_t>(j - 1)] = s / m2;
    }
  }
};

const WeidemanTable& table() {
  static const WeidemanTable t;
  return t;
}

constexpr double kFwhmToSigma = 0.42466090014400953; // 1 / (2 sqrt(2 ln 2))

} // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  const auto& t = table();
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> lmiz = t.l - i * z;
  const std::complex<double> zz = (t.l + i * z) / lmiz;
  std::complex<double> p = t.a[kTerms - 1];
  for (int n = kTerms - 2; n >= 0; --n) p = p * zz + t.a[static_cast<std::size_t>(n)];
  return 2.0 * p / (lmiz * lmiz) + (1.0 / std::sqrt(constants::pi)) / lmiz;
}

double lorentzian_profile(double x, double fwhm) {
  const double g = 0.5 * fwhm;
  return g / (constants::pi * (x * x + g * g));
}

double gaussian_profile(double x, double fwhm) {
  const double s = fwhm * kFwhmToSigma;
  return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * constants::pi));
}

double voigt_profile(double x, double fwhm_lorentz, double fwhm_gauss) {
  if (fwhm_lorentz < 0.0 || fwhm_gauss < 0.0) throw std::domain_error("voigt: negative width");
  if (fwhm_gauss == 0.0) {
    if (fwhm_lorentz == 0.0) throw std::domain_error("voigt: both widths zero");
    return lorentzian_profile(x, fwhm_lorentz);
  }
  if (fwhm_lorentz == 0.0) return gaussian_profile(x, fwhm_gauss);
  const double s = fwhm_gauss * kFwhmToSigma;
  const double g = 0.5 * fwhm_lorentz;
  const std::complex<double> z(x / (s * std::sqrt(2.0)), g / (s * std::sqrt(2.0)));
  return faddeeva(z).real() / (s * std::sqrt(2.0 * constants::pi));
}

double voigt_fwhm_estimate(double fl, double fg) {
  return 0.5346 * fl + std::sqrt(0.2166 * fl * fl + fg * fg);
}

double voigt_fwhm(double fl, double fg) {
  const double peak = voigt_profile(0.0, fl, fg);
  double lo = 0.0, hi = 2.0 * voigt_fwhm_estimate(fl, fg);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (voigt_profile(0.5 * mid, fl, fg) > 0.5 * peak)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace snv
