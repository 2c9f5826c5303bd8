#pragma once

#include <complex>

namespace snv {

/// Faddeeva function w(z) = exp(-z^2) erfc(-i z) for Im z >= 0, via a
/// 40-term rational expansion in (L + iz)/(L - iz). Relative accuracy of
/// Re w is better than 1e-10 over the upper half plane used by line shapes.
std::complex<double> faddeeva(std::complex<double> z);

/// Area-normalised profiles over the same axis as x (arbitrary units).
double lorentzian_profile(double x, double fwhm);
double gaussian_profile(double x, double fwhm);
/// Convolution of a Lorentzian (fwhm_lorentz) with a Gaussian (fwhm_gauss).
/// Either width may be zero; both zero is an error.
double voigt_profile(double x, double fwhm_lorentz, double fwhm_gauss);

/// Olivero-Longbothum estimate of the Voigt FWHM (~2e-4 relative).
double voigt_fwhm_estimate(double fwhm_lorentz, double fwhm_gauss);
/// FWHM of the exact Voigt profile, found by root search.
double voigt_fwhm(double fwhm_lorentz, double fwhm_gauss);

} // namespace snv
