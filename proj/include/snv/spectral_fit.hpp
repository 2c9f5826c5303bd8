#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snv/fit.hpp"
#include "snv/units.hpp"

namespace snv {

enum class PeakKind { lorentzian, gaussian, voigt };

/// One line in a spectrum. Energies in eV, widths in GHz, `area` is the
/// integrated intensity (same number on the wavelength or energy axis).
struct PeakModel {
  PeakKind kind = PeakKind::voigt;
  double center_ev = 2.0;
  double fwhm_lorentz_ghz = 10.0;
  double fwhm_gauss_ghz = 0.0; // <= 0 on a Voigt seed: use the instrument response
  double area = 1.0;
  bool fit_gauss = false;      // Voigt only: refine the Gaussian width instead of holding it

  double center_nm() const { return ev_to_nm(center_ev); }
  /// Energy-density value (per eV) at photon energy `e_ev`.
  double density(double e_ev) const;
};

struct PeakFitOptions {
  bool fit_baseline = false;
  std::optional<std::pair<double, double>> range_nm; // restrict the fitted samples
};

struct PeakFitResult {
  FitResult fit;
  std::vector<PeakModel> peaks;
  double baseline = 0.0; // per-nm density offset
};

/// Least-squares refinement of every seed against the raw counts with
/// Poisson weights sqrt(max(counts, 1)).
PeakFitResult fit_peaks(const Spectrum& s, std::span<const PeakModel> seeds, const PeakFitOptions& options = {});

/// Model intensity (density per nm) at each wavelength of `grid_nm`.
std::vector<double> render_peaks(std::span<const double> grid_nm, std::span<const PeakModel> peaks,
                                 double baseline = 0.0);

struct SmoothingOptions {
  int window = 9; // odd; <= 1 disables smoothing
  int order = 3;
};

std::vector<double> savitzky_golay(std::span<const double> y, const SmoothingOptions& opt);

/// Indices of local maxima with topographic prominence >= min_prominence.
struct LocalPeak {
  std::size_t index;
  double height;
  double prominence;
};
std::vector<LocalPeak> find_local_peaks(std::span<const double> y, double min_prominence);

/// Voigt seeds for every prominent maximum inside [lo_nm, hi_nm].
std::vector<PeakModel> auto_seed_peaks(const Spectrum& s, double lo_nm, double hi_nm,
                                       double relative_prominence = 0.02, bool fit_gauss = false,
                                       const SmoothingOptions& smoothing = {});

struct WavelengthWindow {
  double lo_nm;
  double hi_nm;
};

struct DebyeWallerOptions {
  WavelengthWindow zpl{610.0, 625.0};
  WavelengthWindow psb{625.0, 740.0};
  std::vector<PeakModel> seeds; // empty: auto-seed both windows
  double relative_prominence = 0.01;
  SmoothingOptions smoothing{};
};

struct DebyeWallerResult {
  double dw = 1.0;
  double dw_error = 0.0;
  double zpl_area = 0.0;
  double total_area = 0.0;
  PeakFitResult fit;
};

/// DW = area(peaks centred in the ZPL window) / area(all peaks).
/// Throws std::invalid_argument for windows outside the grid, std::domain_error for zero total area.
DebyeWallerResult debye_waller(const Spectrum& s, const DebyeWallerOptions& options = {});

/// Reference phonon-sideband offsets from the ZPL.
struct PSBTable {
  std::string reference = "a1g";
  std::vector<double> offsets_mev{46.0, 76.0, 109.0, 122.0, 148.0, 181.0};
  void validate() const;
};

struct PsbPeak {
  double offset_mev;
  double wavelength_nm;
  double height;
  double prominence;
  double nearest_reference_mev;
  double distance_mev;
  bool matched;
};

struct PsbOptions {
  SmoothingOptions smoothing{};
  double relative_prominence = 0.02; // of the highest smoothed value in the search range
  double min_offset_mev = 15.0;
  double max_offset_mev = 220.0;
  double match_tolerance_mev = 2.0;
  PSBTable table{};
};

struct PsbReport {
  std::vector<PsbPeak> peaks;
  std::string reference;
  std::size_t matched() const;
  std::size_t unmatched() const;
};

PsbReport find_psb_peaks(const Spectrum& s, double zpl_center_nm, const PsbOptions& options = {});

/// (E, I) -> (2 E_zpl - E, I), re-sorted ascending.
EnergySpectrum mirror_spectrum(const EnergySpectrum& s, double zpl_energy_ev);
EnergySpectrum mirror_spectrum(const Spectrum& s, double zpl_energy_ev);

struct ExcitationPoint {
  double energy_ev;
  double response;
};

/// Single Lorentzian plus constant; params center_ev, fwhm_mev, amplitude, offset.
FitResult fit_a2u_resonance(std::span<const ExcitationPoint> ple);

void to_json(nlohmann::json& j, const PeakModel& p);
void from_json(const nlohmann::json& j, PeakModel& p);
void to_json(nlohmann::json& j, const PsbReport& r);
void to_json(nlohmann::json& j, const DebyeWallerResult& r);
void from_json(const nlohmann::json& j, PSBTable& t);

} // namespace snv
