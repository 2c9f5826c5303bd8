#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace snv {

// CODATA 2018 exact / recommended values.
namespace constants {
inline constexpr double planck_ev_s = 4.135667696e-15;     // h [eV s]
inline constexpr double boltzmann_ev_per_k = 8.617333262e-5; // k_B [eV/K]
inline constexpr double speed_of_light = 299792458.0;       // c [m/s]
inline constexpr double hc_ev_nm = 1239.841984;             // h c [eV nm]
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double ev_per_ghz = planck_ev_s * 1e9;
} // namespace constants

enum class EnergyUnit { nm, eV, meV, GHz, K };

std::string_view to_string(EnergyUnit u);
EnergyUnit energy_unit_from_string(std::string_view s);

/// A spectroscopic energy-like quantity in one of the interchangeable units
/// (wavelength, photon energy, frequency, thermal equivalent).
struct EnergyQuantity {
  double value = 0.0;
  EnergyUnit unit = EnergyUnit::eV;

  friend bool operator==(const EnergyQuantity&, const EnergyQuantity&) = default;
};

/// Conversion goes through eV. Throws std::domain_error for non-finite
/// input and for non-positive wavelengths (or a zero energy requested as
/// a wavelength).
EnergyQuantity convert(EnergyQuantity q, EnergyUnit target);

double to_ev(EnergyQuantity q);
double from_ev(double ev, EnergyUnit target);

inline double ghz_to_ev(double ghz) { return ghz * constants::ev_per_ghz; }
inline double ev_to_ghz(double ev) { return ev / constants::ev_per_ghz; }
inline double nm_to_ev(double nm) { return constants::hc_ev_nm / nm; }
inline double ev_to_nm(double ev) { return constants::hc_ev_nm / ev; }

/// Intensity vs. wavelength, sampled on a strictly increasing grid.
/// `counts` is read as a density per nm.
class Spectrum {
public:
  Spectrum() = default;
  Spectrum(std::vector<double> wavelength_nm, std::vector<double> counts,
           double instrument_fwhm_ghz = 10.0);

  std::span<const double> wavelength_nm() const { return wavelength_; }
  std::span<const double> counts() const { return counts_; }
  double instrument_fwhm_ghz() const { return instrument_fwhm_ghz_; }
  std::size_t size() const { return wavelength_.size(); }
  bool empty() const { return wavelength_.empty(); }

private:
  std::vector<double> wavelength_;
  std::vector<double> counts_;
  double instrument_fwhm_ghz_ = 10.0;
};

/// Intensity density per eV on a strictly increasing photon-energy grid.
class EnergySpectrum {
public:
  EnergySpectrum() = default;
  EnergySpectrum(std::vector<double> energy_ev, std::vector<double> intensity,
                 double instrument_fwhm_ghz = 10.0);

  std::span<const double> energy_ev() const { return energy_; }
  std::span<const double> intensity() const { return intensity_; }
  double instrument_fwhm_ghz() const { return instrument_fwhm_ghz_; }
  std::size_t size() const { return energy_.size(); }

private:
  std::vector<double> energy_;
  std::vector<double> intensity_;
  double instrument_fwhm_ghz_ = 10.0;
};

/// Re-sample onto the energy axis, applying |d lambda / dE| = lambda^2 / hc.
EnergySpectrum to_energy(const Spectrum& s);
/// Inverse of to_energy.
Spectrum to_wavelength(const EnergySpectrum& s);

/// One detector event.
struct PhotonRecord {
  std::int64_t timestamp_ps = 0;
  std::uint8_t channel = 0;

  friend bool operator==(const PhotonRecord&, const PhotonRecord&) = default;
};

struct PhotonStream {
  std::vector<PhotonRecord> records;
  std::int64_t duration_ps = 0; // acquisition length; 0 means "use last timestamp"

  std::int64_t effective_duration_ps() const;
  std::size_t count(std::uint8_t channel) const;
};

/// Throws std::invalid_argument if timestamps decrease or a channel is not 0/1.
void validate_stream(const PhotonStream& s);

} // namespace snv
