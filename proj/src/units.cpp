#include "snv/units.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace snv {

std::string_view to_string(EnergyUnit u) {
  switch (u) {
  case EnergyUnit::nm: return "nm";
  case EnergyUnit::eV: return "eV";
  case EnergyUnit::meV: return "meV";
  case EnergyUnit::GHz: return "GHz";
  case EnergyUnit::K: return "K";
  }
  return "?";
}

EnergyUnit energy_unit_from_string(std::string_view s) {
  if (s == "nm") return EnergyUnit::nm;
  if (s == "eV") return EnergyUnit::eV;
  if (s == "meV") return EnergyUnit::meV;
  if (s == "GHz") return EnergyUnit::GHz;
  if (s == "K") return EnergyUnit::K;
  throw std::invalid_argument("unknown energy unit '" + std::string(s) + "'");
}

double to_ev(EnergyQuantity q) {
  if (!std::isfinite(q.value)) throw std::domain_error("convert: non-finite value");
  switch (q.unit) {
  case EnergyUnit::nm:
    if (q.value <= 0.0) throw std::domain_error("convert: wavelength must be positive");
    return constants::hc_ev_nm / q.value;
  case EnergyUnit::eV: return q.value;
  case EnergyUnit::meV: return q.value * 1e-3;
  case EnergyUnit::GHz: return q.value * constants::ev_per_ghz;
  case EnergyUnit::K: return q.value * constants::boltzmann_ev_per_k;
  }
  throw std::domain_error("convert: bad unit");
}

double from_ev(double ev, EnergyUnit target) {
  switch (target) {
  case EnergyUnit::nm:
    if (ev <= 0.0) throw std::domain_error("convert: non-positive energy has no wavelength");
    return constants::hc_ev_nm / ev;
  case EnergyUnit::eV: return ev;
  case EnergyUnit::meV: return ev * 1e3;
  case EnergyUnit::GHz: return ev / constants::ev_per_ghz;
  case EnergyUnit::K: return ev / constants::boltzmann_ev_per_k;
  }
  throw std::domain_error("convert: bad unit");
}

EnergyQuantity convert(EnergyQuantity q, EnergyUnit target) {
  if (q.unit == target) {
    if (!std::isfinite(q.value)) throw std::domain_error("convert: non-finite value");
    if (target == EnergyUnit::nm && q.value <= 0.0)
      throw std::domain_error("convert: wavelength must be positive");
    return q;
  }
  return {from_ev(to_ev(q), target), target};
}

namespace {
void check_grid(std::span<const double> grid, std::span<const double> values, double fwhm,
                const char* what) {
  if (grid.size() != values.size())
    throw std::invalid_argument(std::string(what) + ": grid and intensity lengths differ");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument(std::string(what) + ": grid must be strictly increasing");
  if (!(fwhm > 0.0)) throw std::invalid_argument(std::string(what) + ": instrument_fwhm must be > 0");
}
} // namespace

Spectrum::Spectrum(std::vector<double> wavelength_nm, std::vector<double> counts,
                   double instrument_fwhm_ghz)
    : wavelength_(std::move(wavelength_nm)), counts_(std::move(counts)),
      instrument_fwhm_ghz_(instrument_fwhm_ghz) {
  check_grid(wavelength_, counts_, instrument_fwhm_ghz_, "Spectrum");
  if (!wavelength_.empty() && wavelength_.front() <= 0.0)
    throw std::invalid_argument("Spectrum: wavelengths must be positive");
  for (double c : counts_)
    if (c < 0.0 || !std::isfinite(c)) throw std::invalid_argument("Spectrum: counts must be finite and >= 0");
}

EnergySpectrum::EnergySpectrum(std::vector<double> energy_ev, std::vector<double> intensity,
                               double instrument_fwhm_ghz)
    : energy_(std::move(energy_ev)), intensity_(std::move(intensity)),
      instrument_fwhm_ghz_(instrument_fwhm_ghz) {
  check_grid(energy_, intensity_, instrument_fwhm_ghz_, "EnergySpectrum");
}

EnergySpectrum to_energy(const Spectrum& s) {
  const auto n = s.size();
  std::vector<double> e(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    const double lam = s.wavelength_nm()[j];
    e[i] = constants::hc_ev_nm / lam;
    y[i] = s.counts()[j] * lam * lam / constants::hc_ev_nm;
  }
  return {std::move(e), std::move(y), s.instrument_fwhm_ghz()};
}

Spectrum to_wavelength(const EnergySpectrum& s) {
  const auto n = s.size();
  std::vector<double> lam(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    const double en = s.energy_ev()[j];
    if (en <= 0.0) throw std::domain_error("to_wavelength: non-positive energy");
    lam[i] = constants::hc_ev_nm / en;
    y[i] = std::max(0.0, s.intensity()[j]) * en * en / constants::hc_ev_nm;
  }
  return {std::move(lam), std::move(y), s.instrument_fwhm_ghz()};
}

std::int64_t PhotonStream::effective_duration_ps() const {
  if (duration_ps > 0) return duration_ps;
  return records.empty() ? 0 : records.back().timestamp_ps;
}

std::size_t PhotonStream::count(std::uint8_t channel) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                [=](const PhotonRecord& r) { return r.channel == channel; }));
}

void validate_stream(const PhotonStream& s) {
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    if (s.records[i].channel > 1) throw std::invalid_argument("stream: channel must be 0 or 1");
    if (s.records[i].timestamp_ps < 0) throw std::invalid_argument("stream: negative timestamp");
    if (i > 0 && s.records[i].timestamp_ps < s.records[i - 1].timestamp_ps)
      throw std::invalid_argument("stream: timestamps must be non-decreasing");
  }
}

} // namespace snv
