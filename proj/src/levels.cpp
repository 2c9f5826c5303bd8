#include "snv/levels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "snv/units.hpp"

namespace snv {

void LevelStructure::validate() const {
  if (!(zpl_wavelength_nm > 0.0 && ground_splitting_ghz > 0.0 && excited_splitting_ghz > 0.0 &&
        excited_lifetime_ns > 0.0))
    throw std::invalid_argument("LevelStructure: all fields must be > 0");
}

void DWParams::validate() const {
  if (!(huang_rhys_s >= 0.0)) throw std::invalid_argument("DWParams: huang_rhys_s must be >= 0");
  if (!(t_cutoff_k > 0.0)) throw std::invalid_argument("DWParams: t_cutoff must be > 0");
}

void LinewidthLaw::validate() const {
  if (gamma0_ghz < 0.0 || c_linear < 0.0 || c_cubic < 0.0)
    throw std::invalid_argument("LinewidthLaw: coefficients must be >= 0");
}

double boltzmann_upper_fraction(const LevelStructure& ls, double temperature_k) {
  if (!(temperature_k > 0.0)) throw std::domain_error("boltzmann_upper_fraction: T must be > 0");
  if (std::isinf(temperature_k)) return 1.0;
  const double de = ghz_to_ev(ls.excited_splitting_ghz);
  return std::exp(-de / (constants::boltzmann_ev_per_k * temperature_k));
}

std::array<TransitionLine, 4> transition_table(const LevelStructure& ls) {
  const double centre_ghz = ev_to_ghz(nm_to_ev(ls.zpl_wavelength_nm));
  const double eg = ls.ground_splitting_ghz;
  const double ee = ls.excited_splitting_ghz;
  const double c = centre_ghz - 0.5 * ee + 0.5 * eg;
  const double freqs[4] = {c + ee, c + ee - eg, c, c - eg};
  std::array<TransitionLine, 4> out{};
  for (int i = 0; i < 4; ++i) {
    const double ev = ghz_to_ev(freqs[i]);
    out[static_cast<std::size_t>(i)] = {static_cast<Transition>(i), freqs[i], ev, ev_to_nm(ev)};
  }
  return out;
}

double fourier_limit_mhz(double lifetime_ns) {
  if (!(lifetime_ns > 0.0)) throw std::domain_error("fourier_limit: lifetime must be > 0");
  if (std::isinf(lifetime_ns)) return 0.0;
  return 1.0 / (2.0 * constants::pi * lifetime_ns * 1e-9) * 1e-6;
}

double dw_factor(const DWParams& p, double temperature_k) {
  if (temperature_k < 0.0) throw std::domain_error("dw_factor: T must be >= 0");
  const double r = temperature_k / p.t_cutoff_k;
  return std::exp(-p.huang_rhys_s * (1.0 + 2.0 * constants::pi * constants::pi / 3.0 * r * r));
}

double linewidth_at(const LinewidthLaw& law, double temperature_k) {
  if (temperature_k < 0.0) throw std::domain_error("linewidth_at: T must be >= 0");
  const double t = temperature_k;
  return law.gamma0_ghz + law.c_linear * t + law.c_cubic * t * t * t;
}

double lineshift_at(const ShiftLaw& law, double temperature_k) {
  if (temperature_k < 0.0) throw std::domain_error("lineshift_at: T must be >= 0");
  const double t2 = temperature_k * temperature_k;
  return law.alpha_quadratic * t2 + law.beta_quartic * t2 * t2;
}

void to_json(nlohmann::json& j, const LevelStructure& ls) {
  j = {{"zpl_wavelength_nm", ls.zpl_wavelength_nm},
       {"ground_splitting_ghz", ls.ground_splitting_ghz},
       {"excited_splitting_ghz", ls.excited_splitting_ghz},
       {"excited_lifetime_ns", ls.excited_lifetime_ns}};
}

void from_json(const nlohmann::json& j, LevelStructure& ls) {
  LevelStructure d;
  ls.zpl_wavelength_nm = j.value("zpl_wavelength_nm", d.zpl_wavelength_nm);
  ls.ground_splitting_ghz = j.value("ground_splitting_ghz", d.ground_splitting_ghz);
  ls.excited_splitting_ghz = j.value("excited_splitting_ghz", d.excited_splitting_ghz);
  ls.excited_lifetime_ns = j.value("excited_lifetime_ns", d.excited_lifetime_ns);
  ls.validate();
}

void to_json(nlohmann::json& j, const DWParams& p) {
  j = {{"huang_rhys_s", p.huang_rhys_s}, {"t_cutoff_k", p.t_cutoff_k}};
}

void from_json(const nlohmann::json& j, DWParams& p) {
  DWParams d;
  p.huang_rhys_s = j.value("huang_rhys_s", d.huang_rhys_s);
  p.t_cutoff_k = j.value("t_cutoff_k", d.t_cutoff_k);
  p.validate();
}

} // namespace snv
