#pragma once

#include <array>

#include <nlohmann/json_fwd.hpp>

namespace snv {

/// Optical fine structure of a single centre. Ground and excited states are
/// doublets; the four ZPL components are labelled A..D.
struct LevelStructure {
  double zpl_wavelength_nm = 619.7; // nominal ZPL centre
  double ground_splitting_ghz = 830.0;
  double excited_splitting_ghz = 3030.0;
  double excited_lifetime_ns = 5.0; // deep-emitter value; per-emitter input in practice

  /// Throws std::invalid_argument if any field is not > 0.
  void validate() const;
  static LevelStructure snv_default() { return {}; }
};

struct DWParams {
  double huang_rhys_s = 0.57;
  double t_cutoff_k = 680.0;
  void validate() const;
};

/// Gamma(T) = gamma0 + c_linear T + c_cubic T^3, all in GHz.
struct LinewidthLaw {
  double gamma0_ghz = 0.0;
  double c_linear = 0.0;
  double c_cubic = 0.0;
  void validate() const;
};

/// Delta(T) = alpha T^2 + beta T^4 in GHz.
struct ShiftLaw {
  double alpha_quadratic = 0.0;
  double beta_quartic = 0.0;
};

enum class Transition { A = 0, B = 1, C = 2, D = 3 };

struct TransitionLine {
  Transition label;
  double frequency_ghz; // absolute optical frequency
  double energy_ev;
  double wavelength_nm;
};

/// Population ratio p(upper excited)/p(lower excited) = exp(-h dE / k_B T).
/// Throws std::domain_error for T <= 0.
double boltzmann_upper_fraction(const LevelStructure& ls, double temperature_k);

/// Lines A..D. The ZPL wavelength is taken as the centre of gravity of the
/// four lines: D lies ground/2 + excited/2 below it.
std::array<TransitionLine, 4> transition_table(const LevelStructure& ls);

/// Fourier-limited FWHM 1/(2 pi tau) in MHz. Infinite lifetime gives 0.
double fourier_limit_mhz(double lifetime_ns);

/// exp(-S (1 + 2 pi^2/3 * T^2 / T_cutoff^2))
double dw_factor(const DWParams& p, double temperature_k);

double linewidth_at(const LinewidthLaw& law, double temperature_k);
double lineshift_at(const ShiftLaw& law, double temperature_k);

void to_json(nlohmann::json& j, const LevelStructure& ls);
void from_json(const nlohmann::json& j, LevelStructure& ls);
void to_json(nlohmann::json& j, const DWParams& p);
void from_json(const nlohmann::json& j, DWParams& p);

} // namespace snv
