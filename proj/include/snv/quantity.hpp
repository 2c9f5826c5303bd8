#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace snv {

/// What a command-line quantity measures, and the unit it is returned in.
enum class Dimension {
  time_ns,
  frequency_ghz,   // Hz..THz, or an energy (ueV, meV, eV) via E = h nu
  rate_hz,         // cps, kcps, Mcps, cts/s, Hz, kHz, MHz
  power_uw,        // pW, nW, uW, mW, W
  length_nm,       // pm, nm, um
  energy_ev,       // ueV, meV, eV
  temperature_k,   // mK, K
  scan_speed_ghz_s // MHz/s, GHz/s
};

const char* to_string(Dimension d);

/// Parses "<number><unit>" (optional space between). A bare number or a unit
/// of the wrong dimension throws std::invalid_argument.
double parse_quantity(std::string_view text, Dimension dim);

/// "lo:hi" with both ends carrying units of `dim`, or bare numbers taken as
/// `dim`'s canonical unit when `allow_bare` (wavelength windows).
std::pair<double, double> parse_range(std::string_view text, Dimension dim, bool allow_bare = false);

} // namespace snv
