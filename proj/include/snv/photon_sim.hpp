#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snv/levels.hpp"
#include "snv/units.hpp"

namespace snv {

enum class DetectionBand { all, zpl, psb };

/// Input for CW photon-stream and pulsed TCSPC simulations.
struct EmitterConfig {
  LevelStructure level;
  double excitation_power_uw = 100.0;
  double saturation_power_uw = 200.0;
  double max_rate_cps = 120e3;   // detected rate at infinite power
  double dark_rate_cps = 250.0;  // per channel
  DWParams dw;
  double temperature_k = 5.0;
  double duration_s = 1.0;
  std::uint64_t rng_seed = 1;
  DetectionBand band = DetectionBand::all; // ZPL/PSB filter, thinned by DW(T)

  void validate() const;

  /// Mean detected emitter rate (both channels) max_rate P/(P+Psat), times
  /// the band fraction.
  double signal_rate_cps() const;
  /// Pump rate into the excited state, (1/tau) P/Psat, in 1/s.
  double pump_rate_hz() const;
  /// Antibunching time constant of the renewal process, 1/(pump + 1/tau), in ns.
  double antibunching_time_ns() const;
};

/// Lazily generates a time-ordered two-channel stream (50/50 splitter plus
/// independent Poissonian dark counts on each detector). Bit-identical for
/// a given config.
class StreamGenerator {
public:
  explicit StreamGenerator(const EmitterConfig& cfg);

  /// Next record, or nullopt once `duration` is exhausted.
  std::optional<PhotonRecord> next();
  std::int64_t duration_ps() const { return duration_ps_; }

private:
  void advance_emitter();
  void advance_dark(int ch);

  std::mt19937_64 emitter_rng_, route_rng_, dark_rng_[2];
  double pump_hz_ = 0.0, decay_hz_ = 0.0, detect_prob_ = 0.0, dark_hz_ = 0.0;
  bool emitter_on_ = false;
  std::int64_t duration_ps_ = 0;
  std::int64_t next_emitter_ = 0, next_dark_[2] = {0, 0};
  double emitter_clock_s_ = 0.0, dark_clock_s_[2] = {0.0, 0.0};
};

/// Whole stream in memory. Throws std::length_error if the expected number
/// of records is beyond `max_records`.
PhotonStream simulate_stream(const EmitterConfig& cfg, std::size_t max_records = 400'000'000);

struct TcspcHistogram {
  double bin_width_ns = 0.1;
  std::vector<double> counts;
  std::uint64_t n_pulses = 0;
  std::uint64_t detected = 0;

  double bin_centre_ns(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width_ns; }
  double total() const;
};

/// Pulsed excitation, single-stop detection on one detector. The per-pulse
/// detection probability matches the CW signal rate times the period; the
/// delay after each pulse is exponential with the excited-state lifetime and
/// arrivals later than one period wrap into the next window.
TcspcHistogram simulate_tcspc(const EmitterConfig& cfg, double pulse_period_ns, std::uint64_t n_pulses,
                              double bin_width_ns = 0.1);

struct IonizationConfig {
  double two_photon_coefficient = 0.0; // ionisations per s per nW at full excited-state population
  double recovery_coefficient = 0.0;   // recoveries per s per uW of green light
  double green_power_uw = 0.0;
};

struct DiffusionConfig {
  double jump_rate_hz = 0.0;
  double jump_sigma_mhz = 0.0; // line centre re-drawn from N(0, sigma) at each jump
};

struct PLEScanConfig {
  double start_ghz = -0.2;
  double stop_ghz = 0.2;
  double step_ghz = 0.001;
  double speed_ghz_per_s = 0.1;
  double homogeneous_fwhm_mhz = 18.0;
  double on_resonance_rate_cps = 20e3;
  double dark_rate_cps = 250.0;
  double resonant_power_nw = 0.2;
  IonizationConfig ionization;
  DiffusionConfig diffusion;
  bool shot_noise = true;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

enum class ChargeState : std::uint8_t { negative = 0, neutral = 1 };

struct PLEPoint {
  double detuning_ghz = 0.0;
  double count_rate_cps = 0.0;
  double expected_rate_cps = 0.0; // noise-free rate given the realised charge/diffusion history
  ChargeState charge = ChargeState::negative; // at the end of the step
  double line_centre_ghz = 0.0;
};

struct PLETrace {
  std::vector<PLEPoint> points;
  double dwell_s = 0.0;
  /// Index of the first step ending in the neutral state, if any.
  std::optional<std::size_t> first_ionization() const;
};

PLETrace simulate_ple_scan(const PLEScanConfig& cfg);

/// Expected number of ionisation events for one pass over the full line
/// at the configured resonant power (ignores diffusion).
double expected_ionizations_per_pass(const PLEScanConfig& cfg);

void to_json(nlohmann::json& j, const EmitterConfig& c);
void from_json(const nlohmann::json& j, EmitterConfig& c);
void to_json(nlohmann::json& j, const PLEScanConfig& c);
void from_json(const nlohmann::json& j, PLEScanConfig& c);

} // namespace snv
