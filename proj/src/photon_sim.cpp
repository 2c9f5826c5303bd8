#include "snv/photon_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace snv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

constexpr double kPsPerS = 1e12;

std::int64_t to_ps(double seconds) {
  const double ps = seconds * kPsPerS;
  if (!(ps < 9.0e18)) return std::numeric_limits<std::int64_t>::max() / 2;
  return static_cast<std::int64_t>(std::llround(ps));
}

double exp_sample(std::mt19937_64& rng, double rate) {
  return std::exponential_distribution<double>(rate)(rng);
}

double band_fraction(const EmitterConfig& c) {
  switch (c.band) {
  case DetectionBand::all: return 1.0;
  case DetectionBand::zpl: return dw_factor(c.dw, c.temperature_k);
  case DetectionBand::psb: return 1.0 - dw_factor(c.dw, c.temperature_k);
  }
  return 1.0;
}

std::uint64_t poisson_sample(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::poisson_distribution<long long>(mean)(rng));
}

} // namespace

void EmitterConfig::validate() const {
  level.validate();
  dw.validate();
  if (excitation_power_uw < 0 || saturation_power_uw <= 0 || max_rate_cps < 0 || dark_rate_cps < 0 ||
      duration_s < 0 || temperature_k < 0)
    throw std::invalid_argument("EmitterConfig: powers, rates and duration must be >= 0 (P_sat > 0)");
}

double EmitterConfig::signal_rate_cps() const {
  const double p = excitation_power_uw;
  if (p <= 0.0) return 0.0;
  return max_rate_cps * p / (p + saturation_power_uw) * band_fraction(*this);
}

double EmitterConfig::pump_rate_hz() const {
  return excitation_power_uw / saturation_power_uw / (level.excited_lifetime_ns * 1e-9);
}

double EmitterConfig::antibunching_time_ns() const {
  const double decay = 1.0 / (level.excited_lifetime_ns * 1e-9);
  return 1e9 / (pump_rate_hz() + decay);
}

StreamGenerator::StreamGenerator(const EmitterConfig& cfg)
    : emitter_rng_(substream(cfg.rng_seed, 0)), route_rng_(substream(cfg.rng_seed, 1)),
      dark_rng_{substream(cfg.rng_seed, 2), substream(cfg.rng_seed, 3)} {
  cfg.validate();
  if (cfg.duration_s * kPsPerS > 4.0e18) throw std::length_error("simulate_stream: duration overflows the ps time base");
  duration_ps_ = to_ps(cfg.duration_s);
  decay_hz_ = 1.0 / (cfg.level.excited_lifetime_ns * 1e-9);
  pump_hz_ = cfg.pump_rate_hz();
  const double signal = cfg.signal_rate_cps();
  if (pump_hz_ > 0.0 && signal > 0.0) {
    const double emission = decay_hz_ * pump_hz_ / (pump_hz_ + decay_hz_);
    detect_prob_ = signal / emission;
    if (detect_prob_ > 1.0)
      throw std::invalid_argument("EmitterConfig: max_rate exceeds the radiative limit 1/lifetime");
    emitter_on_ = true;
  }
  dark_hz_ = cfg.dark_rate_cps;
  advance_emitter();
  advance_dark(0);
  advance_dark(1);
}

void StreamGenerator::advance_emitter() {
  if (!emitter_on_) {
    next_emitter_ = std::numeric_limits<std::int64_t>::max();
    return;
  }
  // Thinned renewal process: a detected photon follows a geometric number of
  // emission cycles, each cycle = Exp(pump) + Exp(decay).
  double cycles = 1.0;
  if (detect_prob_ < 1.0) {
    cycles += static_cast<double>(std::geometric_distribution<long long>(detect_prob_)(emitter_rng_));
  }
  const double wait = std::gamma_distribution<double>(cycles, 1.0 / pump_hz_)(emitter_rng_) +
                      std::gamma_distribution<double>(cycles, 1.0 / decay_hz_)(emitter_rng_);
  next_emitter_ += to_ps(wait);
}

void StreamGenerator::advance_dark(int ch) {
  if (!(dark_hz_ > 0.0)) {
    next_dark_[ch] = std::numeric_limits<std::int64_t>::max();
    return;
  }
  next_dark_[ch] += to_ps(exp_sample(dark_rng_[ch], dark_hz_));
}

std::optional<PhotonRecord> StreamGenerator::next() {
  const std::int64_t t = std::min({next_emitter_, next_dark_[0], next_dark_[1]});
  if (t >= duration_ps_) return std::nullopt;
  PhotonRecord r{t, 0};
  if (t == next_emitter_) {
    r.channel = static_cast<std::uint8_t>(route_rng_() >> 63);
    advance_emitter();
  } else if (t == next_dark_[0]) {
    advance_dark(0);
  } else {
    r.channel = 1;
    advance_dark(1);
  }
  return r;
}

PhotonStream simulate_stream(const EmitterConfig& cfg, std::size_t max_records) {
  const double expected = (cfg.signal_rate_cps() + 2.0 * cfg.dark_rate_cps) * cfg.duration_s;
  if (!(expected < static_cast<double>(max_records)))
    throw std::length_error("simulate_stream: expected record count exceeds limit");
  StreamGenerator gen(cfg);
  PhotonStream out;
  out.duration_ps = gen.duration_ps();
  out.records.reserve(static_cast<std::size_t>(expected * 1.01 + 16));
  while (auto r = gen.next()) out.records.push_back(*r);
  return out;
}

double TcspcHistogram::total() const {
  double s = 0.0;
  for (double c : counts) s += c;
  return s;
}

TcspcHistogram simulate_tcspc(const EmitterConfig& cfg, double pulse_period_ns, std::uint64_t n_pulses,
                              double bin_width_ns) {
  cfg.validate();
  if (!(pulse_period_ns > 0.0) || !(bin_width_ns > 0.0))
    throw std::invalid_argument("simulate_tcspc: period and bin width must be > 0");
  TcspcHistogram h;
  h.bin_width_ns = bin_width_ns;
  h.n_pulses = n_pulses;
  const auto n_bins = static_cast<std::size_t>(std::ceil(pulse_period_ns / bin_width_ns - 1e-9));
  h.counts.assign(n_bins, 0.0);

  auto rng = substream(cfg.rng_seed, 7);
  const double tau = cfg.level.excited_lifetime_ns;
  const double p_signal = std::min(1.0, cfg.signal_rate_cps() * pulse_period_ns * 1e-9);
  const double p_dark = -std::expm1(-cfg.dark_rate_cps * pulse_period_ns * 1e-9);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> decay(1.0 / tau);

  for (std::uint64_t k = 0; k < n_pulses; ++k) {
    double t = std::numeric_limits<double>::infinity();
    if (p_signal > 0.0 && uni(rng) < p_signal) t = std::fmod(decay(rng), pulse_period_ns);
    if (p_dark > 0.0 && uni(rng) < p_dark) t = std::min(t, uni(rng) * pulse_period_ns);
    if (std::isfinite(t)) {
      const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(t / bin_width_ns));
      h.counts[bin] += 1.0;
      ++h.detected;
    }
  }
  return h;
}

void PLEScanConfig::validate() const {
  if (!(stop_ghz > start_ghz)) throw std::invalid_argument("PLEScanConfig: stop must exceed start");
  if (!(speed_ghz_per_s > 0.0)) throw std::invalid_argument("PLEScanConfig: speed must be > 0");
  if (!(step_ghz > 0.0)) throw std::invalid_argument("PLEScanConfig: step must be > 0");
  if (!(homogeneous_fwhm_mhz > 0.0)) throw std::invalid_argument("PLEScanConfig: linewidth must be > 0");
  if (ionization.two_photon_coefficient < 0 || ionization.recovery_coefficient < 0 ||
      ionization.green_power_uw < 0)
    throw std::invalid_argument("IonizationConfig: coefficients must be >= 0");
  if (diffusion.jump_rate_hz < 0 || diffusion.jump_sigma_mhz < 0)
    throw std::invalid_argument("DiffusionConfig: rate and sigma must be >= 0");
  if (on_resonance_rate_cps < 0 || dark_rate_cps < 0 || resonant_power_nw < 0)
    throw std::invalid_argument("PLEScanConfig: rates and power must be >= 0");
}

std::optional<std::size_t> PLETrace::first_ionization() const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].charge == ChargeState::neutral) return i;
  return std::nullopt;
}

double expected_ionizations_per_pass(const PLEScanConfig& cfg) {
  const double hwhm_ghz = 0.5e-3 * cfg.homogeneous_fwhm_mhz;
  // integral over time of the Lorentzian lineshape for a linear sweep
  const double exposure_s = constants::pi * hwhm_ghz / cfg.speed_ghz_per_s;
  return cfg.ionization.two_photon_coefficient * cfg.resonant_power_nw * exposure_s;
}

PLETrace simulate_ple_scan(const PLEScanConfig& cfg) {
  cfg.validate();
  auto rng = substream(cfg.rng_seed, 11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double hwhm = 0.5e-3 * cfg.homogeneous_fwhm_mhz;
  const double sigma_ghz = 1e-3 * cfg.diffusion.jump_sigma_mhz;
  const double ion_k = cfg.ionization.two_photon_coefficient * cfg.resonant_power_nw;
  const double rec_k = cfg.ionization.recovery_coefficient * cfg.ionization.green_power_uw;
  const double jump_k = cfg.diffusion.jump_rate_hz;

  auto lineshape = [&](double delta) {
    const double x = delta / hwhm;
    return 1.0 / (1.0 + x * x);
  };
  auto draw = [&](double rate) {
    return rate > 0.0 ? exp_sample(rng, rate) : std::numeric_limits<double>::infinity();
  };
  auto redraw_centre = [&]() { return sigma_ghz > 0.0 ? sigma_ghz * gauss(rng) : 0.0; };

  PLETrace trace;
  const double dwell = cfg.step_ghz / cfg.speed_ghz_per_s;
  trace.dwell_s = dwell;
  const auto n = static_cast<std::size_t>(std::llround((cfg.stop_ghz - cfg.start_ghz) / cfg.step_ghz)) + 1;
  trace.points.reserve(n);

  ChargeState charge = ChargeState::negative;
  double centre = jump_k > 0.0 ? redraw_centre() : 0.0;
  double to_jump = draw(jump_k);

  for (std::size_t i = 0; i < n; ++i) {
    const double laser = cfg.start_ghz + static_cast<double>(i) * cfg.step_ghz;
    double remaining = dwell;
    double bright = 0.0; // integral of the lineshape over time spent in SnV-
    while (remaining > 0.0) {
      double seg = std::min(remaining, to_jump);
      if (charge == ChargeState::negative) {
        const double l = lineshape(laser - centre);
        const double t_ion = draw(ion_k * l);
        if (t_ion < seg) {
          bright += l * t_ion;
          seg = t_ion;
          charge = ChargeState::neutral;
        } else {
          bright += l * seg;
        }
      } else {
        const double t_rec = draw(rec_k);
        if (t_rec < seg) {
          seg = t_rec;
          charge = ChargeState::negative;
          centre = redraw_centre();
        }
      }
      remaining -= seg;
      to_jump -= seg;
      if (to_jump <= 0.0) {
        centre = redraw_centre();
        to_jump = draw(jump_k);
      }
    }
    const double mean_counts = cfg.on_resonance_rate_cps * bright + cfg.dark_rate_cps * dwell;
    const double counts = cfg.shot_noise ? static_cast<double>(poisson_sample(rng, mean_counts)) : mean_counts;
    trace.points.push_back({laser, counts / dwell, mean_counts / dwell, charge, centre});
  }
  return trace;
}

namespace {
std::string band_name(DetectionBand b) {
  switch (b) {
  case DetectionBand::zpl: return "zpl";
  case DetectionBand::psb: return "psb";
  default: return "all";
  }
}
DetectionBand band_from(const std::string& s) {
  if (s == "all") return DetectionBand::all;
  if (s == "zpl") return DetectionBand::zpl;
  if (s == "psb") return DetectionBand::psb;
  throw std::invalid_argument("unknown detection band '" + s + "'");
}
} // namespace

void to_json(nlohmann::json& j, const EmitterConfig& c) {
  j = {{"level", c.level},
       {"excitation_power_uw", c.excitation_power_uw},
       {"saturation_power_uw", c.saturation_power_uw},
       {"max_rate_cps", c.max_rate_cps},
       {"dark_rate_cps", c.dark_rate_cps},
       {"dw", c.dw},
       {"temperature_k", c.temperature_k},
       {"duration_s", c.duration_s},
       {"rng_seed", c.rng_seed},
       {"band", band_name(c.band)}};
}

void from_json(const nlohmann::json& j, EmitterConfig& c) {
  EmitterConfig d;
  c.level = j.contains("level") ? j.at("level").get<LevelStructure>() : d.level;
  c.excitation_power_uw = j.value("excitation_power_uw", d.excitation_power_uw);
  c.saturation_power_uw = j.value("saturation_power_uw", d.saturation_power_uw);
  c.max_rate_cps = j.value("max_rate_cps", d.max_rate_cps);
  c.dark_rate_cps = j.value("dark_rate_cps", d.dark_rate_cps);
  c.dw = j.contains("dw") ? j.at("dw").get<DWParams>() : d.dw;
  c.temperature_k = j.value("temperature_k", d.temperature_k);
  c.duration_s = j.value("duration_s", d.duration_s);
  c.rng_seed = j.value("rng_seed", d.rng_seed);
  c.band = band_from(j.value("band", std::string("all")));
  c.validate();
}

void to_json(nlohmann::json& j, const PLEScanConfig& c) {
  j = {{"start_ghz", c.start_ghz},
       {"stop_ghz", c.stop_ghz},
       {"step_ghz", c.step_ghz},
       {"speed_ghz_per_s", c.speed_ghz_per_s},
       {"homogeneous_fwhm_mhz", c.homogeneous_fwhm_mhz},
       {"on_resonance_rate_cps", c.on_resonance_rate_cps},
       {"dark_rate_cps", c.dark_rate_cps},
       {"resonant_power_nw", c.resonant_power_nw},
       {"ionization",
        {{"two_photon_coefficient", c.ionization.two_photon_coefficient},
         {"recovery_coefficient", c.ionization.recovery_coefficient},
         {"green_power_uw", c.ionization.green_power_uw}}},
       {"diffusion", {{"jump_rate_hz", c.diffusion.jump_rate_hz}, {"jump_sigma_mhz", c.diffusion.jump_sigma_mhz}}},
       {"shot_noise", c.shot_noise},
       {"rng_seed", c.rng_seed}};
}

void from_json(const nlohmann::json& j, PLEScanConfig& c) {
  PLEScanConfig d;
  c.start_ghz = j.value("start_ghz", d.start_ghz);
  c.stop_ghz = j.value("stop_ghz", d.stop_ghz);
  c.step_ghz = j.value("step_ghz", d.step_ghz);
  c.speed_ghz_per_s = j.value("speed_ghz_per_s", d.speed_ghz_per_s);
  c.homogeneous_fwhm_mhz = j.value("homogeneous_fwhm_mhz", d.homogeneous_fwhm_mhz);
  c.on_resonance_rate_cps = j.value("on_resonance_rate_cps", d.on_resonance_rate_cps);
  c.dark_rate_cps = j.value("dark_rate_cps", d.dark_rate_cps);
  c.resonant_power_nw = j.value("resonant_power_nw", d.resonant_power_nw);
  if (j.contains("ionization")) {
    const auto& ion = j.at("ionization");
    c.ionization.two_photon_coefficient = ion.value("two_photon_coefficient", 0.0);
    c.ionization.recovery_coefficient = ion.value("recovery_coefficient", 0.0);
    c.ionization.green_power_uw = ion.value("green_power_uw", 0.0);
  }
  if (j.contains("diffusion")) {
    const auto& df = j.at("diffusion");
    c.diffusion.jump_rate_hz = df.value("jump_rate_hz", 0.0);
    c.diffusion.jump_sigma_mhz = df.value("jump_sigma_mhz", 0.0);
  }
  c.shot_noise = j.value("shot_noise", d.shot_noise);
  c.rng_seed = j.value("rng_seed", d.rng_seed);
  c.validate();
}

} // namespace snv
