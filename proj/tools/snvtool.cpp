// snvtool: simulate, analyse and fit SnV- photophysics data.
//
// Exit codes: 0 success, 1 input or analysis failure, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "snv/depth.hpp"
#include "snv/io.hpp"
#include "snv/levels.hpp"
#include "snv/manifest.hpp"
#include "snv/photon_analysis.hpp"
#include "snv/photon_sim.hpp"
#include "snv/quantity.hpp"
#include "snv/spectral_fit.hpp"
#include "snv/temp_laws.hpp"
#include "snv/units.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double q(const std::string& text, snv::Dimension dim, const char* flag) {
  try {
    return snv::parse_quantity(text, dim);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

std::pair<double, double> qrange(const std::string& text, snv::Dimension dim, const char* flag, bool bare = false) {
  try {
    return snv::parse_range(text, dim, bare);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

// Energy-like position given either as a wavelength or a photon energy.
double position_ev(const std::string& text, const char* flag) {
  try {
    return snv::nm_to_ev(snv::parse_quantity(text, snv::Dimension::length_nm));
  } catch (const std::invalid_argument&) {
  }
  try {
    return snv::parse_quantity(text, snv::Dimension::energy_ev);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": expected a wavelength or an energy, " + e.what());
  }
}

json parse_json_file(const std::string& path) {
  const std::string text = snv::read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw snv::ParseError(path, line, col, "invalid JSON");
  }
}

std::string fmt(const json& v) { return v.dump(); }

// Human-readable rendering of a result document. Numbers are printed with
// the same text as the JSON output.
void render(std::ostream& os, const json& j, const std::string& indent = "");

bool is_fit(const json& j) { return j.is_object() && j.contains("params") && j.contains("names"); }

void render_fit(std::ostream& os, const json& j, const std::string& indent) {
  os << indent << "model " << j.value("model", std::string()) << "\n";
  std::size_t w = 12;
  for (const auto& n : j.at("names")) w = std::max(w, n.get<std::string>().size());
  for (const auto& [k, v] : j.at("derived").items()) w = std::max(w, k.size());
  os << indent << std::left << std::setw(static_cast<int>(w + 2)) << "parameter" << std::setw(24) << "value"
     << "error\n";
  for (const auto& n : j.at("names")) {
    const auto& p = j.at("params").at(n.get<std::string>());
    os << indent << std::setw(static_cast<int>(w + 2)) << n.get<std::string>() << std::setw(24) << fmt(p.at("value"))
       << fmt(p.at("error")) << "\n";
  }
  for (const char* k : {"chi2", "reduced_chi2", "dof", "n_iterations", "converged"})
    os << indent << std::setw(static_cast<int>(w + 2)) << k << fmt(j.at(k)) << "\n";
  if (j.contains("domain")) os << indent << std::setw(static_cast<int>(w + 2)) << "domain" << fmt(j.at("domain")) << "\n";
  if (!j.at("derived").empty())
    for (const auto& [k, v] : j.at("derived").items())
      os << indent << std::setw(static_cast<int>(w + 2)) << k << fmt(v) << "\n";
  os << indent << std::setw(static_cast<int>(w + 2)) << "flags" << fmt(j.at("flags")) << "\n";
}

void render(std::ostream& os, const json& j, const std::string& indent) {
  if (is_fit(j)) {
    render_fit(os, j, indent);
    return;
  }
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      os << indent << k << ":\n";
      render(os, v, indent + "  ");
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      os << indent << k << ": " << v.size() << " entries\n";
      std::size_t i = 0;
      for (const auto& e : v) {
        os << indent << "  [" << i++ << "]\n";
        render(os, e, indent + "    ");
      }
    } else if (v.is_array() && v.size() > 12) {
      os << indent << std::left << std::setw(27) << k << " [" << v.size() << " values, see JSON/CSV]\n";
    } else {
      os << indent << std::left << std::setw(27) << k << " " << fmt(v) << "\n";
    }
  }
}

struct Common {
  bool json_mode = false;
  std::string out;
  std::string config;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_prefix) {
  c.out = default_prefix;
  sub->add_flag("--json", c.json_mode, "Print the result as JSON instead of a table");
  sub->add_option("-o,--out", c.out, "Output path prefix (files <prefix>.json, <prefix>.manifest.json, ...)")
      ->capture_default_str();
  sub->add_option("--config", c.config, "JSON configuration file");
}

// One CLI invocation: collects provenance and writes outputs.
class Run {
public:
  Run(std::string command, const Common& common, std::vector<std::string> args)
      : command_(std::move(command)), common_(common), args_(std::move(args)) {}

  // Explicit --config, else $SNV_CONFIG_DIR/<command>.json, else empty.
  json load_config() {
    std::string path = common_.config;
    if (path.empty()) {
      if (const char* dir = std::getenv("SNV_CONFIG_DIR")) {
        const fs::path p = fs::path(dir) / (command_ + ".json");
        if (fs::exists(p)) path = p.string();
      }
    }
    if (path.empty()) return json::object();
    inputs_.push_back(path);
    return parse_json_file(path);
  }

  void input(const std::string& path) { inputs_.push_back(path); }
  std::string output(const std::string& suffix) {
    const std::string p = common_.out + suffix;
    ensure_parent(p);
    outputs_.push_back(p);
    return p;
  }

  int finish(const json& result, const json& effective_config, std::optional<std::uint64_t> seed = std::nullopt) {
    const std::string result_path = output(".json");
    snv::write_text_file(result_path, result.dump(2) + "\n");
    auto m = snv::make_manifest(command_, args_, effective_config);
    m.seed = seed;
    for (const auto& i : inputs_) m.add_input(i);
    for (const auto& o : outputs_) m.add_output(o);
    const std::string mpath = common_.out + ".manifest.json";
    snv::write_text_file(mpath, json(m).dump(2) + "\n");
    if (common_.json_mode)
      std::cout << result.dump(2) << "\n";
    else
      render(std::cout, result);
    return 0;
  }

private:
  static void ensure_parent(const std::string& p) {
    const auto parent = fs::path(p).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
  }

  std::string command_;
  Common common_;
  std::vector<std::string> args_;
  std::vector<std::string> inputs_, outputs_;
};

// Options shared by the CW and pulsed emitter simulations.
struct EmitterOpts {
  std::string lifetime, power, psat, max_rate, dark, temperature, duration, band, zpl;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* sub) {
    sub->add_option("--lifetime", lifetime, "Excited-state lifetime, e.g. 7.61ns");
    sub->add_option("--power", power, "Excitation power, e.g. 100uW");
    sub->add_option("--psat", psat, "Saturation power, e.g. 200uW");
    sub->add_option("--max-rate", max_rate, "Detected rate at infinite power, e.g. 120kcps");
    sub->add_option("--dark", dark, "Dark rate per detector, e.g. 250cps");
    sub->add_option("--temperature", temperature, "Sample temperature, e.g. 5K");
    sub->add_option("--duration", duration, "Acquisition time, e.g. 10s");
    sub->add_option("--band", band, "Detection band: all, zpl or psb")->check(CLI::IsMember({"all", "zpl", "psb"}));
    sub->add_option("--zpl", zpl, "ZPL wavelength, e.g. 619.7nm");
    sub->add_option("--seed", seed, "RNG seed");
  }

  snv::EmitterConfig build(const json& config) const {
    snv::EmitterConfig c = config.empty() ? snv::EmitterConfig{} : config.get<snv::EmitterConfig>();
    using D = snv::Dimension;
    if (!lifetime.empty()) c.level.excited_lifetime_ns = q(lifetime, D::time_ns, "--lifetime");
    if (!power.empty()) c.excitation_power_uw = q(power, D::power_uw, "--power");
    if (!psat.empty()) c.saturation_power_uw = q(psat, D::power_uw, "--psat");
    if (!max_rate.empty()) c.max_rate_cps = q(max_rate, D::rate_hz, "--max-rate");
    if (!dark.empty()) c.dark_rate_cps = q(dark, D::rate_hz, "--dark");
    if (!temperature.empty()) c.temperature_k = q(temperature, D::temperature_k, "--temperature");
    if (!duration.empty()) c.duration_s = q(duration, D::time_ns, "--duration") * 1e-9;
    if (!zpl.empty()) c.level.zpl_wavelength_nm = q(zpl, D::length_nm, "--zpl");
    if (!band.empty()) {
      json j = c;
      j["band"] = band;
      c = j.get<snv::EmitterConfig>();
    }
    if (seed) c.rng_seed = *seed;
    c.validate();
    return c;
  }
};

std::vector<snv::SaturationPoint> saturation_points(const std::string& path) {
  std::vector<snv::SaturationPoint> pts;
  for (const auto& [p, r] : snv::read_xy_csv(path)) pts.push_back({p, r});
  return pts;
}

json fit_json(const snv::FitResult& f) { return f; }

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"SnV- photophysics simulator and analysis toolkit"};
  app.set_version_flag("--version", SNV_VERSION);
  app.require_subcommand(1);
  std::vector<std::string> args(argv + 1, argv + argc);

  // sim-stream
  Common c_stream;
  EmitterOpts e_stream;
  std::string stream_format = "bin";
  auto* sim_stream = app.add_subcommand("sim-stream", "Simulate a two-detector CW photon stream");
  add_common(sim_stream, c_stream, "stream");
  e_stream.add(sim_stream);
  sim_stream->add_option("--format", stream_format, "bin (packed u64+u8) or csv")
      ->check(CLI::IsMember({"bin", "csv"}))
      ->capture_default_str();

  // sim-ple
  Common c_ple;
  std::string ple_start, ple_stop, ple_step, ple_speed, ple_fwhm, ple_rate, ple_dark, ple_power, ple_green,
      ple_jump_rate, ple_jump_sigma;
  std::optional<double> ple_ion, ple_recovery;
  std::optional<std::uint64_t> ple_seed;
  bool ple_no_noise = false;
  auto* sim_ple = app.add_subcommand("sim-ple", "Simulate a resonant PLE scan with ionisation and spectral diffusion");
  add_common(sim_ple, c_ple, "ple");
  sim_ple->add_option("--start", ple_start, "Start detuning, e.g. -0.2GHz");
  sim_ple->add_option("--stop", ple_stop, "Stop detuning, e.g. 0.2GHz");
  sim_ple->add_option("--step", ple_step, "Detuning step, e.g. 1MHz");
  sim_ple->add_option("--speed", ple_speed, "Scan speed, e.g. 0.1GHz/s");
  sim_ple->add_option("--fwhm", ple_fwhm, "Homogeneous linewidth, e.g. 18MHz");
  sim_ple->add_option("--rate", ple_rate, "On-resonance count rate, e.g. 20kcps");
  sim_ple->add_option("--dark", ple_dark, "Dark rate, e.g. 250cps");
  sim_ple->add_option("--power", ple_power, "Resonant laser power, e.g. 0.2nW");
  sim_ple->add_option("--ion-coefficient", ple_ion, "Ionisations per s per nW at full excitation");
  sim_ple->add_option("--recovery-coefficient", ple_recovery, "Recoveries per s per uW of green light");
  sim_ple->add_option("--green", ple_green, "Green repump power, e.g. 5uW");
  sim_ple->add_option("--jump-rate", ple_jump_rate, "Spectral jump rate, e.g. 50Hz");
  sim_ple->add_option("--jump-sigma", ple_jump_sigma, "Spread of the line centre, e.g. 240MHz");
  sim_ple->add_flag("--no-shot-noise", ple_no_noise, "Report expected rates without Poisson noise");
  sim_ple->add_option("--seed", ple_seed, "RNG seed");

  // sim-tcspc
  Common c_tcspc;
  EmitterOpts e_tcspc;
  std::string tcspc_period = "100ns", tcspc_bin = "0.1ns";
  std::uint64_t tcspc_pulses = 1'000'000;
  auto* sim_tcspc = app.add_subcommand("sim-tcspc", "Simulate a pulsed TCSPC delay histogram");
  add_common(sim_tcspc, c_tcspc, "tcspc");
  e_tcspc.add(sim_tcspc);
  sim_tcspc->add_option("--period", tcspc_period, "Pulse period")->capture_default_str();
  sim_tcspc->add_option("--pulses", tcspc_pulses, "Number of excitation pulses")->capture_default_str();
  sim_tcspc->add_option("--bin", tcspc_bin, "Histogram bin width")->capture_default_str();

  // g2
  Common c_g2;
  std::string g2_in, g2_bin = "0.5ns", g2_window = "100ns", g2_duration;
  bool g2_no_fit = false;
  auto* g2 = app.add_subcommand("g2", "Cross-correlate detector 0 and 1 and fit the antibunching dip");
  add_common(g2, c_g2, "g2");
  g2->add_option("input", g2_in, "Photon stream (.bin or .csv)")->required()->check(CLI::ExistingFile);
  g2->add_option("--bin", g2_bin, "Bin width")->capture_default_str();
  g2->add_option("--window", g2_window, "Half-width of the delay window")->capture_default_str();
  g2->add_option("--duration", g2_duration, "Acquisition time (default: last timestamp)");
  g2->add_flag("--no-fit", g2_no_fit, "Only build the histogram");

  // lifetime
  Common c_life;
  std::string life_in;
  bool life_no_bg = false;
  auto* lifetime = app.add_subcommand("lifetime", "Fit a TCSPC histogram with A exp(-t/tau) + B");
  add_common(lifetime, c_life, "lifetime");
  lifetime->add_option("input", life_in, "Histogram CSV (bin_center_ns, counts)")->required()->check(CLI::ExistingFile);
  lifetime->add_flag("--no-background", life_no_bg, "Fix B = 0");

  // saturation
  Common c_sat;
  std::string sat_in;
  bool sat_linear = false;
  auto* saturation = app.add_subcommand("saturation", "Fit R(P) = I_inf P/(P + P_sat) + m P");
  add_common(saturation, c_sat, "saturation");
  saturation->add_option("input", sat_in, "CSV (power_uw, rate_cps)")->required()->check(CLI::ExistingFile);
  saturation->add_flag("--linear-background", sat_linear, "Fit the linear background m");

  // polarization
  Common c_pol;
  std::string pol_in, pol_dark = "0cps";
  auto* polarization = app.add_subcommand("polarization", "Fit a half-wave-plate rotation scan");
  add_common(polarization, c_pol, "polarization");
  polarization->add_option("input", pol_in, "CSV (plate_angle_deg, rate_cps)")->required()->check(CLI::ExistingFile);
  polarization->add_option("--dark", pol_dark, "Dark rate subtracted before fitting")->capture_default_str();

  // spectrum-fit
  Common c_sf;
  std::string sf_in, sf_instrument = "10GHz", sf_fwhm = "15GHz", sf_kind = "voigt", sf_range, sf_auto, sf_seeds;
  std::vector<std::string> sf_peaks;
  bool sf_fit_gauss = false, sf_baseline = false;
  auto* spectrum_fit = app.add_subcommand("spectrum-fit", "Fit Voigt/Lorentzian/Gaussian peaks to a spectrum");
  add_common(spectrum_fit, c_sf, "spectrum-fit");
  spectrum_fit->add_option("input", sf_in, "Spectrum CSV (wavelength_nm, counts)")->required()->check(CLI::ExistingFile);
  spectrum_fit->add_option("--instrument", sf_instrument, "Gaussian instrument FWHM")->capture_default_str();
  spectrum_fit->add_option("--peak", sf_peaks, "Seed centre (repeatable), e.g. 619.7nm or 2.0007eV");
  spectrum_fit->add_option("--fwhm", sf_fwhm, "Seed Lorentzian FWHM")->capture_default_str();
  spectrum_fit->add_option("--kind", sf_kind, "Peak shape")
      ->check(CLI::IsMember({"voigt", "lorentzian", "gaussian"}))
      ->capture_default_str();
  spectrum_fit->add_option("--seeds", sf_seeds, "JSON array of peak seeds")->check(CLI::ExistingFile);
  spectrum_fit->add_option("--auto", sf_auto, "Auto-seed prominent maxima in lo:hi, e.g. 610nm:625nm");
  spectrum_fit->add_option("--range", sf_range, "Only fit samples in lo:hi");
  spectrum_fit->add_flag("--fit-gauss", sf_fit_gauss, "Refine the Gaussian width of Voigt peaks");
  spectrum_fit->add_flag("--baseline", sf_baseline, "Fit a constant baseline");

  // dw
  Common c_dw;
  std::string dw_in, dw_zpl = "610nm:625nm", dw_psb = "625nm:740nm", dw_instrument = "10GHz";
  double dw_prominence = 0.01;
  auto* dw = app.add_subcommand("dw", "Debye-Waller factor from a PL spectrum");
  add_common(dw, c_dw, "dw");
  dw->add_option("input", dw_in, "Spectrum CSV (wavelength_nm, counts)")->required()->check(CLI::ExistingFile);
  dw->add_option("--zpl-window", dw_zpl, "ZPL window lo:hi (nm)")->capture_default_str();
  dw->add_option("--psb-window", dw_psb, "Sideband window lo:hi (nm)")->capture_default_str();
  dw->add_option("--instrument", dw_instrument, "Gaussian instrument FWHM")->capture_default_str();
  dw->add_option("--prominence", dw_prominence, "Relative prominence for auto-seeding")->capture_default_str();

  // dw-series
  Common c_dws;
  std::string dws_in;
  auto* dw_series = app.add_subcommand("dw-series", "Fit DW(T) = exp(-S (1 + 2 pi^2/3 T^2/Tc^2))");
  add_common(dw_series, c_dws, "dw-series");
  dw_series->add_option("input", dws_in, "Temperature series CSV")->required()->check(CLI::ExistingFile);

  // temp-fit
  Common c_tf;
  std::string tf_in, tf_observable = "linewidth", tf_model = "T3", tf_offset = "0K";
  bool tf_fit_offset = false;
  auto* temp_fit = app.add_subcommand("temp-fit", "Fit a linewidth or line-shift temperature law");
  add_common(temp_fit, c_tf, "temp-fit");
  temp_fit->add_option("input", tf_in, "Temperature series CSV")->required()->check(CLI::ExistingFile);
  temp_fit->add_option("--observable", tf_observable, "linewidth or shift")
      ->check(CLI::IsMember({"linewidth", "shift"}))
      ->capture_default_str();
  temp_fit->add_option("--model", tf_model, "Linewidth model T3, T_plus_T3, T3_plus_T5 or all")
      ->check(CLI::IsMember({"T3", "T_plus_T3", "T3_plus_T5", "all"}))
      ->capture_default_str();
  temp_fit->add_flag("--fit-offset", tf_fit_offset, "Fit a shared temperature offset T0");
  temp_fit->add_option("--offset", tf_offset, "Initial (or fixed) temperature offset")->capture_default_str();

  // thermo
  Common c_th;
  std::string th_law, th_lw, th_shift, th_err = "0GHz", th_range;
  double th_conf = 0.95;
  auto* thermo = app.add_subcommand("thermo", "Invert a fitted temperature law");
  add_common(thermo, c_th, "thermo");
  thermo->add_option("--law", th_law, "Law JSON written by temp-fit")->required()->check(CLI::ExistingFile);
  auto* o_lw = thermo->add_option("--linewidth", th_lw, "Measured linewidth, e.g. 120GHz");
  auto* o_sh = thermo->add_option("--shift", th_shift, "Measured line shift, e.g. -20GHz");
  o_lw->excludes(o_sh);
  thermo->add_option("--error", th_err, "1 sigma uncertainty of the measurement")->capture_default_str();
  thermo->add_option("--confidence", th_conf, "Confidence level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  thermo->add_option("--range", th_range, "Monotone temperature range lo:hi (required for shift)");

  // psb
  Common c_psb;
  std::string psb_in, psb_zpl, psb_tol = "2meV", psb_min = "15meV", psb_max = "220meV", psb_table;
  int psb_window = 9, psb_order = 3;
  double psb_prominence = 0.02;
  auto* psb = app.add_subcommand("psb", "Find phonon-sideband peaks and match them to a reference table");
  add_common(psb, c_psb, "psb");
  psb->add_option("input", psb_in, "Spectrum CSV (wavelength_nm, counts)")->required()->check(CLI::ExistingFile);
  psb->add_option("--zpl", psb_zpl, "ZPL position (default: brightest sample)");
  psb->add_option("--smooth-window", psb_window, "Savitzky-Golay window (odd, <= 1 disables)")->capture_default_str();
  psb->add_option("--smooth-order", psb_order, "Savitzky-Golay polynomial order")->capture_default_str();
  psb->add_option("--prominence", psb_prominence, "Relative prominence threshold")->capture_default_str();
  psb->add_option("--tolerance", psb_tol, "Match tolerance")->capture_default_str();
  psb->add_option("--min-offset", psb_min, "Smallest offset searched")->capture_default_str();
  psb->add_option("--max-offset", psb_max, "Largest offset searched")->capture_default_str();
  psb->add_option("--table", psb_table, "Reference table JSON {reference, offsets_mev}")->check(CLI::ExistingFile);

  // mirror
  Common c_mir;
  std::string mir_in, mir_zpl;
  auto* mirror = app.add_subcommand("mirror", "Mirror a PL spectrum about the ZPL on the energy axis");
  add_common(mirror, c_mir, "mirror");
  mirror->add_option("input", mir_in, "Spectrum CSV (wavelength_nm, counts)")->required()->check(CLI::ExistingFile);
  mirror->add_option("--zpl", mir_zpl, "ZPL position, e.g. 619.7nm or 2.0007eV")->required();

  // a2u
  Common c_a2u;
  std::string a2u_in;
  auto* a2u = app.add_subcommand("a2u", "Fit the broad excitation resonance with a Lorentzian plus constant");
  add_common(a2u, c_a2u, "a2u");
  a2u->add_option("input", a2u_in, "CSV (excitation_ev, zpl_response)")->required()->check(CLI::ExistingFile);

  // depth
  Common c_depth;
  std::string d_ref, d_mean, d_sigma, d_anchor = "wing", d_profile;
  std::vector<std::string> d_rates;
  double d_fraction = 0.01;
  auto* depth = app.add_subcommand("depth", "Ensemble depth from count rates and an implantation profile");
  add_common(depth, c_depth, "depth");
  depth->add_option("--reference", d_ref, "Count rate of the unremoved region, e.g. 20Mcps");
  depth->add_option("--mean", d_mean, "Profile maximum depth, e.g. 168nm");
  depth->add_option("--sigma", d_sigma, "Profile straggle, e.g. 30nm");
  depth->add_option("--rate", d_rates, "Measured count rate (repeatable)")->required();
  depth->add_option("--anchor", d_anchor, "wing or peak")->check(CLI::IsMember({"wing", "peak"}))->capture_default_str();
  depth->add_option("--fraction", d_fraction, "Wing level relative to the maximum")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  depth->add_option("--profile", d_profile, "Tabulated profile CSV (depth_nm, density)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  using D = snv::Dimension;
  try {
    if (*sim_stream) {
      Run run("sim-stream", c_stream, args);
      const auto cfg = e_stream.build(run.load_config());
      std::uint64_t n[2] = {0, 0};
      std::string path;
      if (stream_format == "bin") {
        path = run.output(".bin");
        snv::StreamWriter w(path);
        snv::StreamGenerator gen(cfg);
        while (auto r = gen.next()) {
          w.write(*r);
          ++n[r->channel];
        }
      } else {
        path = run.output(".csv");
        const auto s = snv::simulate_stream(cfg);
        snv::write_stream_csv(path, s);
        n[0] = s.count(0);
        n[1] = s.count(1);
      }
      json result = {{"stream", path},
                     {"format", stream_format},
                     {"duration_s", cfg.duration_s},
                     {"records", n[0] + n[1]},
                     {"channel0", n[0]},
                     {"channel1", n[1]},
                     {"measured_rate_cps", static_cast<double>(n[0] + n[1]) / cfg.duration_s},
                     {"expected_signal_rate_cps", cfg.signal_rate_cps()},
                     {"expected_total_rate_cps", cfg.signal_rate_cps() + 2.0 * cfg.dark_rate_cps},
                     {"antibunching_time_ns", cfg.antibunching_time_ns()},
                     {"config", cfg}};
      return run.finish(result, json(cfg), cfg.rng_seed);
    }

    if (*sim_ple) {
      Run run("sim-ple", c_ple, args);
      const json conf = run.load_config();
      snv::PLEScanConfig cfg = conf.empty() ? snv::PLEScanConfig{} : conf.get<snv::PLEScanConfig>();
      if (!ple_start.empty()) cfg.start_ghz = q(ple_start, D::frequency_ghz, "--start");
      if (!ple_stop.empty()) cfg.stop_ghz = q(ple_stop, D::frequency_ghz, "--stop");
      if (!ple_step.empty()) cfg.step_ghz = q(ple_step, D::frequency_ghz, "--step");
      if (!ple_speed.empty()) cfg.speed_ghz_per_s = q(ple_speed, D::scan_speed_ghz_s, "--speed");
      if (!ple_fwhm.empty()) cfg.homogeneous_fwhm_mhz = q(ple_fwhm, D::frequency_ghz, "--fwhm") * 1e3;
      if (!ple_rate.empty()) cfg.on_resonance_rate_cps = q(ple_rate, D::rate_hz, "--rate");
      if (!ple_dark.empty()) cfg.dark_rate_cps = q(ple_dark, D::rate_hz, "--dark");
      if (!ple_power.empty()) cfg.resonant_power_nw = q(ple_power, D::power_uw, "--power") * 1e3;
      if (ple_ion) cfg.ionization.two_photon_coefficient = *ple_ion;
      if (ple_recovery) cfg.ionization.recovery_coefficient = *ple_recovery;
      if (!ple_green.empty()) cfg.ionization.green_power_uw = q(ple_green, D::power_uw, "--green");
      if (!ple_jump_rate.empty()) cfg.diffusion.jump_rate_hz = q(ple_jump_rate, D::rate_hz, "--jump-rate");
      if (!ple_jump_sigma.empty())
        cfg.diffusion.jump_sigma_mhz = q(ple_jump_sigma, D::frequency_ghz, "--jump-sigma") * 1e3;
      if (ple_no_noise) cfg.shot_noise = false;
      if (ple_seed) cfg.rng_seed = *ple_seed;
      cfg.validate();
      const auto trace = snv::simulate_ple_scan(cfg);
      const std::string csv = run.output(".csv");
      snv::write_ple_csv(csv, trace);
      double mean = 0.0;
      for (const auto& p : trace.points) mean += p.count_rate_cps;
      if (!trace.points.empty()) mean /= static_cast<double>(trace.points.size());
      json result = {{"trace", csv},
                     {"points", trace.points.size()},
                     {"dwell_s", trace.dwell_s},
                     {"mean_rate_cps", mean},
                     {"expected_ionizations_per_pass", snv::expected_ionizations_per_pass(cfg)},
                     {"ionized", trace.first_ionization().has_value()},
                     {"ends_neutral",
                      !trace.points.empty() && trace.points.back().charge == snv::ChargeState::neutral},
                     {"config", cfg}};
      if (const auto i = trace.first_ionization()) result["first_ionization_ghz"] = trace.points[*i].detuning_ghz;
      return run.finish(result, json(cfg), cfg.rng_seed);
    }

    if (*sim_tcspc) {
      Run run("sim-tcspc", c_tcspc, args);
      const auto cfg = e_tcspc.build(run.load_config());
      const double period = q(tcspc_period, D::time_ns, "--period");
      const double bin = q(tcspc_bin, D::time_ns, "--bin");
      const auto h = snv::simulate_tcspc(cfg, period, tcspc_pulses, bin);
      const std::string csv = run.output(".csv");
      snv::write_histogram_csv(csv, h);
      json conf = {{"emitter", cfg}, {"period_ns", period}, {"pulses", tcspc_pulses}, {"bin_ns", bin}};
      json result = {{"histogram", csv},
                     {"bins", h.counts.size()},
                     {"bin_width_ns", h.bin_width_ns},
                     {"pulses", h.n_pulses},
                     {"detected", h.detected},
                     {"config", conf}};
      return run.finish(result, conf, cfg.rng_seed);
    }

    if (*g2) {
      Run run("g2", c_g2, args);
      run.input(g2_in);
      const double bin = q(g2_bin, D::time_ns, "--bin");
      const double window = q(g2_window, D::time_ns, "--window");
      snv::G2Accumulator acc(bin, window);
      std::int64_t last = 0;
      if (g2_in.size() >= 4 && g2_in.compare(g2_in.size() - 4, 4, ".csv") == 0) {
        const auto s = snv::read_stream_csv(g2_in);
        for (const auto& r : s.records) acc.add(r);
        last = s.effective_duration_ps();
      } else {
        std::size_t i = 0;
        snv::for_each_record(g2_in, [&](const snv::PhotonRecord& r) {
          if (r.timestamp_ps < last)
            throw snv::ParseError(g2_in, 0, 0, "timestamps decrease at record " + std::to_string(i));
          last = r.timestamp_ps;
          acc.add(r);
          ++i;
        });
      }
      const std::int64_t duration =
          g2_duration.empty() ? last : static_cast<std::int64_t>(std::llround(q(g2_duration, D::time_ns, "--duration") * 1e3));
      const auto curve = acc.finish(duration);
      const std::string csv = run.output(".csv");
      snv::write_curve_csv(csv, curve);
      json conf = {{"bin_ns", bin}, {"window_ns", window}, {"duration_ps", duration}};
      json result = {{"correlation", csv},
                     {"bins", curve.tau_ns.size()},
                     {"bin_width_ns", curve.bin_width_ns},
                     {"normalization", curve.normalization},
                     {"rate0_cps", curve.rate0_cps},
                     {"rate1_cps", curve.rate1_cps}};
      if (!g2_no_fit) result["fit"] = fit_json(snv::fit_g2(curve));
      return run.finish(result, conf);
    }

    if (*lifetime) {
      Run run("lifetime", c_life, args);
      run.input(life_in);
      const auto h = snv::read_histogram_csv(life_in);
      snv::LifetimeFitOptions opt;
      opt.fit_background = !life_no_bg;
      return run.finish(fit_json(snv::fit_lifetime(h, opt)), {{"fit_background", opt.fit_background}});
    }

    if (*saturation) {
      Run run("saturation", c_sat, args);
      run.input(sat_in);
      const auto pts = saturation_points(sat_in);
      snv::SaturationOptions opt;
      opt.fit_linear_background = sat_linear;
      return run.finish(fit_json(snv::fit_saturation(pts, opt)), {{"fit_linear_background", sat_linear}});
    }

    if (*polarization) {
      Run run("polarization", c_pol, args);
      run.input(pol_in);
      snv::PolarizationScan scan;
      for (const auto& [a, r] : snv::read_xy_csv(pol_in)) {
        scan.angles_deg.push_back(a);
        scan.counts_cps.push_back(r);
      }
      scan.dark_rate_cps = q(pol_dark, D::rate_hz, "--dark");
      return run.finish(fit_json(snv::fit_polarization(scan)), {{"dark_rate_cps", scan.dark_rate_cps}});
    }

    if (*spectrum_fit) {
      Run run("spectrum-fit", c_sf, args);
      run.input(sf_in);
      const double instrument = q(sf_instrument, D::frequency_ghz, "--instrument");
      const auto s = snv::read_spectrum_csv(sf_in, instrument);
      std::vector<snv::PeakModel> seeds;
      if (!sf_seeds.empty()) {
        run.input(sf_seeds);
        seeds = parse_json_file(sf_seeds).get<std::vector<snv::PeakModel>>();
      }
      for (const auto& p : sf_peaks) {
        snv::PeakModel m = json{{"kind", sf_kind}, {"center_ev", position_ev(p, "--peak")}}.get<snv::PeakModel>();
        m.fwhm_lorentz_ghz = q(sf_fwhm, D::frequency_ghz, "--fwhm");
        m.fit_gauss = sf_fit_gauss;
        if (m.kind == snv::PeakKind::gaussian) m.fwhm_gauss_ghz = m.fwhm_lorentz_ghz;
        seeds.push_back(m);
      }
      if (!sf_auto.empty()) {
        const auto [lo, hi] = qrange(sf_auto, D::length_nm, "--auto", true);
        for (const auto& m : snv::auto_seed_peaks(s, lo, hi, 0.02, sf_fit_gauss)) seeds.push_back(m);
      }
      if (seeds.empty()) throw UsageError("spectrum-fit: give --peak, --seeds or --auto");
      snv::PeakFitOptions opt;
      opt.fit_baseline = sf_baseline;
      if (!sf_range.empty()) opt.range_nm = qrange(sf_range, D::length_nm, "--range", true);
      const auto res = snv::fit_peaks(s, seeds, opt);
      const std::string csv = run.output(".csv");
      const auto model = snv::render_peaks(s.wavelength_nm(), res.peaks, res.baseline);
      snv::write_columns_csv(csv, {"wavelength_nm", "counts", "model"},
                             {{s.wavelength_nm().begin(), s.wavelength_nm().end()},
                              {s.counts().begin(), s.counts().end()},
                              model});
      json conf = {{"instrument_fwhm_ghz", instrument}, {"seeds", seeds}, {"fit_baseline", sf_baseline}};
      if (opt.range_nm) conf["range_nm"] = {opt.range_nm->first, opt.range_nm->second};
      json result = {{"peaks", res.peaks}, {"baseline", res.baseline}, {"model_csv", csv}, {"fit", res.fit}};
      return run.finish(result, conf);
    }

    if (*dw) {
      Run run("dw", c_dw, args);
      run.input(dw_in);
      const double instrument = q(dw_instrument, D::frequency_ghz, "--instrument");
      const auto s = snv::read_spectrum_csv(dw_in, instrument);
      snv::DebyeWallerOptions opt;
      const auto zw = qrange(dw_zpl, D::length_nm, "--zpl-window", true);
      const auto pw = qrange(dw_psb, D::length_nm, "--psb-window", true);
      opt.zpl = {zw.first, zw.second};
      opt.psb = {pw.first, pw.second};
      opt.relative_prominence = dw_prominence;
      const auto res = snv::debye_waller(s, opt);
      json conf = {{"zpl_window_nm", {zw.first, zw.second}},
                   {"psb_window_nm", {pw.first, pw.second}},
                   {"instrument_fwhm_ghz", instrument},
                   {"relative_prominence", dw_prominence}};
      return run.finish(json(res), conf);
    }

    if (*dw_series) {
      Run run("dw-series", c_dws, args);
      run.input(dws_in);
      return run.finish(fit_json(snv::fit_dw_series(snv::read_temp_series_csv(dws_in))), json::object());
    }

    if (*temp_fit) {
      Run run("temp-fit", c_tf, args);
      run.input(tf_in);
      const auto series = snv::read_temp_series_csv(tf_in);
      snv::SeriesFitOptions opt;
      opt.fit_offset = tf_fit_offset;
      opt.initial_offset_k = q(tf_offset, D::temperature_k, "--offset");
      json conf = {{"observable", tf_observable},
                   {"model", tf_model},
                   {"fit_offset", opt.fit_offset},
                   {"initial_offset_k", opt.initial_offset_k}};
      if (tf_observable == "shift") return run.finish(fit_json(snv::fit_shift_series(series, opt)), conf);
      if (tf_model == "all") {
        json arr = json::array();
        for (const auto& f : snv::compare_linewidth_models(series, opt)) arr.push_back(f);
        return run.finish({{"comparison", arr}}, conf);
      }
      return run.finish(
          fit_json(snv::fit_linewidth_series(series, snv::linewidth_model_from_string(tf_model), opt)), conf);
    }

    if (*thermo) {
      Run run("thermo", c_th, args);
      run.input(th_law);
      if (th_lw.empty() == th_shift.empty()) throw UsageError("thermo: give exactly one of --linewidth or --shift");
      json lj = parse_json_file(th_law);
      if (lj.contains("law")) lj = lj.at("law");
      if (lj.contains("comparison")) throw UsageError("thermo: law file holds a model comparison, fit one model");
      const auto law = lj.get<snv::FitResult>();
      const auto obs = th_lw.empty() ? snv::Observable::shift : snv::Observable::linewidth;
      const double value = th_lw.empty() ? q(th_shift, D::frequency_ghz, "--shift")
                                         : q(th_lw, D::frequency_ghz, "--linewidth");
      snv::InversionOptions opt;
      opt.value_error = q(th_err, D::frequency_ghz, "--error");
      opt.confidence = th_conf;
      if (!th_range.empty()) opt.range_k = qrange(th_range, D::temperature_k, "--range");
      const auto r = snv::invert_thermometer(obs, value, law, opt);
      json conf = {{"observable", th_lw.empty() ? "shift" : "linewidth"},
                   {"value_ghz", value},
                   {"value_error_ghz", opt.value_error},
                   {"confidence", opt.confidence}};
      if (opt.range_k) conf["range_k"] = {opt.range_k->first, opt.range_k->second};
      json result = {{"temperature_k", r.t_k},
                     {"sigma_k", r.sigma_k},
                     {"ci_low_k", r.ci_low_k},
                     {"ci_high_k", r.ci_high_k},
                     {"confidence", r.confidence},
                     {"law_model", law.model}};
      return run.finish(result, conf);
    }

    if (*psb) {
      Run run("psb", c_psb, args);
      run.input(psb_in);
      const auto s = snv::read_spectrum_csv(psb_in);
      snv::PsbOptions opt;
      opt.smoothing = {psb_window, psb_order};
      opt.relative_prominence = psb_prominence;
      opt.match_tolerance_mev = q(psb_tol, D::energy_ev, "--tolerance") * 1e3;
      opt.min_offset_mev = q(psb_min, D::energy_ev, "--min-offset") * 1e3;
      opt.max_offset_mev = q(psb_max, D::energy_ev, "--max-offset") * 1e3;
      if (!psb_table.empty()) {
        run.input(psb_table);
        opt.table = parse_json_file(psb_table).get<snv::PSBTable>();
      }
      double zpl_nm;
      if (psb_zpl.empty()) {
        const auto c = s.counts();
        zpl_nm = s.wavelength_nm()[static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin())];
      } else {
        zpl_nm = snv::ev_to_nm(position_ev(psb_zpl, "--zpl"));
      }
      const auto rep = snv::find_psb_peaks(s, zpl_nm, opt);
      json conf = {{"zpl_nm", zpl_nm},
                   {"smooth_window", psb_window},
                   {"smooth_order", psb_order},
                   {"relative_prominence", psb_prominence},
                   {"match_tolerance_mev", opt.match_tolerance_mev},
                   {"offset_range_mev", {opt.min_offset_mev, opt.max_offset_mev}},
                   {"reference_offsets_mev", opt.table.offsets_mev}};
      json result = rep;
      result["zpl_nm"] = zpl_nm;
      return run.finish(result, conf);
    }

    if (*mirror) {
      Run run("mirror", c_mir, args);
      run.input(mir_in);
      const auto s = snv::read_spectrum_csv(mir_in);
      const double zpl = position_ev(mir_zpl, "--zpl");
      const auto m = snv::mirror_spectrum(s, zpl);
      const std::string csv = run.output(".csv");
      snv::write_columns_csv(csv, {"energy_ev", "intensity_per_ev"},
                             {{m.energy_ev().begin(), m.energy_ev().end()},
                              {m.intensity().begin(), m.intensity().end()}});
      json result = {{"mirrored", csv},
                     {"zpl_ev", zpl},
                     {"samples", m.size()},
                     {"energy_range_ev", {m.energy_ev().front(), m.energy_ev().back()}}};
      return run.finish(result, {{"zpl_ev", zpl}});
    }

    if (*a2u) {
      Run run("a2u", c_a2u, args);
      run.input(a2u_in);
      std::vector<snv::ExcitationPoint> pts;
      for (const auto& [e, r] : snv::read_xy_csv(a2u_in)) pts.push_back({e, r});
      return run.finish(fit_json(snv::fit_a2u_resonance(pts)), json::object());
    }

    if (*depth) {
      Run run("depth", c_depth, args);
      const json conf_in = run.load_config();
      snv::DepthOptions opt;
      opt.anchor = d_anchor == "peak" ? snv::DepthAnchor::peak : snv::DepthAnchor::deep_wing;
      opt.wing_fraction = d_fraction;
      std::vector<double> rates;
      for (const auto& r : d_rates) rates.push_back(q(r, D::rate_hz, "--rate"));
      json estimates = json::array();
      json conf = {{"anchor", d_anchor}, {"wing_fraction", d_fraction}};
      json result;
      if (!d_profile.empty()) {
        run.input(d_profile);
        if (d_ref.empty()) throw UsageError("depth: --profile needs --reference");
        const double ref = q(d_ref, D::rate_hz, "--reference");
        std::vector<double> z, rho;
        for (const auto& [a, b] : snv::read_xy_csv(d_profile)) {
          z.push_back(a);
          rho.push_back(b);
        }
        const snv::EmpiricalProfile prof(z, rho, ref);
        for (double r : rates) {
          json e = prof.estimate(r, opt);
          e["rate_cps"] = r;
          estimates.push_back(e);
        }
        conf["reference_cps"] = ref;
        result = {{"profile", "tabulated"}, {"peak_depth_nm", prof.peak_depth()}};
      } else {
        snv::ImplantProfile p = conf_in.empty() ? snv::ImplantProfile{} : conf_in.get<snv::ImplantProfile>();
        if (conf_in.empty() && d_ref.empty()) throw UsageError("depth: --reference is required");
        if (!d_ref.empty()) p.total_amplitude_cps = q(d_ref, D::rate_hz, "--reference");
        if (!d_mean.empty()) p.mean_depth_nm = q(d_mean, D::length_nm, "--mean");
        const bool sigma_given = !d_sigma.empty() || conf_in.contains("straggle_sigma_nm");
        if (!d_sigma.empty()) p.straggle_sigma_nm = q(d_sigma, D::length_nm, "--sigma");
        p = snv::normalize_profile(p.total_amplitude_cps, p.mean_depth_nm, p.straggle_sigma_nm);
        for (double r : rates) {
          json e = snv::estimate_depth(p, r, opt);
          e["rate_cps"] = r;
          estimates.push_back(e);
        }
        conf["profile"] = p;
        result = {{"profile", p}, {"wing_depth_nm", snv::wing_depth(p, d_fraction)}};
        if (!sigma_given) result["sigma_is_placeholder"] = true;
      }
      result["estimates"] = estimates;
      return run.finish(result, conf);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const snv::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
