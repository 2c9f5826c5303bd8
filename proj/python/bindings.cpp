#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "snv/depth.hpp"
#include "snv/levels.hpp"
#include "snv/photon_analysis.hpp"
#include "snv/photon_sim.hpp"
#include "snv/spectral_fit.hpp"
#include "snv/temp_laws.hpp"
#include "snv/units.hpp"
#include "snv/voigt.hpp"

namespace py = pybind11;

namespace {

// results cross the boundary as plain dicts via their JSON form
py::object to_py(const nlohmann::json& j) {
  const py::object loads = py::module_::import("json").attr("loads");
  return loads(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  const py::object dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(o).cast<std::string>());
}

snv::EmitterConfig emitter_from(const py::dict& kw) { return from_py(kw).get<snv::EmitterConfig>(); }

snv::TempSeries series_from(const std::vector<double>& t, const std::vector<std::optional<double>>& v,
                            const std::vector<std::optional<double>>& err, int which) {
  if (v.size() != t.size() || (!err.empty() && err.size() != t.size()))
    throw std::invalid_argument("temperature, value and error lists must have equal length");
  snv::TempSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    snv::TempPoint p;
    p.t_k = t[i];
    const auto e = err.empty() ? std::nullopt : err[i];
    if (which == 0) p.linewidth_ghz = v[i], p.linewidth_err = e;
    if (which == 1) p.shift_ghz = v[i], p.shift_err = e;
    if (which == 2) p.dw = v[i], p.dw_err = e;
    s.entries.push_back(p);
  }
  return s;
}

} // namespace

PYBIND11_MODULE(_snv, m) {
  m.doc() = "SnV- photophysics simulation and analysis";
  m.attr("__version__") = SNV_VERSION;

  m.def("convert", [](double value, const std::string& from, const std::string& to) {
    return snv::convert({value, snv::energy_unit_from_string(from)}, snv::energy_unit_from_string(to)).value;
  }, py::arg("value"), py::arg("from_unit"), py::arg("to_unit"));
  m.def("fourier_limit_mhz", &snv::fourier_limit_mhz, py::arg("lifetime_ns"));
  m.def("dw_factor", [](double s, double tc, double t) { return snv::dw_factor({s, tc}, t); },
        py::arg("huang_rhys_s"), py::arg("t_cutoff_k"), py::arg("temperature_k"));
  m.def("boltzmann_upper_fraction", [](double t) {
    return snv::boltzmann_upper_fraction(snv::LevelStructure::snv_default(), t);
  }, py::arg("temperature_k"));
  m.def("transition_table", []() {
    py::list out;
    for (const auto& l : snv::transition_table(snv::LevelStructure::snv_default()))
      out.append(py::dict(py::arg("frequency_ghz") = l.frequency_ghz, py::arg("energy_ev") = l.energy_ev,
                          py::arg("wavelength_nm") = l.wavelength_nm));
    return out;
  });

  m.def("voigt_profile", &snv::voigt_profile, py::arg("x"), py::arg("fwhm_lorentz"), py::arg("fwhm_gauss"));
  m.def("voigt_fwhm", &snv::voigt_fwhm, py::arg("fwhm_lorentz"), py::arg("fwhm_gauss"));

  m.def("simulate_stream", [](const py::dict& config) {
    const auto s = snv::simulate_stream(emitter_from(config));
    std::vector<std::int64_t> t;
    std::vector<int> ch;
    t.reserve(s.records.size());
    ch.reserve(s.records.size());
    for (const auto& r : s.records) {
      t.push_back(r.timestamp_ps);
      ch.push_back(r.channel);
    }
    return py::make_tuple(t, ch, s.duration_ps);
  }, py::arg("config"), "Returns (timestamps_ps, channels, duration_ps). Config keys as in the JSON config.");

  m.def("g2_histogram", [](const std::vector<std::int64_t>& t, const std::vector<int>& ch, std::int64_t duration_ps,
                           double bin_ns, double window_ns) {
    if (t.size() != ch.size()) throw std::invalid_argument("timestamps and channels differ in length");
    snv::PhotonStream s;
    s.duration_ps = duration_ps;
    for (std::size_t i = 0; i < t.size(); ++i) s.records.push_back({t[i], static_cast<std::uint8_t>(ch[i])});
    return to_py(snv::g2_histogram(s, bin_ns, window_ns));
  }, py::arg("timestamps_ps"), py::arg("channels"), py::arg("duration_ps") = 0, py::arg("bin_ns") = 0.5,
     py::arg("window_ns") = 100.0);

  m.def("fit_g2", [](const std::vector<double>& tau, const std::vector<double>& g2, const std::vector<double>& err) {
    snv::CorrelationCurve c;
    c.tau_ns = tau;
    c.g2 = g2;
    c.error = err;
    if (tau.size() >= 2) c.bin_width_ns = tau[1] - tau[0];
    return to_py(snv::fit_g2(c));
  }, py::arg("tau_ns"), py::arg("g2"), py::arg("error") = std::vector<double>{});

  m.def("simulate_tcspc", [](const py::dict& config, double period_ns, std::uint64_t pulses, double bin_ns) {
    return to_py(snv::simulate_tcspc(emitter_from(config), period_ns, pulses, bin_ns));
  }, py::arg("config"), py::arg("period_ns") = 100.0, py::arg("pulses") = 1000000, py::arg("bin_ns") = 0.1);

  m.def("fit_lifetime", [](const std::vector<double>& counts, double bin_ns, bool background) {
    snv::TcspcHistogram h;
    h.bin_width_ns = bin_ns;
    h.counts = counts;
    return to_py(snv::fit_lifetime(h, {background}));
  }, py::arg("counts"), py::arg("bin_ns"), py::arg("fit_background") = true);

  m.def("fit_saturation", [](const std::vector<double>& p, const std::vector<double>& r, bool linear) {
    if (p.size() != r.size()) throw std::invalid_argument("power and rate lists differ in length");
    std::vector<snv::SaturationPoint> pts;
    for (std::size_t i = 0; i < p.size(); ++i) pts.push_back({p[i], r[i]});
    return to_py(snv::fit_saturation(pts, {linear, {}}));
  }, py::arg("power_uw"), py::arg("rate_cps"), py::arg("linear_background") = false);

  m.def("fit_polarization", [](const std::vector<double>& a, const std::vector<double>& c, double dark) {
    return to_py(snv::fit_polarization({a, c, dark}));
  }, py::arg("angles_deg"), py::arg("counts_cps"), py::arg("dark_cps") = 0.0);

  m.def("fit_a2u_resonance", [](const std::vector<double>& e, const std::vector<double>& y) {
    if (e.size() != y.size()) throw std::invalid_argument("energy and response lists differ in length");
    std::vector<snv::ExcitationPoint> pts;
    for (std::size_t i = 0; i < e.size(); ++i) pts.push_back({e[i], y[i]});
    return to_py(snv::fit_a2u_resonance(pts));
  }, py::arg("energy_ev"), py::arg("response"));

  m.def("find_psb_peaks", [](const std::vector<double>& wl, const std::vector<double>& counts, double zpl_nm) {
    return to_py(snv::find_psb_peaks(snv::Spectrum(wl, counts), zpl_nm));
  }, py::arg("wavelength_nm"), py::arg("counts"), py::arg("zpl_nm"));

  m.def("fit_linewidth_series", [](const std::vector<double>& t, const std::vector<std::optional<double>>& v,
                                   const std::vector<std::optional<double>>& err, const std::string& model,
                                   bool fit_offset) {
    return to_py(snv::fit_linewidth_series(series_from(t, v, err, 0), snv::linewidth_model_from_string(model),
                                           {fit_offset, 0.0}));
  }, py::arg("t_k"), py::arg("linewidth_ghz"), py::arg("error") = std::vector<std::optional<double>>{},
     py::arg("model") = "T3", py::arg("fit_offset") = false);

  m.def("fit_dw_series", [](const std::vector<double>& t, const std::vector<std::optional<double>>& v,
                            const std::vector<std::optional<double>>& err) {
    return to_py(snv::fit_dw_series(series_from(t, v, err, 2)));
  }, py::arg("t_k"), py::arg("dw"), py::arg("error") = std::vector<std::optional<double>>{});

  m.def("invert_thermometer", [](const py::dict& law, double value, double error, double confidence) {
    const auto r = snv::invert_thermometer(snv::Observable::linewidth, value, from_py(law).get<snv::FitResult>(),
                                           {error, confidence, {}});
    return py::dict(py::arg("temperature_k") = r.t_k, py::arg("sigma_k") = r.sigma_k, py::arg("ci_low_k") = r.ci_low_k,
                    py::arg("ci_high_k") = r.ci_high_k);
  }, py::arg("law"), py::arg("linewidth_ghz"), py::arg("error") = 0.0, py::arg("confidence") = 0.95);

  m.def("depth_from_countrate", [](double reference, double rate, double mean, double sigma) {
    return snv::depth_from_countrate(snv::normalize_profile(reference, mean, sigma), rate);
  }, py::arg("reference_cps"), py::arg("rate_cps"), py::arg("mean_nm") = 168.0, py::arg("sigma_nm") = 30.0);
}
