#include "snv/spectral_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "snv/voigt.hpp"

namespace snv {

double PeakModel::density(double e_ev) const {
  const double x = e_ev - center_ev;
  const double fl = ghz_to_ev(fwhm_lorentz_ghz);
  const double fg = ghz_to_ev(fwhm_gauss_ghz);
  switch (kind) {
  case PeakKind::lorentzian: return area * lorentzian_profile(x, fl);
  case PeakKind::gaussian: return area * gaussian_profile(x, fg);
  case PeakKind::voigt: return area * voigt_profile(x, fl, fg);
  }
  return 0.0;
}

std::vector<double> render_peaks(std::span<const double> grid_nm, std::span<const PeakModel> peaks,
                                 double baseline) {
  std::vector<double> out(grid_nm.size(), baseline);
  for (std::size_t i = 0; i < grid_nm.size(); ++i) {
    const double lam = grid_nm[i];
    const double e = constants::hc_ev_nm / lam;
    const double jac = constants::hc_ev_nm / (lam * lam);
    for (const auto& p : peaks) out[i] += p.density(e) * jac;
  }
  return out;
}

PeakFitResult fit_peaks(const Spectrum& s, std::span<const PeakModel> seeds, const PeakFitOptions& options) {
  if (seeds.empty()) throw std::invalid_argument("fit_peaks: no seeds");
  std::vector<double> lam, y, sigma;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double l = s.wavelength_nm()[i];
    if (options.range_nm && (l < options.range_nm->first || l > options.range_nm->second)) continue;
    lam.push_back(l);
    y.push_back(s.counts()[i]);
    sigma.push_back(std::sqrt(std::max(s.counts()[i], 1.0)));
  }
  if (lam.size() < 4) throw std::invalid_argument("fit_peaks: too few samples in range");
  const double e_min = nm_to_ev(lam.back()), e_max = nm_to_ev(lam.front());
  const auto n = lam.size();
  std::vector<double> e(n), jac(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = constants::hc_ev_nm / lam[i];
    jac[i] = constants::hc_ev_nm / (lam[i] * lam[i]);
  }

  std::vector<PeakModel> base(seeds.begin(), seeds.end());
  FitProblem pb;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < base.size(); ++k) {
    auto& pk = base[k];
    if (pk.center_ev < e_min || pk.center_ev > e_max)
      throw std::invalid_argument("fit_peaks: seed centre outside the fitted grid");
    if (pk.kind == PeakKind::voigt && pk.fwhm_gauss_ghz <= 0.0) pk.fwhm_gauss_ghz = s.instrument_fwhm_ghz();
    if (pk.kind == PeakKind::lorentzian) pk.fwhm_gauss_ghz = 0.0;
    if (pk.kind == PeakKind::gaussian) pk.fwhm_lorentz_ghz = 0.0;
    const std::string tag = "peak" + std::to_string(k) + "_";
    const double width = std::max(pk.fwhm_lorentz_ghz, pk.fwhm_gauss_ghz);
    if (!(width > 0.0)) throw std::invalid_argument("fit_peaks: seed widths must be > 0");
    pb.names.insert(pb.names.end(), {tag + "shift_ghz", tag + "fwhm_lorentz_ghz", tag + "fwhm_gauss_ghz", tag + "area"});
    pb.initial.insert(pb.initial.end(), {0.0, pk.fwhm_lorentz_ghz, pk.fwhm_gauss_ghz, std::max(pk.area, 0.0)});
    const double span_ghz = ev_to_ghz(e_max - e_min);
    pb.lower.insert(pb.lower.end(), {-span_ghz, 1e-9 * width, 1e-9 * width, 0.0});
    pb.upper.insert(pb.upper.end(), {span_ghz, inf, inf, inf});
    const bool fix_l = pk.kind == PeakKind::gaussian;
    const bool fix_g = pk.kind == PeakKind::lorentzian || (pk.kind == PeakKind::voigt && !pk.fit_gauss);
    pb.fixed.insert(pb.fixed.end(), {false, fix_l, fix_g, false});
    pb.step_scale.insert(pb.step_scale.end(), {width, std::max(pk.fwhm_lorentz_ghz, 1e-3 * width),
                                               std::max(pk.fwhm_gauss_ghz, 1e-3 * width), std::max(pk.area, 1e-300)});
  }
  const std::size_t n_peak_params = pb.names.size();
  double ymax = *std::max_element(y.begin(), y.end());
  pb.names.push_back("baseline");
  pb.initial.push_back(0.0);
  pb.lower.push_back(-inf);
  pb.upper.push_back(inf);
  pb.fixed.push_back(!options.fit_baseline);
  pb.step_scale.push_back(std::max(1e-3 * ymax, 1e-12));

  auto build = [&](std::span<const double> p, std::vector<PeakModel>& out) {
    out = base;
    for (std::size_t k = 0; k < base.size(); ++k) {
      out[k].center_ev = base[k].center_ev + ghz_to_ev(p[4 * k]);
      out[k].fwhm_lorentz_ghz = p[4 * k + 1];
      out[k].fwhm_gauss_ghz = p[4 * k + 2];
      out[k].area = p[4 * k + 3];
    }
  };
  std::vector<PeakModel> scratch;
  pb.model = [&](std::span<const double> p, std::span<double> out) {
    build(p, scratch);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (const auto& pk : scratch) v += pk.density(e[i]);
      out[i] = v * jac[i] + p[n_peak_params];
    }
  };
  pb.y = y;
  pb.sigma = sigma;

  PeakFitResult result;
  result.fit = levenberg_marquardt(pb);
  result.fit.model = "peaks";
  result.fit.domain_min = lam.front();
  result.fit.domain_max = lam.back();
  build(result.fit.values, result.peaks);
  result.baseline = result.fit.values[n_peak_params];
  for (std::size_t k = 0; k < result.peaks.size(); ++k)
    result.fit.derived.emplace_back("peak" + std::to_string(k) + "_center_ev", result.peaks[k].center_ev);

  for (std::size_t a = 0; a < result.peaks.size(); ++a)
    for (std::size_t b = a + 1; b < result.peaks.size(); ++b) {
      const auto& pa = result.peaks[a];
      const auto& pbk = result.peaks[b];
      const double w = std::max(voigt_fwhm_estimate(pa.fwhm_lorentz_ghz, pa.fwhm_gauss_ghz),
                                voigt_fwhm_estimate(pbk.fwhm_lorentz_ghz, pbk.fwhm_gauss_ghz));
      if (std::abs(ev_to_ghz(pa.center_ev - pbk.center_ev)) < 0.25 * w) result.fit.add_flag("overlapping_peaks");
    }
  return result;
}

std::vector<double> savitzky_golay(std::span<const double> y, const SmoothingOptions& opt) {
  std::vector<double> out(y.begin(), y.end());
  if (opt.window <= 1) return out;
  if (opt.window % 2 == 0) throw std::invalid_argument("savitzky_golay: window must be odd");
  if (opt.order >= opt.window) throw std::invalid_argument("savitzky_golay: order must be < window");
  const int half = opt.window / 2;
  if (y.size() < static_cast<std::size_t>(opt.window)) return out;
  Eigen::MatrixXd a(opt.window, opt.order + 1);
  for (int i = -half; i <= half; ++i)
    for (int j = 0; j <= opt.order; ++j) a(i + half, j) = std::pow(static_cast<double>(i), j);
  const Eigen::MatrixXd pinv = (a.transpose() * a).inverse() * a.transpose();
  const Eigen::VectorXd c = pinv.row(0).transpose();
  for (std::size_t i = static_cast<std::size_t>(half); i + static_cast<std::size_t>(half) < y.size(); ++i) {
    double v = 0.0;
    for (int k = -half; k <= half; ++k) v += c[k + half] * y[static_cast<std::size_t>(static_cast<long>(i) + k)];
    out[i] = v;
  }
  return out;
}

std::vector<LocalPeak> find_local_peaks(std::span<const double> y, double min_prominence) {
  std::vector<LocalPeak> peaks;
  const auto n = y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    // plateau: require a strict drop after equal neighbours
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) {
      i = j;
      continue;
    }
    const double h = y[i];
    double left_min = h;
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > h) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = h;
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > h) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prom = h - std::max(left_min, right_min);
    if (prom >= min_prominence && prom > 0.0) peaks.push_back({(i + j) / 2, h, prom});
    i = j;
  }
  return peaks;
}

namespace {

struct EnergySlice {
  std::vector<double> e, y; // ascending energy, density per eV
};

EnergySlice slice_energy(const Spectrum& s, double lo_nm, double hi_nm) {
  EnergySlice out;
  for (std::size_t i = s.size(); i-- > 0;) {
    const double lam = s.wavelength_nm()[i];
    if (lam < lo_nm || lam > hi_nm) continue;
    out.e.push_back(constants::hc_ev_nm / lam);
    out.y.push_back(s.counts()[i] * lam * lam / constants::hc_ev_nm);
  }
  return out;
}

// vertex of the parabola through three (x, y) points
double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double d = (x0 - x1) * (x0 - x2) * (x1 - x2);
  if (d == 0.0) return x1;
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d;
  if (a >= 0.0) return x1;
  const double v = -b / (2.0 * a);
  return std::clamp(v, std::min(x0, x2), std::max(x0, x2));
}

} // namespace

std::vector<PeakModel> auto_seed_peaks(const Spectrum& s, double lo_nm, double hi_nm, double relative_prominence,
                                       bool fit_gauss, const SmoothingOptions& smoothing) {
  const EnergySlice sl = slice_energy(s, lo_nm, hi_nm);
  std::vector<PeakModel> seeds;
  if (sl.e.size() < 3) return seeds;
  const auto sm = savitzky_golay(sl.y, smoothing);
  const double top = *std::max_element(sm.begin(), sm.end());
  if (!(top > 0.0)) return seeds;
  const double instrument_ev = ghz_to_ev(s.instrument_fwhm_ghz());
  for (const auto& pk : find_local_peaks(sm, relative_prominence * top)) {
    const std::size_t i = pk.index;
    const double half = sm[i] - 0.5 * pk.prominence;
    std::size_t l = i, r = i;
    while (l > 0 && sm[l] > half) --l;
    while (r + 1 < sm.size() && sm[r] > half) ++r;
    const double fwhm_ev = std::max(sl.e[r] - sl.e[l], 2.0 * (sl.e[std::min(i + 1, sl.e.size() - 1)] - sl.e[i]));
    PeakModel m;
    m.kind = PeakKind::voigt;
    m.center_ev = sl.e[i];
    if (i > 0 && i + 1 < sl.e.size())
      m.center_ev = parabola_vertex(sl.e[i - 1], sm[i - 1], sl.e[i], sm[i], sl.e[i + 1], sm[i + 1]);
    m.fit_gauss = fit_gauss;
    if (fit_gauss) {
      m.fwhm_lorentz_ghz = ev_to_ghz(0.6 * fwhm_ev);
      m.fwhm_gauss_ghz = ev_to_ghz(0.6 * fwhm_ev);
    } else {
      m.fwhm_gauss_ghz = 0.0;
      m.fwhm_lorentz_ghz = ev_to_ghz(std::max(fwhm_ev - 0.5 * instrument_ev, 0.2 * fwhm_ev));
    }
    m.area = pk.prominence * fwhm_ev * 1.3;
    seeds.push_back(m);
  }
  return seeds;
}

DebyeWallerResult debye_waller(const Spectrum& s, const DebyeWallerOptions& options) {
  if (s.empty()) throw std::invalid_argument("debye_waller: empty spectrum");
  const double gmin = s.wavelength_nm().front(), gmax = s.wavelength_nm().back();
  for (const auto* w : {&options.zpl, &options.psb})
    if (!(w->lo_nm < w->hi_nm) || w->lo_nm < gmin - 1e-9 || w->hi_nm > gmax + 1e-9)
      throw std::invalid_argument("debye_waller: window outside the spectrum grid");
  std::vector<PeakModel> seeds = options.seeds;
  if (seeds.empty()) {
    seeds = auto_seed_peaks(s, options.zpl.lo_nm, options.zpl.hi_nm, options.relative_prominence, false,
                            options.smoothing);
    auto psb = auto_seed_peaks(s, options.psb.lo_nm, options.psb.hi_nm, options.relative_prominence, true,
                               options.smoothing);
    seeds.insert(seeds.end(), psb.begin(), psb.end());
  }
  if (seeds.empty()) throw std::domain_error("debye_waller: no spectral features found");

  DebyeWallerOptions o = options;
  PeakFitOptions fo;
  fo.range_nm = std::make_pair(std::min(o.zpl.lo_nm, o.psb.lo_nm), std::max(o.zpl.hi_nm, o.psb.hi_nm));
  DebyeWallerResult res;
  res.fit = fit_peaks(s, seeds, fo);

  const std::size_t np = res.fit.peaks.size();
  std::vector<bool> in_zpl(np);
  for (std::size_t k = 0; k < np; ++k) {
    const double c = res.fit.peaks[k].center_nm();
    in_zpl[k] = c >= o.zpl.lo_nm && c <= o.zpl.hi_nm;
    res.total_area += res.fit.peaks[k].area;
    if (in_zpl[k]) res.zpl_area += res.fit.peaks[k].area;
  }
  if (!(res.total_area > 0.0)) throw std::domain_error("debye_waller: zero total area");
  res.dw = res.zpl_area / res.total_area;
  const double t2 = res.total_area * res.total_area;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(res.fit.fit.covariance.rows());
  for (std::size_t k = 0; k < np; ++k) {
    const auto idx = static_cast<Eigen::Index>(4 * k + 3);
    grad[idx] = in_zpl[k] ? (res.total_area - res.zpl_area) / t2 : -res.zpl_area / t2;
  }
  res.dw_error = std::sqrt(std::max(0.0, grad.dot(res.fit.fit.covariance * grad)));
  return res;
}

void PSBTable::validate() const {
  for (std::size_t i = 0; i < offsets_mev.size(); ++i) {
    if (!(offsets_mev[i] > 0.0)) throw std::invalid_argument("PSBTable: offsets must be > 0");
    if (i > 0 && !(offsets_mev[i] > offsets_mev[i - 1]))
      throw std::invalid_argument("PSBTable: offsets must be strictly increasing");
  }
}

std::size_t PsbReport::matched() const {
  return static_cast<std::size_t>(std::count_if(peaks.begin(), peaks.end(), [](const PsbPeak& p) { return p.matched; }));
}

std::size_t PsbReport::unmatched() const { return peaks.size() - matched(); }

PsbReport find_psb_peaks(const Spectrum& s, double zpl_center_nm, const PsbOptions& options) {
  options.table.validate();
  if (!(zpl_center_nm > 0.0)) throw std::invalid_argument("find_psb_peaks: bad ZPL wavelength");
  const double e_zpl = nm_to_ev(zpl_center_nm);
  // offsets min..max map to wavelengths on the red side of the ZPL
  const double lo_nm = ev_to_nm(e_zpl - 1e-3 * options.min_offset_mev);
  const double hi_nm = ev_to_nm(std::max(e_zpl - 1e-3 * options.max_offset_mev, 1e-6));
  const EnergySlice sl = slice_energy(s, lo_nm, hi_nm);
  PsbReport rep;
  rep.reference = options.table.reference;
  if (sl.e.size() < 3) return rep;
  const auto sm = savitzky_golay(sl.y, options.smoothing);
  const double top = *std::max_element(sm.begin(), sm.end());
  if (!(top > 0.0)) return rep;
  for (const auto& pk : find_local_peaks(sm, options.relative_prominence * top)) {
    const std::size_t i = pk.index;
    double e_peak = sl.e[i];
    if (i > 0 && i + 1 < sl.e.size())
      e_peak = parabola_vertex(sl.e[i - 1], sm[i - 1], sl.e[i], sm[i], sl.e[i + 1], sm[i + 1]);
    PsbPeak p{};
    p.offset_mev = 1e3 * (e_zpl - e_peak);
    p.wavelength_nm = ev_to_nm(e_peak);
    p.height = pk.height;
    p.prominence = pk.prominence;
    p.nearest_reference_mev = std::numeric_limits<double>::quiet_NaN();
    p.distance_mev = std::numeric_limits<double>::infinity();
    for (double ref : options.table.offsets_mev)
      if (std::abs(ref - p.offset_mev) < std::abs(p.distance_mev)) {
        p.distance_mev = p.offset_mev - ref;
        p.nearest_reference_mev = ref;
      }
    p.matched = std::abs(p.distance_mev) <= options.match_tolerance_mev;
    rep.peaks.push_back(p);
  }
  std::sort(rep.peaks.begin(), rep.peaks.end(), [](const PsbPeak& a, const PsbPeak& b) { return a.offset_mev < b.offset_mev; });
  return rep;
}

EnergySpectrum mirror_spectrum(const EnergySpectrum& s, double zpl_energy_ev) {
  const auto e = s.energy_ev();
  if (e.empty() || zpl_energy_ev < e.front() || zpl_energy_ev > e.back())
    throw std::invalid_argument("mirror_spectrum: ZPL energy outside the grid");
  const auto n = s.size();
  std::vector<double> me(n), mi(n);
  for (std::size_t i = 0; i < n; ++i) {
    me[n - 1 - i] = 2.0 * zpl_energy_ev - e[i];
    mi[n - 1 - i] = s.intensity()[i];
  }
  return {std::move(me), std::move(mi), s.instrument_fwhm_ghz()};
}

EnergySpectrum mirror_spectrum(const Spectrum& s, double zpl_energy_ev) {
  return mirror_spectrum(to_energy(s), zpl_energy_ev);
}

FitResult fit_a2u_resonance(std::span<const ExcitationPoint> ple) {
  const auto n = ple.size();
  if (n < 5) throw std::invalid_argument("fit_a2u_resonance: need >= 5 points");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ple[i].energy_ev;
    y[i] = ple[i].response;
  }
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double span_ev = *xmax_it - *xmin_it;
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double ymin = *ymin_it, ymax = *ymax_it;
  const double scale = std::max({std::abs(ymin), std::abs(ymax), 1e-300});

  FitResult r;
  if (ymax - ymin <= 1e-12 * scale) {
    r.model = "lorentzian_plus_constant";
    r.names = {"center_ev", "fwhm_mev", "amplitude", "offset"};
    r.values = {0.5 * (*xmin_it + *xmax_it), std::numeric_limits<double>::quiet_NaN(), 0.0, ymin};
    r.covariance = Eigen::MatrixXd::Zero(4, 4);
    r.dof = static_cast<int>(n) - 4;
    r.add_flag("degenerate");
    r.domain_min = *xmin_it;
    r.domain_max = *xmax_it;
    return r;
  }
  const std::size_t imax = static_cast<std::size_t>(ymax_it - y.begin());
  // half-maximum width from the closest crossings on either side (x sorted by index order)
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), imax) - order.begin());
  const double half = ymin + 0.5 * (ymax - ymin);
  std::size_t l = pos, rgt = pos;
  while (l > 0 && y[order[l]] > half) --l;
  while (rgt + 1 < n && y[order[rgt]] > half) ++rgt;
  double fwhm0 = x[order[rgt]] - x[order[l]];
  if (!(fwhm0 > 0.0)) fwhm0 = 0.25 * span_ev;

  FitProblem pb;
  pb.names = {"center_ev", "fwhm_mev", "amplitude", "offset"};
  pb.initial = {x[imax], 1e3 * fwhm0, ymax - ymin, ymin};
  pb.lower = {*xmin_it - span_ev, 1e-6, -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  pb.step_scale = {fwhm0, 1e3 * fwhm0, ymax - ymin, ymax - ymin};
  pb.model = [&](std::span<const double> p, std::span<double> out) {
    const double g = 0.5e-3 * p[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - p[0];
      out[i] = p[2] * g * g / (d * d + g * g) + p[3];
    }
  };
  pb.y = y;
  r = levenberg_marquardt(pb);
  r.model = "lorentzian_plus_constant";
  r.domain_min = *xmin_it;
  r.domain_max = *xmax_it;
  if (span_ev < 1e-3 * r.value("fwhm_mev")) r.add_flag("insufficient_span");
  if (std::abs(r.value("amplitude")) <= 1e-12 * scale) r.add_flag("degenerate");
  return r;
}

namespace {
std::string kind_name(PeakKind k) {
  switch (k) {
  case PeakKind::lorentzian: return "lorentzian";
  case PeakKind::gaussian: return "gaussian";
  default: return "voigt";
  }
}
PeakKind kind_from(const std::string& s) {
  if (s == "lorentzian") return PeakKind::lorentzian;
  if (s == "gaussian") return PeakKind::gaussian;
  if (s == "voigt") return PeakKind::voigt;
  throw std::invalid_argument("unknown peak kind '" + s + "'");
}
} // namespace

void to_json(nlohmann::json& j, const PeakModel& p) {
  j = {{"kind", kind_name(p.kind)},
       {"center_ev", p.center_ev},
       {"center_nm", p.center_nm()},
       {"fwhm_lorentz_ghz", p.fwhm_lorentz_ghz},
       {"fwhm_gauss_ghz", p.fwhm_gauss_ghz},
       {"area", p.area},
       {"fit_gauss", p.fit_gauss}};
}

void from_json(const nlohmann::json& j, PeakModel& p) {
  p = PeakModel{};
  p.kind = kind_from(j.value("kind", std::string("voigt")));
  if (j.contains("center_ev"))
    p.center_ev = j.at("center_ev").get<double>();
  else
    p.center_ev = nm_to_ev(j.at("center_nm").get<double>());
  p.fwhm_lorentz_ghz = j.value("fwhm_lorentz_ghz", p.fwhm_lorentz_ghz);
  p.fwhm_gauss_ghz = j.value("fwhm_gauss_ghz", p.fwhm_gauss_ghz);
  p.area = j.value("area", p.area);
  p.fit_gauss = j.value("fit_gauss", p.fit_gauss);
}

void to_json(nlohmann::json& j, const PsbReport& r) {
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : r.peaks)
    peaks.push_back({{"offset_mev", p.offset_mev},
                     {"wavelength_nm", p.wavelength_nm},
                     {"height", p.height},
                     {"prominence", p.prominence},
                     {"nearest_reference_mev", p.nearest_reference_mev},
                     {"distance_mev", p.distance_mev},
                     {"matched", p.matched}});
  j = {{"reference", r.reference}, {"peaks", peaks}, {"matched", r.matched()}, {"unmatched", r.unmatched()}};
}

void to_json(nlohmann::json& j, const DebyeWallerResult& r) {
  j = {{"dw", r.dw},
       {"dw_error", r.dw_error},
       {"zpl_area", r.zpl_area},
       {"total_area", r.total_area},
       {"peaks", r.fit.peaks},
       {"fit", r.fit.fit}};
}

void from_json(const nlohmann::json& j, PSBTable& t) {
  t.reference = j.value("reference", std::string("custom"));
  t.offsets_mev = j.at("offsets_mev").get<std::vector<double>>();
  t.validate();
}

} // namespace snv
