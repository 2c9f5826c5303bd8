#include "snv/temp_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "snv/levels.hpp"
#include "snv/units.hpp"

namespace snv {

void TempSeries::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (i > 0 && !(e.t_k > entries[i - 1].t_k))
      throw std::invalid_argument("TempSeries: temperatures must be strictly increasing");
    for (const auto* err : {&e.linewidth_err, &e.shift_err, &e.dw_err})
      if (err->has_value() && !(**err > 0.0)) throw std::invalid_argument("TempSeries: errors must be > 0");
  }
}

const char* to_string(LinewidthModel m) {
  switch (m) {
  case LinewidthModel::T3: return "T3";
  case LinewidthModel::T_plus_T3: return "T_plus_T3";
  case LinewidthModel::T3_plus_T5: return "T3_plus_T5";
  }
  return "?";
}

LinewidthModel linewidth_model_from_string(const std::string& s) {
  if (s == "T3") return LinewidthModel::T3;
  if (s == "T_plus_T3") return LinewidthModel::T_plus_T3;
  if (s == "T3_plus_T5") return LinewidthModel::T3_plus_T5;
  throw std::invalid_argument("unknown linewidth model '" + s + "'");
}

namespace {

struct Column {
  std::vector<double> t, y, sigma; // sigma empty when any error is missing
};

Column collect(const TempSeries& s, std::optional<double> TempPoint::*value, std::optional<double> TempPoint::*err) {
  Column c;
  bool all_err = true;
  std::vector<double> errs;
  for (const auto& e : s.entries) {
    if (!(e.*value).has_value()) continue;
    c.t.push_back(e.t_k);
    c.y.push_back(*(e.*value));
    if ((e.*err).has_value())
      errs.push_back(*(e.*err));
    else
      all_err = false;
  }
  if (all_err) c.sigma = std::move(errs);
  return c;
}

void require_span(const Column& c, const char* what) {
  if (c.t.size() < 4) throw std::invalid_argument(std::string(what) + ": need >= 4 temperatures");
  const double tmin = c.t.front(), tmax = c.t.back();
  if (tmin > 0.0 && tmax < 3.0 * tmin) throw std::invalid_argument(std::string(what) + ": temperature span below x3");
}

// Fits y = sum_k c_k T^{powers_k} (+ constant if with_const) with T = T_rec + T0.
FitResult fit_power_series(const Column& col, const std::vector<int>& powers, const std::vector<std::string>& names,
                           const std::vector<bool>& active, bool fit_offset, double t0_init, const std::string& model) {
  const auto n = col.t.size();
  const auto np = powers.size();
  const double tmax = col.t.back() + t0_init;
  const auto [ymin, ymax] = std::minmax_element(col.y.begin(), col.y.end());
  const double yscale = std::max({std::abs(*ymax - *ymin), std::abs(*ymax), 1e-12});

  // linear starting values at the initial offset
  std::vector<std::size_t> act;
  for (std::size_t k = 0; k < np; ++k)
    if (active[k]) act.push_back(k);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(act.size()));
  Eigen::VectorXd yy(static_cast<Eigen::Index>(n));
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = col.t[i] + t0_init;
    for (std::size_t a = 0; a < act.size(); ++a)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = std::pow(t, powers[act[a]]);
    yy[static_cast<Eigen::Index>(i)] = col.y[i];
    w[static_cast<Eigen::Index>(i)] = col.sigma.empty() ? 1.0 : 1.0 / (col.sigma[i] * col.sigma[i]);
  }
  const Eigen::VectorXd b0 = linear_least_squares(x, yy, w);

  FitProblem pb;
  pb.names = names;
  pb.names.push_back("t_offset_k");
  pb.initial.assign(np + 1, 0.0);
  pb.fixed.assign(np + 1, true);
  pb.step_scale.assign(np + 1, 1.0);
  for (std::size_t a = 0; a < act.size(); ++a) {
    pb.initial[act[a]] = b0[static_cast<Eigen::Index>(a)];
    pb.fixed[act[a]] = false;
  }
  for (std::size_t k = 0; k < np; ++k) pb.step_scale[k] = yscale / std::pow(std::max(tmax, 1.0), powers[k]);
  pb.initial[np] = t0_init;
  pb.fixed[np] = !fit_offset;
  pb.lower.assign(np + 1, -std::numeric_limits<double>::infinity());
  pb.upper.assign(np + 1, std::numeric_limits<double>::infinity());
  pb.lower[np] = -col.t.front() + 1e-9;
  pb.model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = col.t[i] + p[np];
      double v = 0.0;
      for (std::size_t k = 0; k < np; ++k) v += p[k] * std::pow(t, powers[k]);
      out[i] = v;
    }
  };
  pb.y = col.y;
  if (!col.sigma.empty()) pb.sigma = col.sigma;
  FitResult r = levenberg_marquardt(pb);
  r.model = model;
  const double t0 = r.values[np];
  r.domain_min = col.t.front() + t0;
  r.domain_max = col.t.back() + t0;
  return r;
}

} // namespace

FitResult fit_linewidth_series(const TempSeries& series, LinewidthModel model, const SeriesFitOptions& options) {
  series.validate();
  const Column col = collect(series, &TempPoint::linewidth_ghz, &TempPoint::linewidth_err);
  require_span(col, "fit_linewidth_series");
  std::vector<bool> active{true, model == LinewidthModel::T_plus_T3, true, model == LinewidthModel::T3_plus_T5};
  return fit_power_series(col, {0, 1, 3, 5}, {"gamma0_ghz", "c_linear", "c_cubic", "c_quintic"}, active,
                          options.fit_offset, options.initial_offset_k,
                          std::string("linewidth:") + to_string(model));
}

std::vector<FitResult> compare_linewidth_models(const TempSeries& series, const SeriesFitOptions& options) {
  std::vector<FitResult> out;
  for (auto m : {LinewidthModel::T3, LinewidthModel::T_plus_T3, LinewidthModel::T3_plus_T5})
    out.push_back(fit_linewidth_series(series, m, options));
  return out;
}

FitResult fit_shift_series(const TempSeries& series, const SeriesFitOptions& options) {
  series.validate();
  const Column col = collect(series, &TempPoint::shift_ghz, &TempPoint::shift_err);
  require_span(col, "fit_shift_series");
  return fit_power_series(col, {2, 4}, {"alpha_quadratic", "beta_quartic"}, {true, true}, options.fit_offset,
                          options.initial_offset_k, "shift:T2_plus_T4");
}

FitResult fit_dw_series(const TempSeries& series) {
  series.validate();
  const Column col = collect(series, &TempPoint::dw, &TempPoint::dw_err);
  for (double v : col.y)
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("fit_dw_series: DW values must lie in (0, 1]");
  if (col.t.size() < 4) throw std::invalid_argument("fit_dw_series: need >= 4 DW points");
  if (col.t.back() - col.t.front() < 200.0) throw std::invalid_argument("fit_dw_series: need >= 200 K span");
  const auto n = col.t.size();
  constexpr double k = 2.0 * constants::pi * constants::pi / 3.0;

  // -ln DW = S + S k T^2 / Tc^2
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd yy(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    x(static_cast<Eigen::Index>(i), 1) = col.t[i] * col.t[i];
    yy[static_cast<Eigen::Index>(i)] = -std::log(col.y[i]);
  }
  const Eigen::VectorXd b = linear_least_squares(x, yy);
  const double s0 = std::max(b[0], 1e-6);
  const double tmax = col.t.back();
  const double slope_floor = 1e-6 * s0 / (tmax * tmax);
  const bool bounded = b[1] > slope_floor;
  const double tc0 = bounded ? std::sqrt(s0 * k / b[1]) : std::numeric_limits<double>::infinity();

  FitProblem pb;
  pb.names = {"huang_rhys_s", "t_cutoff_k"};
  pb.initial = {s0, bounded ? tc0 : 1.0};
  pb.fixed = {false, !bounded};
  pb.lower = {0.0, 1e-6};
  pb.step_scale = {s0, bounded ? tc0 : 1.0};
  pb.model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!bounded) {
        out[i] = std::exp(-p[0]);
        continue;
      }
      out[i] = dw_factor({p[0], p[1]}, col.t[i]);
    }
  };
  pb.y = col.y;
  if (!col.sigma.empty()) pb.sigma = col.sigma;
  FitResult r = levenberg_marquardt(pb);
  r.model = "dw:exp_T2";
  r.domain_min = col.t.front();
  r.domain_max = col.t.back();
  if (!bounded) {
    r.values[1] = std::numeric_limits<double>::infinity();
    r.add_flag("t_cutoff_unbounded");
  } else {
    const double tc = r.value("t_cutoff_k");
    if (tc > 100.0 * tmax || r.error("t_cutoff_k") > tc || r.has_flag("singular_covariance"))
      r.add_flag("t_cutoff_unbounded");
  }
  const double tc = r.value("t_cutoff_k");
  r.derived = {{"dw0", std::exp(-r.value("huang_rhys_s"))},
               {"phonon_energy_mev", std::isfinite(tc) ? tc * constants::boltzmann_ev_per_k * 1e3
                                                       : std::numeric_limits<double>::infinity()}};
  return r;
}

namespace {

bool is_linewidth(const FitResult& law) { return law.model.rfind("linewidth:", 0) == 0; }
bool is_shift(const FitResult& law) { return law.model.rfind("shift:", 0) == 0; }

struct Term {
  const char* name;
  int power;
};
constexpr Term kLinewidthTerms[] = {{"gamma0_ghz", 0}, {"c_linear", 1}, {"c_cubic", 3}, {"c_quintic", 5}};
constexpr Term kShiftTerms[] = {{"alpha_quadratic", 2}, {"beta_quartic", 4}};

template <typename F>
void for_terms(const FitResult& law, F&& f) {
  if (is_linewidth(law)) {
    for (const auto& t : kLinewidthTerms)
      if (law.has(t.name)) f(law.index(t.name), t.power);
  } else if (is_shift(law)) {
    for (const auto& t : kShiftTerms)
      if (law.has(t.name)) f(law.index(t.name), t.power);
  } else {
    throw std::invalid_argument("temperature law model '" + law.model + "' not invertible");
  }
}

double law_slope(const FitResult& law, double t) {
  double d = 0.0;
  for_terms(law, [&](std::size_t i, int pw) {
    if (pw > 0) d += law.values[i] * pw * std::pow(t, pw - 1);
  });
  return d;
}

} // namespace

double evaluate_law(const FitResult& law, double t_k) {
  if (law.model.rfind("dw:", 0) == 0) return dw_factor({law.value("huang_rhys_s"), law.value("t_cutoff_k")}, t_k);
  double v = 0.0;
  for_terms(law, [&](std::size_t i, int pw) { v += law.values[i] * std::pow(t_k, pw); });
  return v;
}

double normal_two_sided_quantile(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::domain_error("confidence must be in (0, 1)");
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid / std::sqrt(2.0)) < confidence)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ThermometerReading invert_thermometer(Observable observable, double value_ghz, const FitResult& law,
                                      const InversionOptions& options) {
  if (observable == Observable::linewidth && !is_linewidth(law))
    throw std::invalid_argument("invert_thermometer: law is not a linewidth law");
  if (observable == Observable::shift && !is_shift(law))
    throw std::invalid_argument("invert_thermometer: law is not a shift law");
  if (observable == Observable::shift && !options.range_k)
    throw std::invalid_argument("invert_thermometer: shift inversion needs an explicit monotone range");

  double lo, hi;
  if (options.range_k) {
    lo = options.range_k->first;
    hi = options.range_k->second;
  } else {
    if (!std::isfinite(law.domain_min) || !std::isfinite(law.domain_max))
      throw std::invalid_argument("invert_thermometer: law carries no fitted temperature range");
    const double span = law.domain_max - law.domain_min;
    lo = std::max(0.0, law.domain_min - 0.1 * span);
    hi = law.domain_max + 0.1 * span;
  }
  if (!(hi > lo) || lo < 0.0) throw std::invalid_argument("invert_thermometer: bad temperature range");

  constexpr int kSamples = 256;
  double prev = evaluate_law(law, lo);
  int sign = 0;
  for (int i = 1; i <= kSamples; ++i) {
    const double v = evaluate_law(law, lo + (hi - lo) * i / kSamples);
    const int s = v > prev ? 1 : (v < prev ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) throw std::domain_error("invert_thermometer: law not monotone over range");
    sign = s;
    prev = v;
  }
  const double f_lo = evaluate_law(law, lo), f_hi = evaluate_law(law, hi);
  if (value_ghz < std::min(f_lo, f_hi) || value_ghz > std::max(f_lo, f_hi))
    throw std::range_error("invert_thermometer: value outside the law's range");

  double a = lo, b = hi;
  for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = evaluate_law(law, mid);
    if ((fm < value_ghz) == (sign > 0))
      a = mid;
    else
      b = mid;
  }
  ThermometerReading out;
  out.t_k = 0.5 * (a + b);
  out.confidence = options.confidence;

  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(law.values.size()));
  for_terms(law, [&](std::size_t i, int pw) { g[static_cast<Eigen::Index>(i)] = std::pow(out.t_k, pw); });
  double var = options.value_error * options.value_error;
  if (law.covariance.rows() == g.size()) var += g.dot(law.covariance * g);
  const double slope = std::abs(law_slope(law, out.t_k));
  out.sigma_k = slope > 0.0 ? std::sqrt(std::max(0.0, var)) / slope : std::numeric_limits<double>::infinity();
  const double z = normal_two_sided_quantile(options.confidence);
  out.ci_low_k = out.t_k - z * out.sigma_k;
  out.ci_high_k = out.t_k + z * out.sigma_k;
  return out;
}

} // namespace snv
