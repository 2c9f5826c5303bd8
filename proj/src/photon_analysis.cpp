#include "snv/photon_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace snv {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

} // namespace

G2Accumulator::G2Accumulator(double bin_width_ns, double window_ns) {
  if (!(bin_width_ns > 0.0)) throw std::invalid_argument("g2: bin width must be > 0");
  if (!(window_ns >= bin_width_ns)) throw std::invalid_argument("g2: window must be >= bin width");
  bin_ps_ = std::max<std::int64_t>(1, std::llround(bin_width_ns * 1e3));
  half_bins_ = static_cast<std::int64_t>(std::floor(window_ns * 1e3 / static_cast<double>(bin_ps_) + 1e-9));
  window_ps_ = (2 * half_bins_ + 1) * bin_ps_ / 2;
  hist_.assign(static_cast<std::size_t>(2 * half_bins_ + 1), 0.0);
}

void G2Accumulator::add(const PhotonRecord& r) {
  if (r.channel > 1) throw std::invalid_argument("g2: channel must be 0 or 1");
  if (r.timestamp_ps < last_) throw std::invalid_argument("g2: timestamps must be non-decreasing");
  last_ = r.timestamp_ps;
  while (!recent_.empty() && r.timestamp_ps - recent_.front().timestamp_ps > window_ps_) recent_.pop_front();
  for (const auto& old : recent_) {
    if (old.channel == r.channel) continue;
    const std::int64_t dt = r.channel == 1 ? r.timestamp_ps - old.timestamp_ps : old.timestamp_ps - r.timestamp_ps;
    const std::int64_t j = floor_div(2 * dt + bin_ps_, 2 * bin_ps_);
    if (j >= -half_bins_ && j <= half_bins_) hist_[static_cast<std::size_t>(j + half_bins_)] += 1.0;
  }
  recent_.push_back(r);
  ++n_[r.channel];
}

CorrelationCurve G2Accumulator::finish(std::int64_t duration_ps) const {
  if (n_[0] + n_[1] == 0) throw std::invalid_argument("g2: empty stream");
  if (n_[0] == 0 || n_[1] == 0) throw std::invalid_argument("g2: both detector channels must carry events");
  if (duration_ps <= 0) throw std::invalid_argument("g2: acquisition duration must be > 0");
  CorrelationCurve c;
  const double t = static_cast<double>(duration_ps);
  const double bw = static_cast<double>(bin_ps_);
  c.bin_width_ns = bw * 1e-3;
  c.rate0_cps = static_cast<double>(n_[0]) / (t * 1e-12);
  c.rate1_cps = static_cast<double>(n_[1]) / (t * 1e-12);
  c.normalization = static_cast<double>(n_[0]) * static_cast<double>(n_[1]) * bw / t;
  const auto nb = hist_.size();
  c.tau_ns.resize(nb);
  c.g2.resize(nb);
  c.error.resize(nb);
  c.counts = hist_;
  for (std::size_t i = 0; i < nb; ++i) {
    c.tau_ns[i] = static_cast<double>(static_cast<std::int64_t>(i) - half_bins_) * c.bin_width_ns;
    c.g2[i] = hist_[i] / c.normalization;
    c.error[i] = std::sqrt(hist_[i]) / c.normalization;
  }
  return c;
}

CorrelationCurve g2_histogram(const PhotonStream& stream, double bin_width_ns, double window_ns) {
  if (stream.records.empty()) throw std::invalid_argument("g2: empty stream");
  G2Accumulator acc(bin_width_ns, window_ns);
  for (const auto& r : stream.records) acc.add(r);
  return acc.finish(stream.effective_duration_ps());
}

double g2_model_bin_average(double lo, double hi, double g2_0, double tau) {
  const double w = hi - lo;
  double integral;
  if (lo >= 0.0)
    integral = tau * std::exp(-lo / tau) * -std::expm1(-w / tau);
  else if (hi <= 0.0)
    integral = tau * std::exp(hi / tau) * -std::expm1(-w / tau);
  else
    integral = tau * (-std::expm1(lo / tau) - std::expm1(-hi / tau));
  return 1.0 - (1.0 - g2_0) * integral / w;
}

FitResult fit_g2(const CorrelationCurve& curve) {
  const auto n = curve.tau_ns.size();
  if (n < 3 || curve.g2.size() != n) throw std::invalid_argument("fit_g2: curve needs >= 3 bins");
  const double bw = curve.bin_width_ns;
  if (!(bw > 0.0)) throw std::invalid_argument("fit_g2: bin width must be > 0");

  // starting values
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(curve.tau_ns[i]) < std::abs(curve.tau_ns[i0])) i0 = i;
  double g0 = curve.g2[i0];
  if (i0 > 0 && i0 + 1 < n) g0 = (curve.g2[i0 - 1] + 2 * curve.g2[i0] + curve.g2[i0 + 1]) / 4.0;
  g0 = std::clamp(g0, 0.0, 0.99);
  const double target = 1.0 - (1.0 - g0) / std::exp(1.0);
  double tau0 = 5.0 * bw;
  for (std::size_t k = 1; i0 + k < n && k <= i0; ++k) {
    const double avg = 0.5 * (curve.g2[i0 + k] + curve.g2[i0 - k]);
    if (avg >= target) {
      tau0 = std::max(bw, curve.tau_ns[i0 + k]);
      break;
    }
  }
  const double window = std::max(std::abs(curve.tau_ns.front()), std::abs(curve.tau_ns.back()));

  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = curve.tau_ns[i] - 0.5 * bw;
    hi[i] = curve.tau_ns[i] + 0.5 * bw;
  }

  const bool poisson = !curve.counts.empty() && curve.normalization > 0.0;
  std::vector<double> sigma;
  FitProblem pb;
  pb.names = {"g2_0", "tau_anti_ns"};
  pb.initial = {g0, tau0};
  pb.lower = {0.0, 1e-3 * bw};
  pb.upper = {2.0, 1e3 * window};
  pb.step_scale = {0.01, bw};
  const double norm = poisson ? curve.normalization : 1.0;
  pb.model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = norm * g2_model_bin_average(lo[i], hi[i], p[0], p[1]);
  };
  if (poisson) {
    pb.y = curve.counts;
    pb.objective = Objective::poisson;
  } else {
    pb.y = curve.g2;
    bool have_err = curve.error.size() == n &&
                    std::all_of(curve.error.begin(), curve.error.end(), [](double e) { return e > 0.0; });
    if (have_err) {
      sigma = curve.error;
      pb.sigma = sigma;
    }
  }
  FitResult r = levenberg_marquardt(pb);
  r.model = "g2_antibunching";
  r.domain_min = curve.tau_ns.front();
  r.domain_max = curve.tau_ns.back();

  const double depth = 1.0 - r.value("g2_0");
  const double depth_err = r.error("g2_0");
  const double tau = r.value("tau_anti_ns");
  const bool no_dip = !(depth > 3.0 * depth_err) || depth <= 1e-9;
  if (no_dip) {
    r.add_flag("no_antibunching");
    r.add_flag("tau_unbounded");
    r.converged = false;
  }
  if (tau >= 0.999 * pb.upper[1] || tau <= 1.001 * pb.lower[1] || r.has_flag("singular_covariance")) {
    r.add_flag("tau_unbounded");
    r.converged = false;
  }
  if (window < 5.0 * tau) r.add_flag("window_too_short");
  return r;
}

FitResult fit_lifetime(const TcspcHistogram& hist, const LifetimeFitOptions& options) {
  const auto& c = hist.counts;
  if (c.empty() || std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; }))
    throw std::invalid_argument("fit_lifetime: histogram is empty");
  const auto peak = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  const std::size_t n = c.size() - peak;
  std::vector<double> t(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = static_cast<double>(k) * hist.bin_width_ns;
    y[k] = c[peak + k];
  }
  const auto occupied = std::count_if(y.begin(), y.end(), [](double v) { return v > 0.0; });
  if (occupied < 3 || n < 4) throw std::invalid_argument("fit_lifetime: too few occupied bins after the peak");

  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double b0 = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) b0 += y[k];
  b0 /= static_cast<double>(tail);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::max(0.0, y[k] - b0);
    num += s * t[k];
    den += s;
  }
  const double span = t.back() + hist.bin_width_ns;
  double tau0 = den > 0.0 ? num / den : span / 5.0;
  tau0 = std::clamp(tau0, hist.bin_width_ns, span);
  const double a0 = std::max(y[0] - b0, 1.0);

  FitProblem pb;
  pb.names = {"amplitude", "tau_ns", "background"};
  pb.initial = {a0, tau0, options.fit_background ? std::max(b0, 1e-3) : 0.0};
  pb.lower = {0.0, 1e-3 * hist.bin_width_ns, 0.0};
  pb.upper = {std::numeric_limits<double>::infinity(), 1e3 * span, std::numeric_limits<double>::infinity()};
  pb.fixed = {false, false, !options.fit_background};
  pb.step_scale = {a0, tau0, std::max(1.0, b0)};
  pb.model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = p[0] * std::exp(-t[k] / p[1]) + p[2];
  };
  pb.y = y;
  pb.objective = Objective::poisson;
  FitResult r = levenberg_marquardt(pb);
  r.model = "single_exp_plus_background";
  r.domain_min = static_cast<double>(peak) * hist.bin_width_ns;
  r.domain_max = static_cast<double>(c.size()) * hist.bin_width_ns;
  const double decades = (span / r.value("tau_ns")) / std::log(10.0);
  if (n < 50 && decades < 3.0) r.add_flag("short_tail");
  return r;
}

FitResult fit_saturation(std::span<const SaturationPoint> points, const SaturationOptions& options) {
  const auto n = points.size();
  const std::size_t n_free = options.fit_linear_background ? 3 : 2;
  if (n < n_free + 1) throw std::invalid_argument("fit_saturation: too few points");
  std::vector<double> p(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = points[i].power_uw;
    y[i] = points[i].rate_cps;
    if (p[i] < 0.0) throw std::invalid_argument("fit_saturation: negative power");
  }
  const double pmin = *std::min_element(p.begin(), p.end());
  const double pmax = *std::max_element(p.begin(), p.end());

  FitResult r;
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    r.model = "saturation";
    r.names = {"i_inf_cps", "p_sat_uw", "linear_bg_cps_per_uw"};
    r.values = {0.0, median(p), 0.0};
    r.covariance = Eigen::MatrixXd::Zero(3, 3);
    r.dof = static_cast<int>(n - n_free);
    r.add_flag("degenerate");
    r.domain_min = pmin;
    r.domain_max = pmax;
    return r;
  }

  // P/R = P/I + Psat/I for a starting point
  double i0 = 1.2 * *std::max_element(y.begin(), y.end());
  double ps0 = std::max(median(p), 1e-6);
  {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i)
      if (y[i] > 0.0 && p[i] > 0.0) {
        xs.push_back(p[i]);
        ys.push_back(p[i] / y[i]);
      }
    if (xs.size() >= 2) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), 2);
      Eigen::VectorXd yy(static_cast<Eigen::Index>(xs.size()));
      for (std::size_t i = 0; i < xs.size(); ++i) {
        x(static_cast<Eigen::Index>(i), 0) = xs[i];
        x(static_cast<Eigen::Index>(i), 1) = 1.0;
        yy[static_cast<Eigen::Index>(i)] = ys[i];
      }
      const Eigen::VectorXd b = linear_least_squares(x, yy);
      if (b[0] > 0.0 && b[1] > 0.0) {
        i0 = 1.0 / b[0];
        ps0 = b[1] / b[0];
      }
    }
  }

  FitProblem pb;
  pb.names = {"i_inf_cps", "p_sat_uw", "linear_bg_cps_per_uw"};
  pb.initial = {i0, ps0, 0.0};
  pb.lower = {0.0, 1e-9 * std::max(pmax, 1e-9), -std::numeric_limits<double>::infinity()};
  pb.fixed = {false, false, !options.fit_linear_background};
  pb.step_scale = {i0, ps0, i0 / std::max(pmax, 1e-9)};
  pb.model = [&](std::span<const double> q, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = q[0] * p[i] / (p[i] + q[1]) + q[2] * p[i];
  };
  pb.y = y;
  if (!options.sigma.empty()) {
    if (options.sigma.size() != n) throw std::invalid_argument("fit_saturation: sigma size mismatch");
    pb.sigma = options.sigma;
  }
  r = levenberg_marquardt(pb);
  r.model = "saturation";
  r.domain_min = pmin;
  r.domain_max = pmax;
  const double ps = r.value("p_sat_uw");
  if (n < 4) r.add_flag("too_few_points");
  if (!(pmin < ps && ps < pmax)) r.add_flag("insufficient_span");
  return r;
}

FitResult fit_polarization(const PolarizationScan& scan) {
  const auto n = scan.angles_deg.size();
  if (n != scan.counts_cps.size()) throw std::invalid_argument("fit_polarization: size mismatch");
  if (n < 4) throw std::invalid_argument("fit_polarization: need >= 4 angles");
  const auto [amin, amax] = std::minmax_element(scan.angles_deg.begin(), scan.angles_deg.end());
  if (*amax - *amin < 90.0 - 1e-9)
    throw std::invalid_argument("fit_polarization: plate angles must span >= 90 degrees");

  constexpr double deg = constants::pi / 180.0;
  // Linear in (c, a, b): R = c + a cos(4 theta) + b sin(4 theta).
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double th = scan.angles_deg[i] * deg;
    x(ii, 0) = 1.0;
    x(ii, 1) = std::cos(4.0 * th);
    x(ii, 2) = std::sin(4.0 * th);
    y[ii] = std::max(0.0, scan.counts_cps[i] - scan.dark_rate_cps);
  }
  const Eigen::VectorXd beta = linear_least_squares(x, y);
  const Eigen::VectorXd resid = y - x * beta;
  const int dof = static_cast<int>(n) - 3;
  const double ssr = resid.squaredNorm();
  const double s2 = dof > 0 ? ssr / dof : 0.0;
  const Eigen::MatrixXd cov_lin = (x.transpose() * x).inverse() * s2;

  const double c = beta[0], a = beta[1], b = beta[2];
  const double rr = std::hypot(a, b);
  const double amp = 2.0 * rr;
  const double offset = c - rr;
  double theta0 = std::atan2(b, a) / 4.0 / deg;
  theta0 = std::fmod(theta0, 90.0);
  if (theta0 < 0.0) theta0 += 90.0;
  if (theta0 >= 90.0) theta0 -= 90.0;

  FitResult r;
  r.model = "cos2_dipole";
  r.names = {"amplitude_cps", "theta0_deg", "offset_cps"};
  r.values = {amp, theta0, offset};
  r.dof = dof;
  r.chi2 = ssr;
  r.reduced_chi2 = s2;
  r.converged = true;
  r.domain_min = *amin;
  r.domain_max = *amax;

  const double visibility = c > 0.0 ? rr / c : 0.0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(4, 3);
  if (rr > 0.0) {
    jac(0, 1) = 2.0 * a / rr;
    jac(0, 2) = 2.0 * b / rr;
    jac(1, 1) = -b / (rr * rr) / 4.0 / deg;
    jac(1, 2) = a / (rr * rr) / 4.0 / deg;
    jac(2, 1) = -a / rr;
    jac(2, 2) = -b / rr;
  }
  jac(2, 0) = 1.0;
  if (c > 0.0) {
    jac(3, 0) = -rr / (c * c);
    if (rr > 0.0) {
      jac(3, 1) = a / (rr * c);
      jac(3, 2) = b / (rr * c);
    }
  }
  const Eigen::MatrixXd cov = jac * cov_lin * jac.transpose();
  r.covariance = cov.topLeftCorner(3, 3);
  r.derived = {{"visibility", visibility},
               {"visibility_error", std::sqrt(std::max(0.0, cov(3, 3)))},
               {"dipole_angle_deg", std::fmod(2.0 * theta0, 180.0)}};

  const double amp_err = std::sqrt(std::max(0.0, cov(0, 0)));
  const double scale = std::max(std::abs(c), 1e-300);
  if (amp <= 1e-9 * scale || (amp_err > 0.0 && amp < 3.0 * amp_err) || c <= 0.0) {
    r.add_flag("unpolarized");
    r.add_flag("theta0_undefined");
  }
  return r;
}

void to_json(nlohmann::json& j, const CorrelationCurve& c) {
  j = {{"tau_ns", c.tau_ns},
       {"g2", c.g2},
       {"error", c.error},
       {"counts", c.counts},
       {"bin_width_ns", c.bin_width_ns},
       {"normalization", c.normalization},
       {"rate0_cps", c.rate0_cps},
       {"rate1_cps", c.rate1_cps}};
}

void to_json(nlohmann::json& j, const TcspcHistogram& h) {
  j = {{"bin_width_ns", h.bin_width_ns}, {"counts", h.counts}, {"n_pulses", h.n_pulses}, {"detected", h.detected}};
}

} // namespace snv
