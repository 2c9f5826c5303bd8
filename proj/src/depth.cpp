#include "snv/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "snv/units.hpp"

namespace snv {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

template <typename F>
double bisect_decreasing(F&& f, double target, double lo, double hi, double tol) {
  // f decreasing in x, f(lo) >= target >= f(hi)
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

void check_rate(double rate, double total) {
  if (!std::isfinite(rate) || rate < 0.0) throw std::domain_error("depth: measured rate must be finite and >= 0");
  if (rate > total * (1.0 + 1e-12)) throw std::range_error("depth: measured rate exceeds the full profile");
}

} // namespace

void ImplantProfile::validate() const {
  if (!(mean_depth_nm > 0.0) || !(straggle_sigma_nm > 0.0) || !(total_amplitude_cps > 0.0))
    throw std::invalid_argument("ImplantProfile: mean, sigma and amplitude must be > 0");
}

double ImplantProfile::density(double z_nm) const {
  if (z_nm < 0.0) return 0.0;
  const double u = (z_nm - mean_depth_nm) / straggle_sigma_nm;
  const double norm = 0.5 * std::erfc(-mean_depth_nm / (straggle_sigma_nm * kSqrt2));
  return total_amplitude_cps * std::exp(-0.5 * u * u) / (straggle_sigma_nm * std::sqrt(2.0 * constants::pi) * norm);
}

double ImplantProfile::remaining_rate(double removed_nm) const {
  const double s = std::max(0.0, removed_nm);
  return total_amplitude_cps * std::erfc((s - mean_depth_nm) / (straggle_sigma_nm * kSqrt2)) /
         std::erfc(-mean_depth_nm / (straggle_sigma_nm * kSqrt2));
}

ImplantProfile normalize_profile(double reference_rate_cps, double mean_depth_nm, double straggle_sigma_nm) {
  if (!(reference_rate_cps > 0.0)) throw std::invalid_argument("normalize_profile: reference rate must be > 0");
  ImplantProfile p{mean_depth_nm, straggle_sigma_nm, reference_rate_cps};
  p.validate();
  return p;
}

double wing_depth(const ImplantProfile& p, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::domain_error("wing_depth: fraction must be in (0, 1]");
  return p.straggle_sigma_nm * std::sqrt(-2.0 * std::log(fraction));
}

DepthEstimate estimate_depth(const ImplantProfile& p, double measured_rate_cps, const DepthOptions& options) {
  p.validate();
  check_rate(measured_rate_cps, p.total_amplitude_cps);
  DepthEstimate out;
  out.wing_nm = wing_depth(p, options.wing_fraction);
  if (measured_rate_cps == 0.0) {
    out.removed_nm = std::numeric_limits<double>::infinity();
    return out;
  }
  if (measured_rate_cps >= p.total_amplitude_cps) {
    out.removed_nm = 0.0;
  } else {
    const double hi = p.mean_depth_nm + 40.0 * p.straggle_sigma_nm;
    out.removed_nm = bisect_decreasing([&](double s) { return p.remaining_rate(s); }, measured_rate_cps, 0.0, hi,
                                       options.tolerance_nm);
  }
  const double anchor = p.mean_depth_nm + (options.anchor == DepthAnchor::deep_wing ? out.wing_nm : 0.0);
  out.depth_nm = std::max(0.0, anchor - out.removed_nm);
  return out;
}

double depth_from_countrate(const ImplantProfile& p, double measured_rate_cps) {
  return estimate_depth(p, measured_rate_cps).depth_nm;
}

EmpiricalProfile::EmpiricalProfile(std::vector<double> depth_nm, std::vector<double> density,
                                   double total_amplitude_cps)
    : z_(std::move(depth_nm)), rho_(std::move(density)), total_(total_amplitude_cps) {
  if (z_.size() != rho_.size() || z_.size() < 2) throw std::invalid_argument("EmpiricalProfile: need >= 2 samples");
  if (!(total_ > 0.0)) throw std::invalid_argument("EmpiricalProfile: amplitude must be > 0");
  for (std::size_t i = 0; i < z_.size(); ++i) {
    if (i > 0 && !(z_[i] > z_[i - 1])) throw std::invalid_argument("EmpiricalProfile: depths must increase");
    if (!(rho_[i] >= 0.0)) throw std::invalid_argument("EmpiricalProfile: densities must be >= 0");
  }
  if (z_.front() < 0.0) throw std::invalid_argument("EmpiricalProfile: depths must be >= 0");
  cum_.assign(z_.size(), 0.0);
  for (std::size_t i = 1; i < z_.size(); ++i) cum_[i] = cum_[i - 1] + 0.5 * (rho_[i] + rho_[i - 1]) * (z_[i] - z_[i - 1]);
  if (!(cum_.back() > 0.0)) throw std::invalid_argument("EmpiricalProfile: zero area");
  const double scale = total_ / cum_.back();
  for (auto& c : cum_) c *= scale;
  for (auto& r : rho_) r *= scale;
}

double EmpiricalProfile::remaining_rate(double removed_nm) const {
  if (removed_nm <= z_.front()) return total_;
  if (removed_nm >= z_.back()) return 0.0;
  const auto it = std::upper_bound(z_.begin(), z_.end(), removed_nm);
  const auto i = static_cast<std::size_t>(it - z_.begin()) - 1;
  const double h = removed_nm - z_[i];
  const double slope = (rho_[i + 1] - rho_[i]) / (z_[i + 1] - z_[i]);
  const double partial = rho_[i] * h + 0.5 * slope * h * h;
  return total_ - (cum_[i] + partial);
}

double EmpiricalProfile::peak_depth() const {
  return z_[static_cast<std::size_t>(std::max_element(rho_.begin(), rho_.end()) - rho_.begin())];
}

double EmpiricalProfile::deep_wing(double fraction) const {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::domain_error("deep_wing: fraction must be in (0, 1]");
  const double level = fraction * *std::max_element(rho_.begin(), rho_.end());
  for (std::size_t i = z_.size() - 1; i > 0; --i) {
    if (rho_[i - 1] >= level && rho_[i] < level) {
      const double t = (rho_[i - 1] - level) / (rho_[i - 1] - rho_[i]);
      return z_[i - 1] + t * (z_[i] - z_[i - 1]);
    }
    if (rho_[i] >= level) return z_[i];
  }
  return z_.front();
}

DepthEstimate EmpiricalProfile::estimate(double measured_rate_cps, const DepthOptions& options) const {
  check_rate(measured_rate_cps, total_);
  DepthEstimate out;
  const double peak = peak_depth();
  const double anchor = options.anchor == DepthAnchor::deep_wing ? deep_wing(options.wing_fraction) : peak;
  out.wing_nm = deep_wing(options.wing_fraction) - peak;
  if (measured_rate_cps == 0.0) {
    out.removed_nm = std::numeric_limits<double>::infinity();
    return out;
  }
  out.removed_nm = measured_rate_cps >= total_
                       ? 0.0
                       : bisect_decreasing([&](double s) { return remaining_rate(s); }, measured_rate_cps, 0.0,
                                           z_.back(), options.tolerance_nm);
  out.depth_nm = std::max(0.0, anchor - out.removed_nm);
  return out;
}

void to_json(nlohmann::json& j, const ImplantProfile& p) {
  j = {{"mean_depth_nm", p.mean_depth_nm},
       {"straggle_sigma_nm", p.straggle_sigma_nm},
       {"total_amplitude_cps", p.total_amplitude_cps}};
}

void from_json(const nlohmann::json& j, ImplantProfile& p) {
  ImplantProfile d;
  p.mean_depth_nm = j.value("mean_depth_nm", d.mean_depth_nm);
  p.straggle_sigma_nm = j.value("straggle_sigma_nm", d.straggle_sigma_nm);
  p.total_amplitude_cps = j.at("total_amplitude_cps").get<double>();
  p.validate();
}

void to_json(nlohmann::json& j, const DepthEstimate& d) {
  j = {{"removed_nm", d.removed_nm}, {"depth_nm", d.depth_nm}, {"wing_nm", d.wing_nm}};
}

} // namespace snv
