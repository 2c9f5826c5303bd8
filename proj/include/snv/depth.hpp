#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace snv {

/// Gaussian implantation profile below the original (unremoved) surface.
/// `total_amplitude_cps` is the count rate of the complete profile.
struct ImplantProfile {
  double mean_depth_nm = 168.0;
  double straggle_sigma_nm = 30.0; // placeholder default, pass a simulated value
  double total_amplitude_cps = 1.0;

  void validate() const;
  /// Emitter density (cps per nm) at depth z below the original surface, normalised over (0, inf).
  double density(double z_nm) const;
  /// Count rate left after removing `removed_nm` of material from the top.
  double remaining_rate(double removed_nm) const;
};

ImplantProfile normalize_profile(double reference_rate_cps, double mean_depth_nm, double straggle_sigma_nm = 30.0);

/// sigma * sqrt(-2 ln fraction). Throws std::domain_error outside (0, 1].
double wing_depth(const ImplantProfile& p, double fraction = 0.01);

enum class DepthAnchor {
  deep_wing, // new surface to where the deep wing falls to `wing_fraction` of the maximum
  peak,      // new surface to the profile maximum
};

struct DepthOptions {
  DepthAnchor anchor = DepthAnchor::deep_wing;
  double wing_fraction = 0.01;
  double tolerance_nm = 1e-6;
};

struct DepthEstimate {
  double removed_nm = 0.0; // material removed from the original surface
  double depth_nm = 0.0;   // ensemble depth below the new surface
  double wing_nm = 0.0;    // peak-to-wing distance used
};

/// Throws std::range_error when the rate exceeds the full profile and
/// std::domain_error for negative rates. A zero rate gives depth 0.
DepthEstimate estimate_depth(const ImplantProfile& p, double measured_rate_cps, const DepthOptions& options = {});

/// Ensemble depth with the default deep-wing anchor.
double depth_from_countrate(const ImplantProfile& p, double measured_rate_cps);

/// Tabulated depth histogram (e.g. from an ion-range simulation) scaled to
/// `total_amplitude_cps`, linear between samples, zero outside.
class EmpiricalProfile {
public:
  EmpiricalProfile(std::vector<double> depth_nm, std::vector<double> density, double total_amplitude_cps);

  double total_amplitude() const { return total_; }
  double remaining_rate(double removed_nm) const;
  double peak_depth() const;
  /// Deepest depth at which the density equals `fraction` of its maximum.
  double deep_wing(double fraction) const;

  DepthEstimate estimate(double measured_rate_cps, const DepthOptions& options = {}) const;

private:
  std::vector<double> z_, rho_, cum_; // cum_ = integral from z_.front() to z_[i], scaled
  double total_;
};

void to_json(nlohmann::json& j, const ImplantProfile& p);
void from_json(const nlohmann::json& j, ImplantProfile& p);
void to_json(nlohmann::json& j, const DepthEstimate& d);

} // namespace snv
