#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snv/fit.hpp"
#include "snv/photon_sim.hpp"
#include "snv/units.hpp"

namespace snv {

/// Normalised cross-correlation of detector 1 against detector 0.
/// tau > 0 means the channel-1 event came later.
struct CorrelationCurve {
  std::vector<double> tau_ns;   // bin centres, symmetric around 0
  std::vector<double> g2;
  std::vector<double> error;    // Poisson, 1 sigma
  std::vector<double> counts;   // raw coincidences; empty for curves not built from a stream
  double bin_width_ns = 0.0;
  double normalization = 0.0;   // expected uncorrelated coincidences per bin, r0 r1 T dt
  double rate0_cps = 0.0, rate1_cps = 0.0;
};

/// Streaming all-pairs coincidence counter. Records must arrive in time order.
class G2Accumulator {
public:
  G2Accumulator(double bin_width_ns, double window_ns);

  void add(const PhotonRecord& r);
  /// Builds the normalised curve for an acquisition of `duration_ps`.
  CorrelationCurve finish(std::int64_t duration_ps) const;

private:
  std::int64_t bin_ps_, half_bins_;
  std::int64_t window_ps_;
  std::vector<double> hist_;
  std::deque<PhotonRecord> recent_;
  std::uint64_t n_[2] = {0, 0};
  std::int64_t last_ = -1;
};

/// Throws std::invalid_argument for an empty stream or when either channel is unused.
CorrelationCurve g2_histogram(const PhotonStream& stream, double bin_width_ns, double window_ns);

/// g2(tau) = 1 - (1 - g2_0) exp(-|tau|/tau_anti), averaged over each bin.
/// Poisson likelihood on the raw coincidences when available.
FitResult fit_g2(const CorrelationCurve& curve);
/// Bin-averaged model value for one bin [lo, hi] (ns).
double g2_model_bin_average(double lo_ns, double hi_ns, double g2_0, double tau_anti_ns);

struct LifetimeFitOptions {
  bool fit_background = true;
};

/// Poisson maximum-likelihood fit of A exp(-t/tau) + B from the peak bin on.
FitResult fit_lifetime(const TcspcHistogram& hist, const LifetimeFitOptions& options = {});

struct SaturationPoint {
  double power_uw;
  double rate_cps;
};

struct SaturationOptions {
  bool fit_linear_background = false;
  std::vector<double> sigma; // optional per-point errors
};

/// R(P) = I_inf P/(P + P_sat) + m P.
FitResult fit_saturation(std::span<const SaturationPoint> points, const SaturationOptions& options = {});

struct PolarizationScan {
  std::vector<double> angles_deg; // half-wave-plate angle
  std::vector<double> counts_cps;
  double dark_rate_cps = 0.0;
};

/// R(theta) = A cos^2(2 (theta - theta0)) + B after dark subtraction.
/// theta0 in [0, 90) plate degrees; derived: visibility, dipole_angle_deg (= 2 theta0).
/// Throws std::invalid_argument if the plate angles span less than 90 degrees.
FitResult fit_polarization(const PolarizationScan& scan);

void to_json(nlohmann::json& j, const CorrelationCurve& c);
void to_json(nlohmann::json& j, const TcspcHistogram& h);

} // namespace snv
