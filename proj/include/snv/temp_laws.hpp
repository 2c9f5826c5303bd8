#pragma once

#include <optional>
#include <vector>

#include "snv/fit.hpp"

namespace snv {

struct TempPoint {
  double t_k = 0.0;
  std::optional<double> linewidth_ghz, linewidth_err;
  std::optional<double> shift_ghz, shift_err;
  std::optional<double> dw, dw_err;
};

/// Per-temperature observables. The true sample temperature is the recorded
/// one plus `t_offset_k` (filled in by fits that estimate it).
struct TempSeries {
  std::vector<TempPoint> entries;
  double t_offset_k = 0.0;

  /// T strictly increasing and errors > 0 where present.
  void validate() const;
};

enum class LinewidthModel { T3, T_plus_T3, T3_plus_T5 };
enum class Observable { linewidth, shift };

const char* to_string(LinewidthModel m);
LinewidthModel linewidth_model_from_string(const std::string& s);

struct SeriesFitOptions {
  bool fit_offset = false; // shared temperature offset T0
  double initial_offset_k = 0.0;
};

/// Gamma = gamma0 + c_linear T + c_cubic T^3 (+ c_quintic T^5), T = T_rec + T0.
/// Throws std::invalid_argument for fewer than 4 points or a span below x3.
FitResult fit_linewidth_series(const TempSeries& series, LinewidthModel model, const SeriesFitOptions& options = {});

/// Every linewidth model on the same data, for reduced-chi2 comparison.
std::vector<FitResult> compare_linewidth_models(const TempSeries& series, const SeriesFitOptions& options = {});

/// Delta = alpha T^2 + beta T^4.
FitResult fit_shift_series(const TempSeries& series, const SeriesFitOptions& options = {});

/// DW(T) = exp(-S (1 + 2 pi^2/3 T^2/T_cutoff^2)). Derived: dw0, phonon_energy_mev.
/// Throws std::invalid_argument for DW values outside (0, 1].
FitResult fit_dw_series(const TempSeries& series);

/// Law value at true temperature T (offset not applied).
double evaluate_law(const FitResult& law, double t_k);

struct ThermometerReading {
  double t_k = 0.0;
  double sigma_k = 0.0;
  double ci_low_k = 0.0;
  double ci_high_k = 0.0;
  double confidence = 0.95;
};

struct InversionOptions {
  double value_error = 0.0; // 1 sigma uncertainty of the observable
  double confidence = 0.95;
  std::optional<std::pair<double, double>> range_k; // explicit monotone range (required for shift laws)
};

/// Solves law(T) = value by bisection over the fitted range extended by 10%.
/// CI by first-order propagation of the law covariance.
/// Throws std::range_error when the value is unreachable in the bracket and
/// std::domain_error when the law is not monotone there.
ThermometerReading invert_thermometer(Observable observable, double value_ghz, const FitResult& law,
                                      const InversionOptions& options = {});

/// Two-sided standard normal quantile for the given confidence.
double normal_two_sided_quantile(double confidence);

} // namespace snv
