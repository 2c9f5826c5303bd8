#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace snv {

/// Outcome of any nonlinear fit. Parameters are addressed by name.
struct FitResult {
  std::string model;
  std::vector<std::string> names;
  std::vector<double> values;
  Eigen::MatrixXd covariance; // over all parameters; fixed ones have zero rows/cols
  double chi2 = 0.0;          // weighted SSR, or Poisson deviance
  double reduced_chi2 = 0.0;
  int dof = 0;
  int n_iterations = 0;
  bool converged = false;
  std::vector<std::string> flags; // e.g. "degenerate", "insufficient_span"
  // Range of the independent variable the fit saw (used by inverters).
  double domain_min = std::numeric_limits<double>::quiet_NaN();
  double domain_max = std::numeric_limits<double>::quiet_NaN();
  // Quantities computed from the parameters (e.g. DW(0), phonon energy).
  std::vector<std::pair<std::string, double>> derived;

  std::size_t index(std::string_view name) const; // throws std::out_of_range
  bool has(std::string_view name) const;
  double value(std::string_view name) const;
  double error(std::string_view name) const;
  bool has_flag(std::string_view flag) const;
  void add_flag(std::string flag);
  double derived_value(std::string_view name) const;
};

void to_json(nlohmann::json& j, const FitResult& r);
void from_json(const nlohmann::json& j, FitResult& r);

enum class Objective { least_squares, poisson };

/// Problem statement for the damped Gauss-Newton (Levenberg-Marquardt) solver.
/// The model writes predictions for every data point into `out`.
struct FitProblem {
  using Model = std::function<void(std::span<const double> params, std::span<double> out)>;

  std::vector<std::string> names;
  std::vector<double> initial;
  std::vector<double> lower; // empty = unbounded
  std::vector<double> upper;
  std::vector<bool> fixed;   // empty = all free
  std::vector<double> step_scale; // >0 floor for the finite-difference step; empty = from `initial`
  Model model;
  std::span<const double> y;
  std::span<const double> sigma; // empty = unit weights (covariance then scaled by reduced chi2)
  Objective objective = Objective::least_squares;
};

struct LmOptions {
  int max_iterations = 500;
  double ftol = 1e-15; // relative cost change
  double xtol = 1e-13; // relative parameter step
  double gtol = 1e-16;
  double initial_lambda = 1e-3;
  double fd_relative_step = 1e-6;
};

/// Minimises the weighted sum of squares or the Poisson deviance. Jacobians by
/// central differences. Never throws for non-convergence; check `converged`.
FitResult levenberg_marquardt(const FitProblem& problem, const LmOptions& options = {});

/// Weighted linear least squares y ~ X b; returns b. Used for starting values.
Eigen::VectorXd linear_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& weights = {});

} // namespace snv
