#include "snv/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace snv {

std::size_t FitResult::index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::out_of_range("FitResult: no parameter '" + std::string(name) + "'");
}

bool FitResult::has(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double FitResult::value(std::string_view name) const { return values[index(name)]; }

double FitResult::error(std::string_view name) const {
  const auto i = static_cast<Eigen::Index>(index(name));
  if (covariance.rows() <= i) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(std::max(0.0, covariance(i, i)));
}

bool FitResult::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void FitResult::add_flag(std::string flag) {
  if (!has_flag(flag)) flags.push_back(std::move(flag));
}

double FitResult::derived_value(std::string_view name) const {
  for (const auto& [k, v] : derived)
    if (k == name) return v;
  throw std::out_of_range("FitResult: no derived quantity '" + std::string(name) + "'");
}

void to_json(nlohmann::json& j, const FitResult& r) {
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i)
    params[r.names[i]] = {{"value", r.values[i]}, {"error", r.error(r.names[i])}};
  std::vector<std::vector<double>> cov(static_cast<std::size_t>(r.covariance.rows()));
  for (Eigen::Index a = 0; a < r.covariance.rows(); ++a)
    for (Eigen::Index b = 0; b < r.covariance.cols(); ++b) cov[static_cast<std::size_t>(a)].push_back(r.covariance(a, b));
  nlohmann::json derived = nlohmann::json::object();
  for (const auto& [k, v] : r.derived) derived[k] = v;
  j = {{"model", r.model},
       {"names", r.names},
       {"params", params},
       {"covariance", cov},
       {"chi2", r.chi2},
       {"reduced_chi2", r.reduced_chi2},
       {"dof", r.dof},
       {"n_iterations", r.n_iterations},
       {"converged", r.converged},
       {"flags", r.flags},
       {"derived", derived}};
  if (std::isfinite(r.domain_min)) j["domain"] = {r.domain_min, r.domain_max};
}

void from_json(const nlohmann::json& j, FitResult& r) {
  r = FitResult{};
  r.model = j.at("model").get<std::string>();
  r.names = j.at("names").get<std::vector<std::string>>();
  for (const auto& n : r.names) r.values.push_back(j.at("params").at(n).at("value").get<double>());
  const auto k = static_cast<Eigen::Index>(r.names.size());
  r.covariance = Eigen::MatrixXd::Zero(k, k);
  if (j.contains("covariance")) {
    const auto cov = j.at("covariance").get<std::vector<std::vector<double>>>();
    for (Eigen::Index a = 0; a < k && a < static_cast<Eigen::Index>(cov.size()); ++a)
      for (Eigen::Index b = 0; b < k && b < static_cast<Eigen::Index>(cov[static_cast<std::size_t>(a)].size()); ++b)
        r.covariance(a, b) = cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
  r.chi2 = j.value("chi2", 0.0);
  r.reduced_chi2 = j.value("reduced_chi2", 0.0);
  r.dof = j.value("dof", 0);
  r.n_iterations = j.value("n_iterations", 0);
  r.converged = j.value("converged", false);
  r.flags = j.value("flags", std::vector<std::string>{});
  if (j.contains("derived"))
    for (const auto& [key, v] : j.at("derived").items()) r.derived.emplace_back(key, v.get<double>());
  if (j.contains("domain")) {
    r.domain_min = j.at("domain").at(0).get<double>();
    r.domain_max = j.at("domain").at(1).get<double>();
  }
}

namespace {

struct Evaluation {
  double cost = 0.0;
  Eigen::VectorXd model;
};

class Solver {
public:
  Solver(const FitProblem& pb, const LmOptions& opt) : pb_(pb), opt_(opt) {
    n_ = pb.y.size();
    np_ = pb.initial.size();
    if (pb.names.size() != np_) throw std::invalid_argument("fit: names/initial size mismatch");
    if (!pb.model) throw std::invalid_argument("fit: no model");
    if (!pb.sigma.empty() && pb.sigma.size() != n_) throw std::invalid_argument("fit: sigma size mismatch");
    for (std::size_t i = 0; i < np_; ++i)
      if (pb.fixed.empty() || !pb.fixed[i]) free_.push_back(i);
    lower_.assign(np_, -std::numeric_limits<double>::infinity());
    upper_.assign(np_, std::numeric_limits<double>::infinity());
    if (!pb.lower.empty()) lower_ = pb.lower;
    if (!pb.upper.empty()) upper_ = pb.upper;
    scale_.resize(np_);
    for (std::size_t i = 0; i < np_; ++i) {
      if (!pb.step_scale.empty() && pb.step_scale[i] > 0.0)
        scale_[i] = pb.step_scale[i];
      else
        scale_[i] = pb.initial[i] != 0.0 ? std::abs(pb.initial[i]) : 1.0;
    }
  }

  FitResult run() {
    FitResult out;
    out.names = pb_.names;
    std::vector<double> p = pb_.initial;
    for (std::size_t i = 0; i < np_; ++i) p[i] = std::clamp(p[i], lower_[i], upper_[i]);
    const auto k = free_.size();
    out.dof = static_cast<int>(n_) - static_cast<int>(k);

    Evaluation cur = evaluate(p);
    if (!std::isfinite(cur.cost)) {
      out.values = p;
      out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np_), static_cast<Eigen::Index>(np_));
      out.chi2 = cur.cost;
      out.add_flag("invalid_start");
      return out;
    }

    double lambda = opt_.initial_lambda;
    bool converged = k == 0;
    int iter = 0;
    Eigen::MatrixXd a;
    Eigen::VectorXd g;
    bool need_jacobian = true;
    std::vector<bool> active;

    while (!converged && iter < opt_.max_iterations) {
      if (need_jacobian) {
        normal_equations(p, cur, a, g);
        need_jacobian = false;
        // parameters on a bound whose gradient points outward stay put
        active.assign(k, false);
        for (std::size_t j = 0; j < k; ++j) {
          const auto idx = free_[j];
          const double gj = g[static_cast<Eigen::Index>(j)];
          active[j] = (p[idx] <= lower_[idx] && gj < 0.0) || (p[idx] >= upper_[idx] && gj > 0.0);
        }
        double gmax = 0.0;
        for (std::size_t j = 0; j < k; ++j)
          if (!active[j]) gmax = std::max(gmax, std::abs(g[static_cast<Eigen::Index>(j)]));
        if (gmax <= opt_.gtol * std::max(cur.cost, 1e-300) || cur.cost == 0.0) {
          converged = true;
          break;
        }
      }
      ++iter;
      Eigen::VectorXd diag = a.diagonal();
      const double dmax = std::max(diag.maxCoeff(), 1e-300);
      for (Eigen::Index i = 0; i < diag.size(); ++i) diag[i] = std::max(diag[i], 1e-15 * dmax);
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * diag;
      Eigen::VectorXd rhs = g;
      for (std::size_t j = 0; j < k; ++j) {
        if (!active[j]) continue;
        const auto jj = static_cast<Eigen::Index>(j);
        damped.row(jj).setZero();
        damped.col(jj).setZero();
        damped(jj, jj) = 1.0;
        rhs[jj] = 0.0;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      Eigen::VectorXd delta = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
        lambda *= 10.0;
        if (lambda > 1e20) break;
        continue;
      }
      std::vector<double> trial = p;
      for (std::size_t j = 0; j < k; ++j) {
        const auto idx = free_[j];
        trial[idx] = std::clamp(p[idx] + delta[static_cast<Eigen::Index>(j)], lower_[idx], upper_[idx]);
      }
      Evaluation next = evaluate(trial);
      if (std::isfinite(next.cost) && next.cost <= cur.cost) {
        double step_norm = 0.0, p_norm = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          const auto idx = free_[j];
          const double s = scale_[idx];
          step_norm += std::pow((trial[idx] - p[idx]) / s, 2);
          p_norm += std::pow(trial[idx] / s, 2);
        }
        step_norm = std::sqrt(step_norm);
        p_norm = std::sqrt(p_norm);
        const double reduction = cur.cost - next.cost;
        p = std::move(trial);
        cur = std::move(next);
        lambda = std::max(lambda / 10.0, 1e-15);
        need_jacobian = true;
        if (cur.cost <= 1e-300 || step_norm <= opt_.xtol * (p_norm + opt_.xtol) ||
            reduction <= opt_.ftol * cur.cost)
          converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e20) {
          // No downhill step at any damping: stationary to machine precision.
          converged = true;
          break;
        }
      }
    }

    normal_equations(p, cur, a, g);
    out.values = p;
    out.chi2 = cur.cost;
    out.n_iterations = iter;
    out.converged = converged;
    out.reduced_chi2 = out.dof > 0 ? cur.cost / out.dof : 0.0;
    out.covariance = covariance(a, out);
    return out;
  }

private:
  Evaluation evaluate(const std::vector<double>& p) const {
    Evaluation e;
    e.model.resize(static_cast<Eigen::Index>(n_));
    pb_.model(p, std::span<double>(e.model.data(), n_));
    double c = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double m = e.model[static_cast<Eigen::Index>(i)];
      const double y = pb_.y[i];
      if (!std::isfinite(m)) return {std::numeric_limits<double>::infinity(), {}};
      if (pb_.objective == Objective::least_squares) {
        const double s = pb_.sigma.empty() ? 1.0 : pb_.sigma[i];
        const double r = (y - m) / s;
        c += r * r;
      } else {
        if (m <= 0.0) {
          if (y > 0.0 || m < 0.0) return {std::numeric_limits<double>::infinity(), {}};
          continue;
        }
        c += 2.0 * (m - y + (y > 0.0 ? y * std::log(y / m) : 0.0));
      }
    }
    e.cost = c;
    return e;
  }

  Eigen::MatrixXd jacobian(const std::vector<double>& p) const {
    const auto k = free_.size();
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(k));
    std::vector<double> plus(n_), minus(n_);
    for (std::size_t j = 0; j < k; ++j) {
      const auto idx = free_[j];
      const double h = opt_.fd_relative_step * std::max(std::abs(p[idx]), scale_[idx]);
      std::vector<double> pp = p, pm = p;
      double hp = h, hm = h;
      if (p[idx] + h > upper_[idx]) hp = 0.0;
      if (p[idx] - h < lower_[idx]) hm = 0.0;
      if (hp == 0.0 && hm == 0.0) hp = hm = 0.5 * std::min(upper_[idx] - p[idx], p[idx] - lower_[idx]);
      pp[idx] += hp;
      pm[idx] -= hm;
      pb_.model(pp, plus);
      pb_.model(pm, minus);
      for (std::size_t i = 0; i < n_; ++i)
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (plus[i] - minus[i]) / (hp + hm);
    }
    return jac;
  }

  void normal_equations(const std::vector<double>& p, const Evaluation& e, Eigen::MatrixXd& a,
                        Eigen::VectorXd& g) const {
    Eigen::MatrixXd jac = jacobian(p);
    Eigen::VectorXd w(static_cast<Eigen::Index>(n_));
    Eigen::VectorXd r(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double m = e.model[ii];
      if (pb_.objective == Objective::least_squares) {
        const double s = pb_.sigma.empty() ? 1.0 : pb_.sigma[i];
        w[ii] = 1.0 / (s * s);
        r[ii] = pb_.y[i] - m;
      } else {
        const double mm = std::max(m, 1e-300);
        w[ii] = 1.0 / mm;
        r[ii] = pb_.y[i] - m;
      }
    }
    a = jac.transpose() * w.asDiagonal() * jac;
    g = jac.transpose() * (w.asDiagonal() * r);
  }

  Eigen::MatrixXd covariance(const Eigen::MatrixXd& a, FitResult& out) const {
    const auto np = static_cast<Eigen::Index>(np_);
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(np, np);
    const auto k = static_cast<Eigen::Index>(free_.size());
    if (k == 0) return full;
    Eigen::VectorXd d = a.diagonal().cwiseMax(0.0).cwiseSqrt();
    bool singular = false;
    for (Eigen::Index i = 0; i < k; ++i)
      if (!(d[i] > 0.0)) {
        singular = true;
        d[i] = 1.0;
      }
    Eigen::MatrixXd corr = d.cwiseInverse().asDiagonal() * a * d.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::VectorXd inv_ev(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (ev[i] <= 1e-10 * std::max(ev.maxCoeff(), 1e-300)) {
        singular = true;
        inv_ev[i] = 0.0;
      } else {
        inv_ev[i] = 1.0 / ev[i];
      }
    }
    Eigen::MatrixXd corr_inv = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
    Eigen::MatrixXd cov = d.cwiseInverse().asDiagonal() * corr_inv * d.cwiseInverse().asDiagonal();
    if (pb_.objective == Objective::least_squares && pb_.sigma.empty() && out.dof > 0)
      cov *= out.reduced_chi2;
    cov = 0.5 * (cov + cov.transpose());
    if (singular) out.add_flag("singular_covariance");
    for (Eigen::Index a_i = 0; a_i < k; ++a_i)
      for (Eigen::Index b_i = 0; b_i < k; ++b_i)
        full(static_cast<Eigen::Index>(free_[static_cast<std::size_t>(a_i)]),
             static_cast<Eigen::Index>(free_[static_cast<std::size_t>(b_i)])) = cov(a_i, b_i);
    return full;
  }

  const FitProblem& pb_;
  const LmOptions& opt_;
  std::size_t n_ = 0, np_ = 0;
  std::vector<std::size_t> free_;
  std::vector<double> lower_, upper_, scale_;
};

} // namespace

FitResult levenberg_marquardt(const FitProblem& problem, const LmOptions& options) {
  return Solver(problem, options).run();
}

Eigen::VectorXd linear_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& weights) {
  if (weights.size() == 0) return x.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd sw = weights.cwiseSqrt();
  const Eigen::MatrixXd xw = sw.asDiagonal() * x;
  const Eigen::VectorXd yw = sw.asDiagonal() * y;
  return xw.colPivHouseholderQr().solve(yw);
}

} // namespace snv
