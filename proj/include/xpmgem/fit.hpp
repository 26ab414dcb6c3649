#pragma once

// One-parameter damped least squares (Eigen's Levenberg-Marquardt with a
// forward-difference Jacobian) and the two physics fits built on it:
// beam waist from phase-vs-energy data, and initial-state purity from a
// signal absorption spectrum.

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "xpmgem/model.hpp"
#include "xpmgem/observables.hpp"
#include "xpmgem/stark.hpp"

namespace xpmgem {

/// One measured point; sigma <= 0 means "unknown".
struct DataPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  double value = 0.0;
  double sigma = 0.0;        // 1 sigma from the curvature of the cost
  double rss = 0.0;          // sum of squared (weighted) residuals
  std::size_t n_points = 0;
  int evaluations = 0;
  bool converged = false;
  bool physical = true;
  std::string uncertainty_method;
};

namespace detail {

using ResidualFn = std::function<Eigen::VectorXd(double)>;

struct ScalarFunctor : Eigen::DenseFunctor<double> {
  ScalarFunctor(ResidualFn f, int m) : Eigen::DenseFunctor<double>(1, m), fn(std::move(f)) {}
  int operator()(const InputType& x, ValueType& fvec) const {
    fvec = fn(x(0));
    return fvec.allFinite() ? 0 : -1;
  }
  ResidualFn fn;
};

inline bool weighted(const std::vector<DataPoint>& data) {
  for (const auto& p : data)
    if (!(p.sigma > 0)) return false;
  return !data.empty();
}

}  // namespace detail

/// Minimizes |r(p)|^2 over a scalar p starting from p0. With `absolute_sigma`
/// the residuals are taken as already normalized by known errors; otherwise
/// the variance is rescaled by the reduced chi^2.
inline FitResult least_squares_1d(const detail::ResidualFn& residuals, double p0, std::size_t m,
                                  bool absolute_sigma, int max_evaluations = 400) {
  if (m < 2) throw FitError("need at least two residuals");
  detail::ScalarFunctor functor(residuals, static_cast<int>(m));
  Eigen::NumericalDiff<detail::ScalarFunctor> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::ScalarFunctor>> lm(numdiff);
  lm.setMaxfev(max_evaluations);
  lm.setXtol(1e-12);
  lm.setFtol(1e-14);
  Eigen::VectorXd x(1);
  x(0) = p0;
  const auto status = lm.minimize(x);

  FitResult r;
  r.value = x(0);
  r.n_points = m;
  r.evaluations = static_cast<int>(lm.nfev());
  using S = Eigen::LevenbergMarquardtSpace::Status;
  r.converged = status != S::ImproperInputParameters && status != S::TooManyFunctionEvaluation &&
                status != S::UserAsked && std::isfinite(r.value);
  if (!r.converged) {
    std::ostringstream os;
    os << "least squares did not converge (status " << static_cast<int>(status) << ")";
    throw FitError(os.str());
  }

  const Eigen::VectorXd res = residuals(r.value);
  r.rss = res.squaredNorm();
  const double h = 1e-6 * std::max(std::abs(r.value), 1e-3);
  const Eigen::VectorXd jac = (residuals(r.value + h) - residuals(r.value - h)) / (2.0 * h);
  const double jtj = jac.squaredNorm();
  if (!(jtj > 0) || !std::isfinite(jtj)) throw FitError("fit parameter is not constrained by the data");
  if (absolute_sigma) {
    r.sigma = std::sqrt(1.0 / jtj);
    r.uncertainty_method = "inverse curvature with supplied point errors";
  } else {
    const double s2 = r.rss / static_cast<double>(m - 1);
    r.sigma = std::sqrt(s2 / jtj);
    r.uncertainty_method = "inverse curvature scaled by residual variance";
  }
  return r;
}

/// Closed-form phase at each energy for a given waist.
inline double model_phase_at(const SignalPulse& tmpl, double energy, double waist,
                             EnergyScaling scaling, const PhysicalParams& params) {
  SignalPulse s = with_energy(tmpl, energy, scaling);
  s.waist = waist;
  return stark_phase(s, params);
}

/// Beam waist (m) that makes the closed-form model match (energy J, phase rad)
/// data. The template supplies detuning, duration/power and profile.
inline FitResult fit_waist(const std::vector<DataPoint>& measured, const SignalPulse& tmpl,
                           const PhysicalParams& params,
                           EnergyScaling scaling = EnergyScaling::fixed_power) {
  if (measured.size() < 3) throw FitError("waist fit needs at least 3 points");
  bool any = false;
  for (const auto& p : measured) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw FitError("non-finite data point");
    any = any || p.y != 0.0;
  }
  if (!any) throw FitError("degenerate data: every phase is zero");

  // phi is proportional to E / w^2; start from the slope ratio at w = 1 um.
  double sxy = 0, sxx = 0;
  for (const auto& p : measured) {
    const double m1 = model_phase_at(tmpl, p.x, um_to_m(1.0), scaling, params);
    sxy += p.y * m1;
    sxx += m1 * m1;
  }
  if (!(sxy > 0)) throw FitError("data phase sign disagrees with the signal detuning");
  const double w0_um = std::sqrt(sxx / sxy);

  const bool abs_sigma = detail::weighted(measured);
  auto residuals = [&](double w_um) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(measured.size()));
    for (std::size_t i = 0; i < measured.size(); ++i) {
      const auto& p = measured[i];
      const double model = model_phase_at(tmpl, p.x, um_to_m(std::abs(w_um)), scaling, params);
      r(static_cast<Eigen::Index>(i)) = (model - p.y) / (abs_sigma ? p.sigma : 1.0);
    }
    return r;
  };
  FitResult r = least_squares_1d(residuals, w0_um, measured.size(), abs_sigma);
  r.value = um_to_m(std::abs(r.value));
  r.sigma = um_to_m(r.sigma);
  return r;
}

/// Model transmission at each measured detuning for a given initial purity.
/// Purity outside [0, 1] is evaluated as-is so a fit can report it.
inline std::vector<double> absorption_model(double purity, const std::vector<DataPoint>& data,
                                            const PhysicalParams& params,
                                            const AbsorptionOptions& opt) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& p : data)
    out.push_back(detail::transmitted_fraction(1.0 - purity, p.x, params, opt));
  return out;
}

/// Sum of squared transmission residuals at a fixed purity.
inline double absorption_rss(const std::vector<DataPoint>& data, double purity,
                             const PhysicalParams& params, const AbsorptionOptions& opt = {}) {
  const auto model = absorption_model(purity, data, params, opt);
  double rss = 0;
  for (std::size_t i = 0; i < data.size(); ++i) rss += (model[i] - data[i].y) * (model[i] - data[i].y);
  return rss;
}

/// Initial-state purity from (detuning rad/s, transmitted fraction) data.
/// The fit runs on the impurity in percent; a best fit outside [0, 1] is
/// returned with physical = false.
inline FitResult fit_impurity(const std::vector<DataPoint>& data, const PhysicalParams& params,
                              const AbsorptionOptions& opt = {}) {
  if (data.size() < 3) throw FitError("impurity fit needs at least 3 detuning points");
  for (const auto& p : data)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw FitError("non-finite data point");

  // Coarse scan for a starting point, then refine.
  double best_q = 0.0, best_rss = std::numeric_limits<double>::infinity();
  for (double q : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double rss = absorption_rss(data, 1.0 - q / 100.0, params, opt);
    if (rss < best_rss) {
      best_rss = rss;
      best_q = q;
    }
  }
  const bool abs_sigma = detail::weighted(data);
  auto residuals = [&](double q_percent) {
    const auto model = absorption_model(1.0 - q_percent / 100.0, data, params, opt);
    Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
      r(static_cast<Eigen::Index>(i)) = (model[i] - data[i].y) / (abs_sigma ? data[i].sigma : 1.0);
    return r;
  };
  FitResult r = least_squares_1d(residuals, best_q == 0.0 ? 0.1 : best_q, data.size(), abs_sigma);
  r.value = 1.0 - r.value / 100.0;
  r.sigma /= 100.0;
  r.physical = r.value >= 0.0 && r.value <= 1.0;
  return r;
}

/// Least-squares slope of y = k x (no intercept) with its 1 sigma.
struct SlopeFit {
  double slope = 0.0;
  double sigma = 0.0;
  std::size_t n_points = 0;
};

inline SlopeFit fit_through_origin(const std::vector<DataPoint>& pts) {
  double sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    sxx += p.x * p.x;
    sxy += p.x * p.y;
  }
  if (!(sxx > 0)) throw FitError("slope fit needs nonzero abscissae");
  SlopeFit f;
  f.n_points = pts.size();
  f.slope = sxy / sxx;
  if (pts.size() > 1) {
    double rss = 0;
    for (const auto& p : pts) rss += (p.y - f.slope * p.x) * (p.y - f.slope * p.x);
    f.sigma = std::sqrt(rss / static_cast<double>(pts.size() - 1) / sxx);
  }
  return f;
}

}  // namespace xpmgem
