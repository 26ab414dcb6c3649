#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace xpmgem;

namespace {

std::vector<DataPoint> waist_data(double waist, double rel_noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<DataPoint> pts;
  for (double e_pj : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0}) {
    const double e = pj_to_joule(e_pj);
    const double y = model_phase_at(SignalPulse{}, e, waist, EnergyScaling::fixed_power, {});
    const double sigma = rel_noise * std::abs(y);
    pts.push_back({e, y + sigma * n(rng), sigma});
  }
  return pts;
}

std::vector<DataPoint> absorption_data(double purity, const AbsorptionOptions& opt) {
  std::vector<DataPoint> pts;
  for (double d : AbsorptionSettings{}.delta_grid()) pts.push_back({d, 0.0, 0.0});
  const auto model = absorption_model(purity, pts, {}, opt);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].y = model[i];
  return pts;
}

AbsorptionOptions quick_absorption() {
  AbsorptionOptions o;
  o.n_z = 48;
  return o;
}

}  // namespace

TEST(FitWaist, NoiselessRoundTrip) {
  for (double w_um : {190.0, 150.0}) {
    auto pts = waist_data(um_to_m(w_um), 0.0, 1);
    for (auto& p : pts) p.sigma = 0;
    const auto r = fit_waist(pts, SignalPulse{}, {});
    EXPECT_NEAR(r.value, um_to_m(w_um), 1e-3 * um_to_m(w_um));
    EXPECT_TRUE(r.converged);
  }
}

TEST(FitWaist, MonteCarloCoverage) {
  const double w = um_to_m(190.0);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = fit_waist(waist_data(w, 0.10, seed), SignalPulse{}, {});
    if (std::abs(r.value - w) <= r.sigma) ++inside;
  }
  EXPECT_GE(inside, 68);
}

TEST(FitWaist, PaperLikeDataLandsInMeasuredBand) {
  // ten energies up to 5 pJ, 10% scatter, generated at the measured waist
  const auto r = fit_waist(waist_data(um_to_m(150.0), 0.10, 2024), SignalPulse{}, {});
  EXPECT_GE(r.value, um_to_m(110.0));
  EXPECT_LE(r.value, um_to_m(190.0));
}

TEST(FitWaist, DegenerateInputs) {
  std::vector<DataPoint> zeros = {{1e-12, 0, 0}, {2e-12, 0, 0}, {3e-12, 0, 0}};
  EXPECT_THROW(fit_waist(zeros, SignalPulse{}, {}), FitError);
  auto pts = waist_data(um_to_m(190.0), 0.0, 1);
  pts.resize(2);
  EXPECT_THROW(fit_waist(pts, SignalPulse{}, {}), FitError);
  pts = waist_data(um_to_m(190.0), 0.0, 1);
  for (auto& p : pts) p.y = -p.y;
  EXPECT_THROW(fit_waist(pts, SignalPulse{}, {}), FitError);
}

TEST(FitImpurity, RoundTrip) {
  const auto opt = quick_absorption();
  const auto r = fit_impurity(absorption_data(0.98, opt), {}, opt);
  EXPECT_NEAR(r.value, 0.98, 0.005);
  EXPECT_NEAR(r.value, 0.98, 1e-3 * 0.98);
  EXPECT_TRUE(r.physical);
}

TEST(FitImpurity, PureStateData) {
  const auto opt = quick_absorption();
  const auto r = fit_impurity(absorption_data(1.0, opt), {}, opt);
  EXPECT_GE(r.value, 0.995);
}

TEST(FitImpurity, NoisyRoundTrip) {
  const auto opt = quick_absorption();
  auto pts = absorption_data(0.98, opt);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.005);
  for (auto& p : pts) p.y += n(rng);
  const auto r = fit_impurity(pts, {}, opt);
  EXPECT_NEAR(r.value, 0.98, 0.005);
  EXPECT_GT(r.sigma, 0.0);
}

TEST(FitImpurity, CurvesAreDistinguishable) {
  const auto opt = quick_absorption();
  const auto data = absorption_data(0.99, opt);
  const double at99 = absorption_rss(data, 0.99, {}, opt);
  EXPECT_LT(at99, 1e-20);
  EXPECT_GT(absorption_rss(data, 1.0, {}, opt), 1e-3);
  EXPECT_GT(absorption_rss(data, 0.98, {}, opt), 1e-3);
}

TEST(FitImpurity, TooFewPoints) {
  EXPECT_THROW(fit_impurity({{0, 0.5, 0}, {1e7, 0.9, 0}}, {}), FitError);
}

TEST(FitThroughOrigin, RecoversSlope) {
  std::vector<DataPoint> pts;
  for (int i = 1; i <= 6; ++i) pts.push_back({i * 1e-12, -2.8e11 * i * 1e-12, 0});
  const auto f = fit_through_origin(pts);
  EXPECT_NEAR(f.slope, -2.8e11, 1e-10 * 2.8e11);
  EXPECT_NEAR(f.sigma, 0.0, 1e-3);
  EXPECT_EQ(f.n_points, 6u);
  EXPECT_THROW(fit_through_origin({{0, 1, 0}}), FitError);
}

TEST(LeastSquares, UnconstrainedParameter) {
  auto flat = [](double) { return Eigen::VectorXd::Constant(4, 1.0); };
  EXPECT_THROW(least_squares_1d(flat, 1.0, 4, false), FitError);
}
