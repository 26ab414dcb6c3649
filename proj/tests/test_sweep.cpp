#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"

using namespace xpmgem;
using testing_helpers::coarse_config;

namespace {

SweepSpec energy_spec(std::vector<double> pj, ModelSelect model) {
  SweepSpec s;
  s.base = coarse_config();
  s.model = model;
  for (double e : pj) s.grid.push_back(pj_to_joule(e));
  return s;
}

}  // namespace

TEST(Sweep, ZeroEnergyRowHasZeroPhase) {
  const auto r = run_sweep(energy_spec({0.0}, ModelSelect::both));
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].model, ModelSelect::analytic);
  EXPECT_EQ(r.rows[0].phase, 0.0);
  EXPECT_EQ(r.rows[1].model, ModelSelect::maxwell_bloch);
  EXPECT_TRUE(r.rows[1].ok);
  EXPECT_EQ(r.rows[1].phase, 0.0);
  EXPECT_DOUBLE_EQ(r.rows[1].normalized_efficiency, 1.0);
}

TEST(Sweep, AnalyticEnergySweepIsLinear) {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.5 * i);
  const auto r = run_sweep(energy_spec(grid, ModelSelect::analytic));
  ASSERT_EQ(r.rows.size(), grid.size());
  const double k = r.rows[0].phase / r.rows[0].value;
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.phase, k * row.value, 1e-12 * std::abs(row.phase));
    EXPECT_TRUE(std::isnan(row.efficiency));
  }
  EXPECT_NEAR(r.rows[1].phase, -0.2803, 1e-3);  // 1 pJ
}

TEST(Sweep, DetuningSweepIsOddForAnalytic) {
  SweepSpec s;
  s.base = coarse_config();
  s.variable = SweepVariable::signal_detuning;
  s.model = ModelSelect::analytic;
  for (double f : {-10e6, -5e6, -1e6, 1e6, 5e6, 10e6}) s.grid.push_back(hz_to_angular(f));
  const auto r = run_sweep(s);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.rows[i].phase, -r.rows[5 - i].phase);
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
  auto spec = energy_spec({1.0, 4.0}, ModelSelect::both);
  spec.config_hash = "abc";
  spec.threads = 1;
  const auto a = run_sweep(spec);
  spec.threads = 3;
  const auto b = run_sweep(spec);
  std::ostringstream sa, sb;
  write_sweep_csv(sa, a);
  write_sweep_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.failures(), 0u);
}

TEST(Sweep, FailedRunsBecomeMarkers) {
  // at fixed power 30 pJ lasts 24 us and runs past the gradient flip
  auto s = energy_spec({1.0, 30.0}, ModelSelect::maxwell_bloch);
  const auto r = run_sweep(s);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_TRUE(r.rows[0].ok);
  EXPECT_FALSE(r.rows[1].ok);
  EXPECT_TRUE(std::isnan(r.rows[1].phase));
  EXPECT_NE(r.rows[1].error.find("signal"), std::string::npos) << r.rows[1].error;
  EXPECT_EQ(r.failures(), 1u);
  std::ostringstream os;
  write_sweep_csv(os, r);
  EXPECT_NE(os.str().find("# failed: mb value=30"), std::string::npos);
}

TEST(Sweep, InvalidSpecRejected) {
  auto s = energy_spec({}, ModelSelect::analytic);
  EXPECT_THROW(run_sweep(s), ConfigError);
  s = energy_spec({2.0, 1.0}, ModelSelect::analytic);
  EXPECT_THROW(run_sweep(s), ConfigError);
  s = energy_spec({-1.0}, ModelSelect::analytic);
  EXPECT_THROW(run_sweep(s), ConfigError);
}

TEST(Extrapolation, SinglePhotonPhase) {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.5 * i);
  const auto sweep = run_sweep(energy_spec(grid, ModelSelect::analytic));
  const auto ex = extrapolate_single_photon(sweep, PhysicalParams{}.wavelength);
  EXPECT_NEAR(std::abs(ex.phase_per_photon), 0.07e-6, 0.02e-6);
  EXPECT_NEAR(ex.phase_per_photon, phase_per_photon(SignalPulse{}, PhysicalParams{}),
              1e-9 * std::abs(ex.phase_per_photon));
  EXPECT_EQ(ex.n_points, 10u);  // 0.5 .. 5 pJ
  EXPECT_NEAR(ex.slope * pj_to_joule(1.0), -0.2803, 1e-3);
}

TEST(Extrapolation, NeedsThreeLinearPoints) {
  const auto sweep = run_sweep(energy_spec({0.0, 1.0, 6.0, 8.0}, ModelSelect::analytic));
  EXPECT_THROW(extrapolate_single_photon(sweep, 795e-9), FitError);
  SweepSpec s;
  s.base = coarse_config();
  s.variable = SweepVariable::purity;
  s.model = ModelSelect::analytic;
  s.grid = {0.98, 0.99, 1.0};
  EXPECT_THROW(extrapolate_single_photon(run_sweep(s), 795e-9), FitError);
}
