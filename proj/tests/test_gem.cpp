#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"

using namespace xpmgem;
using testing_helpers::coarse_config;

namespace {

// Shared coarse runs; each takes a fraction of a second.
const SimulationRecord& cached_run(const std::string& key, const Configuration& c) {
  static std::map<std::string, SimulationRecord> cache;
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, run_gem_sequence(c)).first;
  return it->second;
}

const SimulationRecord& dark_run() {
  auto c = coarse_config();
  c.sequence = without_signal(c.sequence);
  return cached_run("dark", c);
}

const SimulationRecord& lit_run() { return cached_run("lit", coarse_config()); }

std::size_t peak_index(const SimulationRecord& r, double after) {
  std::size_t best = 0;
  double m = -1;
  for (std::size_t i = 0; i < r.times.size(); ++i)
    if (r.times[i] > after && std::norm(r.output_field[i]) > m) {
      m = std::norm(r.output_field[i]);
      best = i;
    }
  return best;
}

// Ralston's third-order scheme on the same semi-discrete system.
SimulationRecord ralston_run(const Configuration& c, double dt) {
  const EnsembleSystem sys(c.physics, c.sequence, c.control, c.equations, c.solver.n_z);
  auto y = initial_state(c.purity, c.solver.n_z).atoms;
  std::vector<AtomicState> k1, k2, k3, tmp;
  std::vector<cplx> field;
  SimulationRecord rec;
  rec.sequence = c.sequence;
  const auto n = static_cast<std::size_t>(std::llround(c.sequence.total_time / dt));
  auto record = [&](double t) {
    propagate_field(y, sys.probe_input(t), c.physics.optical_depth, field);
    rec.times.push_back(t);
    rec.input_field.push_back(sys.probe_input(t));
    rec.output_field.push_back(field.back());
  };
  record(0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) * dt;
    sys.derivative(t, y, k1, field);
    tmp = y;
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] += (0.5 * dt) * k1[i];
    sys.derivative(t + 0.5 * dt, tmp, k2, field);
    tmp = y;
    for (std::size_t i = 0; i < y.size(); ++i) tmp[i] += (0.75 * dt) * k2[i];
    sys.derivative(t + 0.75 * dt, tmp, k3, field);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += (2.0 / 9.0 * dt) * k1[i];
      y[i] += (1.0 / 3.0 * dt) * k2[i];
      y[i] += (4.0 / 9.0 * dt) * k3[i];
    }
    record(static_cast<double>(s + 1) * dt);
  }
  return rec;
}

}  // namespace

TEST(InitialState, Populations) {
  const auto s = initial_state(0.98, 8);
  ASSERT_EQ(s.atoms.size(), 8u);
  for (const auto& a : s.atoms) {
    EXPECT_EQ(a.pop11, 0.98);
    EXPECT_NEAR(a.pop22, 0.02, 1e-15);
    EXPECT_EQ(a.pop33, 0.0);
    EXPECT_EQ(a.pop44, 0.0);
    EXPECT_EQ(a.coh12, cplx{});
    EXPECT_EQ(a.coh34, cplx{});
  }
  EXPECT_NEAR(initial_state(0.99, 4).atoms[2].pop22, 0.01, 1e-15);
  EXPECT_EQ(initial_state(1.0, 4).atoms[0].pop22, 0.0);
}

TEST(InitialState, PurityOutOfRange) {
  EXPECT_THROW(initial_state(1.01, 8), ConfigError);
  EXPECT_THROW(initial_state(-0.1, 8), ConfigError);
}

TEST(PropagateField, EmptyMediumPassesInput) {
  std::vector<AtomicState> atoms(10);
  const auto f = propagate_field(atoms, cplx{0.3, -0.2}, PhysicalParams{});
  for (const auto& v : f) EXPECT_EQ(v, cplx(0.3, -0.2));
}

TEST(PropagateField, LinearCoherenceIntegratesExactly) {
  // sigma_13 = a z integrates to E(1) = E0 + i sqrt(d) a / 2 under the trapezoid rule
  const std::size_t n = 21;
  const cplx a{0.4, 0.1};
  std::vector<AtomicState> atoms(n);
  for (std::size_t i = 0; i < n; ++i) atoms[i].coh13 = a * grid_z(i, n);
  PhysicalParams p;
  p.optical_depth = 16;
  const auto f = propagate_field(atoms, cplx{1, 0}, p);
  const cplx want = cplx{1, 0} + cplx{0, 4} * a * 0.5;
  EXPECT_LT(std::abs(f.back() - want), 1e-14);
  EXPECT_LT(std::abs(f[10] - (cplx{1, 0} + cplx{0, 4} * a * 0.125)), 1e-14);
}

TEST(SignalProfile, UniformIsConstant) {
  SignalPulse s;
  const PhysicalParams p;
  const double r = rabi_from_pulse(s, p);
  for (double z : {0.0, 0.25, 0.5, 1.0}) EXPECT_EQ(signal_profile(s, p, z), r);
}

TEST(SignalProfile, GaussianBeamShape) {
  SignalPulse s;
  s.z_profile.kind = BeamProfileKind::gaussian_beam;
  s.z_profile.rayleigh_range = 0.01;
  s.z_profile.ensemble_length = 0.02;
  const PhysicalParams p;
  const double peak = rabi_from_pulse(s, p);
  EXPECT_EQ(signal_profile(s, p, 0.5), peak);
  for (double z : {0.1, 0.3, 0.45}) {
    EXPECT_LT(signal_profile(s, p, z), peak);
    EXPECT_NEAR(signal_profile(s, p, z), signal_profile(s, p, 1.0 - z), 1e-9 * peak);
  }
  // z = 1 sits one Rayleigh range from the focus: half the intensity
  EXPECT_NEAR(signal_profile(s, p, 1.0), peak / std::sqrt(2.0), 1e-9 * peak);
}

TEST(SignalProfile, DerivedRayleighRange) {
  SignalPulse s;
  s.waist = um_to_m(150.0);
  s.z_profile.kind = BeamProfileKind::gaussian_beam;
  s.z_profile.ensemble_length = 0.2;
  const PhysicalParams p;
  // pi w^2 / lambda = 8.8913 cm; at z = 1 the offset is 10 cm
  const double x = 0.1 / 0.088913;
  EXPECT_NEAR(signal_profile(s, p, 1.0) / rabi_from_pulse(s, p), 1.0 / std::sqrt(1.0 + x * x), 1e-4);
}

TEST(SignalProfile, LongRayleighRangeIsNearlyUniform) {
  SignalPulse s;
  s.waist = um_to_m(150.0);
  s.z_profile.kind = BeamProfileKind::gaussian_beam;
  s.z_profile.ensemble_length = 0.02;
  const PhysicalParams p;
  const double r = rabi_from_pulse(s, p);
  for (double z : {0.0, 0.2, 0.8, 1.0}) EXPECT_NEAR(signal_profile(s, p, z), r, 0.01 * r);
}

TEST(RunGemSequence, EchoAfterFlip) {
  const auto& r = dark_run();
  const double flip = r.sequence.gradient_flip_time;
  EXPECT_GT(r.times[peak_index(r, flip)], flip);
  const double eff = recall_efficiency(r);
  EXPECT_GT(eff, 0.0);
  EXPECT_LT(eff, 1.0);
  // before the flip the output during storage is much weaker than the echo
  const double storage = window_energy(r.times, r.output_field, {r.sequence.write_pulse.end() + 2e-6, flip});
  EXPECT_LT(storage, 0.1 * window_energy(r.times, r.output_field, r.sequence.recall_window()));
}

TEST(RunGemSequence, ReferenceSegmentUnchangedBySignal) {
  const auto& a = dark_run();
  const auto& b = lit_run();
  ASSERT_EQ(a.times, b.times);
  const Window ref = *a.sequence.reference_window();
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (ref.contains(a.times[i])) {
      ASSERT_EQ(a.output_field[i], b.output_field[i]);
    }
  }
  const auto m = extract_phase(b, a);
  EXPECT_EQ(m.reference_phase_delta, 0.0);
  EXPECT_TRUE(m.valid);
  EXPECT_GT(std::abs(m.phase_shift), 0.3);
  EXPECT_LT(std::abs(m.phase_shift), 3.0);
}

TEST(RunGemSequence, TraceConserved) {
  EXPECT_LE(dark_run().conservation.max_trace_error, 1e-8);
  EXPECT_LE(lit_run().conservation.max_trace_error, 1e-8);
}

TEST(RunGemSequence, BitIdenticalRepeat) {
  auto c = coarse_config();
  c.sequence = without_signal(c.sequence);
  const auto r = run_gem_sequence(c);
  EXPECT_EQ(r.times, dark_run().times);
  EXPECT_EQ(r.output_field, dark_run().output_field);
  EXPECT_EQ(r.input_field, dark_run().input_field);
}

TEST(RunGemSequence, LinearInProbe) {
  const double k = 2.0;
  auto scale = [&](Configuration c) {
    c.sequence.write_pulse.peak_amplitude *= k;
    c.sequence.reference_pulse->peak_amplitude *= k;
    return c;
  };
  auto dark = coarse_config();
  dark.sequence = without_signal(dark.sequence);
  const auto rd = run_gem_sequence(scale(dark));
  const auto rl = run_gem_sequence(scale(coarse_config()));
  const Window w = rd.sequence.recall_window();
  const double e1 = window_energy(dark_run().times, dark_run().output_field, w);
  const double e2 = window_energy(rd.times, rd.output_field, w);
  EXPECT_NEAR(std::sqrt(e2 / e1), k, 1e-3 * k);
  const double p1 = extract_phase(lit_run(), dark_run()).phase_shift;
  const double p2 = extract_phase(rl, rd).phase_shift;
  EXPECT_NEAR(p2, p1, 1e-3 * std::abs(p1));
}

TEST(RunGemSequence, SmallSignalMatchesClosedForm) {
  for (double e_pj : {0.5, 1.0}) {
    auto c = coarse_config();
    c.sequence.signal = with_energy(*c.sequence.signal, pj_to_joule(e_pj), EnergyScaling::fixed_power);
    const auto lit = run_gem_sequence(c);
    const double mb = extract_phase(lit, dark_run()).phase_shift;
    const double analytic = stark_phase(*c.sequence.signal, c.physics);
    EXPECT_NEAR(mb, analytic, 0.1 * std::abs(analytic)) << e_pj << " pJ";
  }
}

TEST(RunGemSequence, EchoTiming) {
  const auto& r = dark_run();
  const auto& s = r.sequence;
  const double expected = s.gradient_flip_time + (s.gradient_flip_time - s.write_pulse.t_center);
  const double dt = coarse_config().solver.dt;
  EXPECT_NEAR(r.times[peak_index(r, s.gradient_flip_time)], expected, 2.0 * dt);
}

TEST(RunGemSequence, IndependentIntegratorAgrees) {
  auto c = coarse_config(16);
  c.sequence = without_signal(c.sequence);
  const auto ref = run_gem_sequence(c);
  const auto other = ralston_run(c, 0.5e-9);
  // compare on the 1 ns grid
  std::vector<cplx> resampled;
  for (std::size_t i = 0; i < other.times.size(); i += 2) resampled.push_back(other.output_field[i]);
  ASSERT_EQ(resampled.size(), ref.output_field.size());
  const Window w = ref.sequence.recall_window();
  const double e_ref = window_energy(ref.times, ref.output_field, w);
  const double e_oth = window_energy(ref.times, resampled, w);
  EXPECT_NEAR(e_oth / e_ref, 1.0, 1e-3);
  EXPECT_NEAR(overlap_phase(ref.times, resampled, ref.output_field, w), 0.0, 1e-3);
}

TEST(RunGemSequence, AdaptiveAgreesWithFixedStep) {
  auto c = coarse_config(16);
  const auto fixed = run_gem_sequence(c);
  c.solver.integrator = Integrator::rk45_adaptive;
  const auto adaptive = run_gem_sequence(c);
  const Window w = fixed.sequence.recall_window();
  EXPECT_NEAR(window_energy(adaptive.times, adaptive.output_field, w) /
                  window_energy(fixed.times, fixed.output_field, w),
              1.0, 1e-3);
  EXPECT_NEAR(overlap_phase(fixed.times, adaptive.output_field, fixed.output_field, w), 0.0, 1e-3);
}

TEST(RunGemSequence, SnapshotsAndFieldRecord) {
  auto c = coarse_config(16);
  c.solver.snapshot_times = {us_to_s(30.0), us_to_s(3.0)};
  c.solver.field_stride = 1000;
  const auto r = run_gem_sequence(c);
  ASSERT_EQ(r.snapshots.size(), 2u);
  EXPECT_NEAR(r.snapshots[0].time, us_to_s(3.0), 1e-12);
  EXPECT_NEAR(r.snapshots[1].time, us_to_s(30.0), 1e-12);
  EXPECT_EQ(r.snapshots[1].atoms.size(), 16u);
  ASSERT_TRUE(r.field.has_value());
  EXPECT_EQ(r.field->n_t(), 39u);
  EXPECT_TRUE(r.field->finite());
  EXPECT_EQ(r.field->at(15, 7), r.output_field[7000]);
  EXPECT_EQ(r.field->at(0, 7), r.input_field[7000]);
}

TEST(RunGemSequence, InvalidConfigurationRejected) {
  auto c = coarse_config();
  c.solver.n_z = 4;
  EXPECT_THROW(run_gem_sequence(c), ConfigError);
  c = coarse_config();
  c.solver.trace_tol = 1e-30;
  EXPECT_THROW(run_gem_sequence(c), NumericalError);
}
