#pragma once

// Measured quantities derived from simulation records: recall efficiency,
// cross-phase shift, signal absorption spectra and synthetic heterodyne traces.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "xpmgem/bloch.hpp"
#include "xpmgem/gem.hpp"
#include "xpmgem/model.hpp"

namespace xpmgem {

/// sum |f|^2 dt over samples whose time lies in the window.
inline double window_energy(const std::vector<double>& times, const std::vector<cplx>& f,
                            const Window& w, std::size_t* count = nullptr) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < times.size() && i < f.size(); ++i) {
    if (!w.contains(times[i])) continue;
    acc += std::norm(f[i]);
    ++n;
  }
  if (count) *count = n;
  const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  return acc * dt;
}

/// Energy of `numerator` inside `num_window` over energy of `denominator`
/// inside `den_window`.
inline double energy_ratio(const std::vector<double>& times, const std::vector<cplx>& numerator,
                           const Window& num_window, const std::vector<cplx>& denominator,
                           const Window& den_window) {
  std::size_t n_num = 0, n_den = 0;
  const double num = window_energy(times, numerator, num_window, &n_num);
  const double den = window_energy(times, denominator, den_window, &n_den);
  if (n_num == 0) throw ConfigError("recall window contains no samples");
  if (n_den == 0) throw ConfigError("write window contains no samples");
  if (!(den > 0)) throw ConfigError("write window carries no energy");
  return num / den;
}

/// Output energy in the recall window over input energy in the write window.
inline double recall_efficiency(const SimulationRecord& r, std::optional<Window> recall = {},
                                std::optional<Window> write = {}) {
  return energy_ratio(r.times, r.output_field, recall.value_or(r.sequence.recall_window()),
                      r.input_field, write.value_or(r.sequence.write_window()));
}

struct PhaseOptions {
  std::optional<Window> recall_window;
  /// Echo must carry at least this fraction of the write-pulse energy.
  double power_floor = 1e-6;
  /// |reference_phase_delta| above this marks the measurement invalid, rad.
  double reference_threshold = 1e-3;
};

struct PhaseMeasurement {
  double phase_shift = 0.0;            // rad, in (-pi, pi]
  double reference_phase_delta = 0.0;  // rad
  Window recall_window;
  bool valid = true;
};

/// arg sum a * conj(b) over the window, i.e. the |b|^2 weighted phase of a/b.
inline double overlap_phase(const std::vector<double>& times, const std::vector<cplx>& a,
                            const std::vector<cplx>& b, const Window& w) {
  cplx acc{};
  for (std::size_t i = 0; i < times.size(); ++i)
    if (w.contains(times[i])) acc += a[i] * std::conj(b[i]);
  return std::arg(acc);
}

/// Phase imparted on the echo by the signal, from a pair of runs that differ
/// only in the presence of the signal.
inline PhaseMeasurement extract_phase(const SimulationRecord& with, const SimulationRecord& without,
                                      const PhaseOptions& opt = {}) {
  if (with.times.size() != without.times.size() ||
      (!with.times.empty() && (with.times.front() != without.times.front() ||
                               with.times.back() != without.times.back())))
    throw ConfigError("records do not share a time grid");
  auto a = with.sequence, b = without.sequence;
  a.signal.reset();
  b.signal.reset();
  if (!(a == b)) throw ConfigError("records do not share event times");

  PhaseMeasurement m;
  m.recall_window = opt.recall_window.value_or(without.sequence.recall_window());
  const Window write = without.sequence.write_window();
  for (const SimulationRecord* r : {&with, &without}) {
    const double eff = energy_ratio(r->times, r->output_field, m.recall_window, r->input_field, write);
    if (!(eff >= opt.power_floor)) {
      std::ostringstream os;
      os << "no echo: recall energy fraction " << eff << " is below " << opt.power_floor;
      throw NoEchoError(os.str());
    }
  }
  m.phase_shift = overlap_phase(with.times, with.output_field, without.output_field, m.recall_window);
  if (auto ref = without.sequence.reference_window()) {
    m.reference_phase_delta =
        overlap_phase(with.times, with.output_field, without.output_field, *ref);
    m.valid = std::abs(m.reference_phase_delta) <= opt.reference_threshold;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Signal absorption by the residual storage-state population.

struct AbsorptionOptions {
  std::size_t n_z = 100;
  double dt = 2e-9;
  double pulse_width = 2e-6;  // amplitude sigma of the Gaussian test pulse, s
  double tail = 4e-6;         // extra integration time after the pulse
  double amplitude = 1e-4;    // weak: populations stay put
  EquationVariant equations{};
};

namespace detail {

/// Linear response of the 2-4 coherence to a weak signal field Es entering at
/// z = 0, with H_24 = Gamma sqrt(d) Es and dEs/dz = i sqrt(d) sigma_24.
/// `storage_population` is sigma_22 before the pulse (1 - purity).
inline double transmitted_fraction(double storage_population, double delta,
                                   const PhysicalParams& params, const AbsorptionOptions& opt) {
  const double G = params.gamma_excited;
  const double sd = std::sqrt(params.optical_depth);
  const double g = G * sd;
  // sigma_42 equation as printed; the detuning variant decides what multiplies it.
  const BlochCoefficients c = make_coefficients(params, opt.equations, solver_signal_detuning(delta));
  const double det = c.detuning_42;
  const double damp = 3.0 * G / 24.0;
  const double p2 = storage_population;
  const std::size_t nz = opt.n_z;
  const double dz = 1.0 / static_cast<double>(nz - 1);
  const double t0 = 4.0 * opt.pulse_width;
  const double t_total = 2.0 * t0 + opt.tail;
  // The z-integral coupling acts like a decay at rate ~ d Gamma sigma_22; keep
  // the explicit step well inside the RK4 stability region.
  const double stiff = params.optical_depth * G * std::abs(p2);
  const double h_max = stiff > 0 ? 1.0 / stiff : opt.dt;
  const auto n_steps = static_cast<std::size_t>(std::ceil(t_total / std::min(opt.dt, h_max) - 1e-9));
  const cplx I{0.0, 1.0};

  auto input = [&](double t) {
    const double x = (t - t0) / opt.pulse_width;
    return opt.amplitude * std::exp(-0.5 * x * x);
  };
  std::vector<cplx> s24(nz), k(nz), acc(nz), tmp(nz), field(nz);
  auto propagate = [&](double t, const std::vector<cplx>& s) {
    field[0] = input(t);
    for (std::size_t i = 1; i < nz; ++i)
      field[i] = field[i - 1] + I * (0.5 * sd * dz) * (s[i - 1] + s[i]);
  };
  // d sigma_24 / dt: conjugate of the sigma_42 equation without control or probe.
  auto rhs = [&](double t, const std::vector<cplx>& s, std::vector<cplx>& out) {
    propagate(t, s);
    for (std::size_t i = 0; i < nz; ++i)
      out[i] = -I * (g * field[i] * (0.0 - p2) - det * s[i]) - damp * s[i];
  };

  double e_in = 0.0, e_out = 0.0;
  const double h = t_total / static_cast<double>(n_steps);
  for (std::size_t n = 0; n <= n_steps; ++n) {
    const double t = static_cast<double>(n) * h;
    propagate(t, s24);
    e_in += std::norm(field[0]);
    e_out += std::norm(field[nz - 1]);
    if (n == n_steps) break;
    rhs(t, s24, k);
    acc = k;
    for (std::size_t i = 0; i < nz; ++i) tmp[i] = s24[i] + 0.5 * h * k[i];
    rhs(t + 0.5 * h, tmp, k);
    for (std::size_t i = 0; i < nz; ++i) { acc[i] += 2.0 * k[i]; tmp[i] = s24[i] + 0.5 * h * k[i]; }
    rhs(t + 0.5 * h, tmp, k);
    for (std::size_t i = 0; i < nz; ++i) { acc[i] += 2.0 * k[i]; tmp[i] = s24[i] + h * k[i]; }
    rhs(t + h, tmp, k);
    for (std::size_t i = 0; i < nz; ++i) s24[i] += (h / 6.0) * (acc[i] + k[i]);
  }
  const double frac = e_out / e_in;
  if (!std::isfinite(frac)) throw NumericalError("absorption propagation diverged");
  return frac;
}

}  // namespace detail

/// Transmitted energy fraction of a weak signal-frequency pulse through the
/// unprepared ensemble, for each detuning (closed-form convention, rad/s).
inline std::vector<std::pair<double, double>> absorption_spectrum(
    double purity, const std::vector<double>& delta_grid, const PhysicalParams& params,
    const AbsorptionOptions& opt = {}) {
  if (!(purity >= 0.0 && purity <= 1.0)) throw ConfigError("purity must lie in [0, 1]", "purity");
  if (delta_grid.empty()) throw ConfigError("detuning grid is empty");
  if (opt.n_z < 2 || !(opt.dt > 0) || !(opt.pulse_width > 0))
    throw ConfigError("invalid absorption grid");
  const EnsembleState init = initial_state(purity, opt.n_z);
  const double p2 = init.atoms.front().pop22;
  std::vector<std::pair<double, double>> out;
  out.reserve(delta_grid.size());
  for (double d : delta_grid) out.emplace_back(d, detail::transmitted_fraction(p2, d, params, opt));
  return out;
}

// ---------------------------------------------------------------------------

/// |E_LO exp(-i w_LO t) + E(t)|^2 with the LO gated off in `lo_off_windows`,
/// plus seeded Gaussian noise.
inline std::vector<double> synthesize_heterodyne(const SimulationRecord& r, double lo_frequency,
                                                 const std::vector<Window>& lo_off_windows,
                                                 double noise_rms, std::uint64_t seed,
                                                 double lo_amplitude = 1.0) {
  const double dt = r.dt();
  if (lo_frequency != 0.0 && dt > 0) {
    const double period = kTwoPi / std::abs(lo_frequency);
    if (period < 8.0 * dt) {
      std::ostringstream os;
      os << "local oscillator beat undersampled: " << period / dt << " samples per period (need 8)";
      throw ConfigError(os.str(), "lo_frequency");
    }
  }
  if (noise_rms < 0) throw ConfigError("noise_rms must be >= 0", "noise_rms");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> trace(r.times.size());
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const double t = r.times[i];
    bool lo_on = true;
    for (const auto& w : lo_off_windows)
      if (w.contains(t)) lo_on = false;
    const cplx lo = lo_on ? std::polar(lo_amplitude, -lo_frequency * t) : cplx{};
    trace[i] = std::norm(lo + r.output_field[i]);
    if (noise_rms > 0) trace[i] += noise_rms * noise(rng);
  }
  return trace;
}

}  // namespace xpmgem
