#pragma once

// Gradient echo memory sequence on the four-level Maxwell-Bloch system.
//
// Method of lines: atoms on a uniform z grid, the probe obtained each stage by
// trapezoidal integration of dE/dz = i sqrt(d) sigma_13 from the input
// boundary value. There is no retardation term, so E(z, t) is slaved to the
// atoms at the same instant.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <initializer_list>
#include <sstream>
#include <utility>
#include <vector>

#include "xpmgem/bloch.hpp"
#include "xpmgem/model.hpp"
#include "xpmgem/stark.hpp"

namespace xpmgem {

enum class Integrator { rk4_fixed, rk45_adaptive };

struct SolverConfig {
  std::size_t n_z = 200;
  double dt = 1e-9;  // step for rk4, output spacing for both
  Integrator integrator = Integrator::rk4_fixed;
  double abs_tol = 1e-10;
  double rel_tol = 1e-6;
  double trace_tol = 1e-8;
  std::size_t record_stride = 1;         // keep every n-th sample in the record
  std::vector<double> snapshot_times;    // s
  std::size_t field_stride = 0;          // >0: keep E(z, t) every n-th step

  bool operator==(const SolverConfig&) const = default;
};

inline void validate_into(ValidationReport& r, const SolverConfig& s) {
  r.require(s.n_z >= 16, "solver n_z must be >= 16");
  r.require(s.dt > 0, "solver dt must be > 0");
  r.require(s.abs_tol > 0 && s.rel_tol > 0 && s.trace_tol > 0, "solver tolerances must be > 0");
  r.require(s.record_stride >= 1, "record_stride must be >= 1");
}

struct EnsembleState {
  double time = 0.0;
  std::vector<AtomicState> atoms;
  std::vector<cplx> field;  // E(z) at `time`
};

struct ConservationLog {
  double max_trace_error = 0.0;
  double max_population_excursion = 0.0;  // how far any population left [0, 1]
};

/// Everything the observables need from one run.
struct SimulationRecord {
  std::vector<double> times;
  std::vector<cplx> input_field;   // E(z=0, t)
  std::vector<cplx> output_field;  // E(z=1, t)
  PulseSequence sequence;
  ConservationLog conservation;
  std::vector<EnsembleState> snapshots;
  std::optional<FieldEnvelope> field;

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// pop11 = purity, pop22 = 1 - purity at every z, everything else zero.
inline EnsembleState initial_state(double purity, std::size_t n_z) {
  if (!(purity >= 0.0 && purity <= 1.0)) throw ConfigError("purity must lie in [0, 1]", "purity");
  if (n_z < 2) throw ConfigError("n_z must be >= 2");
  AtomicState a;
  a.pop11 = purity;
  a.pop22 = 1.0 - purity;
  EnsembleState s;
  s.atoms.assign(n_z, a);
  s.field.assign(n_z, cplx{});
  return s;
}

inline double grid_z(std::size_t i, std::size_t n_z) {
  return static_cast<double>(i) / static_cast<double>(n_z - 1);
}

/// Trapezoidal integral of dE/dz = i sqrt(d) sigma_13 from z = 0.
inline void propagate_field(const std::vector<AtomicState>& atoms, cplx e0, double optical_depth,
                            std::vector<cplx>& out) {
  const std::size_t n = atoms.size();
  out.resize(n);
  const double dz = 1.0 / static_cast<double>(n - 1);
  const cplx k{0.0, 0.5 * std::sqrt(optical_depth) * dz};
  out[0] = e0;
  for (std::size_t i = 1; i < n; ++i)
    out[i] = out[i - 1] + k * (atoms[i - 1].coh13 + atoms[i].coh13);
}

inline std::vector<cplx> propagate_field(const std::vector<AtomicState>& atoms, cplx e0,
                                         const PhysicalParams& params) {
  std::vector<cplx> out;
  propagate_field(atoms, e0, params.optical_depth, out);
  return out;
}

/// Relative amplitude of the signal along z (1 at the focus for gaussian_beam).
inline double profile_envelope(const SignalPulse& s, double wavelength, double z) {
  const auto& p = s.z_profile;
  if (p.kind == BeamProfileKind::uniform) return 1.0;
  const double zr = p.rayleigh_range > 0 ? p.rayleigh_range : kPi * s.waist * s.waist / wavelength;
  const double x = (z - p.focus_z) * p.ensemble_length / zr;
  // On-axis intensity falls as 1 / (1 + x^2); the Rabi frequency as its root.
  return 1.0 / std::sqrt(1.0 + x * x);
}

/// Analytic-convention Rabi frequency at normalized position z, rad/s.
inline double signal_profile(const SignalPulse& s, const PhysicalParams& params, double z) {
  return rabi_from_pulse(s, params) * profile_envelope(s, params.wavelength, z);
}

/// Peak solver coupling (the H_42 element) for a pulse. Its weak-field Stark
/// phase Omega^2 Delta_s tau / (Delta_s^2 + gamma_41^2) reproduces the
/// closed-form phase in the active unit convention.
inline double signal_drive(const SignalPulse& s, const PhysicalParams& params) {
  const double u = params.phase_units == PhaseUnits::cycles ? kTwoPi : 1.0;
  return rabi_from_pulse(s, params) / std::sqrt(2.0 * u);
}

/// Band centre plus the control light shift on the two-photon resonance.
inline double default_probe_carrier(const PhysicalParams& params, const ControlField& control) {
  const double shift =
      params.control_detuning != 0 ? control.rabi * control.rabi / params.control_detuning : 0.0;
  return 0.5 * params.gradient_eta + shift;
}

/// Time-dependent drives of a sequence, evaluated at arbitrary t.
class SequenceDrives {
 public:
  SequenceDrives(const PhysicalParams& params, const PulseSequence& seq, const ControlField& control)
      : seq_(seq), control_(control) {
    carrier_ = seq.probe_carrier_offset.value_or(default_probe_carrier(params, control));
    if (seq.signal) {
      drive_ = signal_drive(*seq.signal, params);
      if (!std::isfinite(drive_)) throw ConfigError("signal drive is not finite");
    }
  }

  cplx probe_input(double t) const {
    double env = gaussian(seq_.write_pulse, t);
    if (seq_.reference_pulse) env += gaussian(*seq_.reference_pulse, t);
    return env * std::polar(1.0, -carrier_ * t);
  }
  double control(double t) const { return control_.at(t); }
  /// Peak solver coupling while on, else 0; multiply by the z envelope.
  double signal(double t) const {
    if (!seq_.signal) return 0.0;
    return (t >= seq_.signal->t_start && t < seq_.signal->t_end()) ? drive_ : 0.0;
  }
  double flip_sign(double t) const { return t < seq_.gradient_flip_time ? 1.0 : -1.0; }
  double carrier() const { return carrier_; }

 private:
  static double gaussian(const ProbePulse& p, double t) {
    const double x = (t - p.t_center) / p.width;
    return p.peak_amplitude * std::exp(-0.5 * x * x);
  }
  PulseSequence seq_;
  ControlField control_;
  double carrier_ = 0.0;
  double drive_ = 0.0;
};

/// The semi-discrete ensemble ODE, shared by both integrators.
class EnsembleSystem {
 public:
  EnsembleSystem(const PhysicalParams& params, const PulseSequence& seq,
                 const ControlField& control, const EquationVariant& variant, std::size_t n_z)
      : params_(params), drives_(params, seq, control), n_z_(n_z) {
    const double delta = seq.signal ? seq.signal->detuning_delta : 0.0;
    coeffs_ = make_coefficients(params, variant, solver_signal_detuning(delta));
    z_.resize(n_z);
    envelope_.assign(n_z, 1.0);
    for (std::size_t i = 0; i < n_z; ++i) {
      z_[i] = grid_z(i, n_z);
      if (seq.signal) envelope_[i] = profile_envelope(*seq.signal, params.wavelength, z_[i]);
    }
  }

  /// dy/dt at time t; also leaves E(z, t) in `field`.
  void derivative(double t, const std::vector<AtomicState>& y, std::vector<AtomicState>& dy,
                  std::vector<cplx>& field) const {
    propagate_field(y, drives_.probe_input(t), params_.optical_depth, field);
    const double omega = drives_.control(t);
    const double drive = drives_.signal(t);
    const double flip = drives_.flip_sign(t);
    dy.resize(y.size());
    for (std::size_t i = 0; i < n_z_; ++i)
      dy[i] = bloch_rhs(y[i], field[i], omega, drive * envelope_[i], z_[i], coeffs_, flip);
  }

  cplx probe_input(double t) const { return drives_.probe_input(t); }
  double optical_depth() const { return params_.optical_depth; }
  std::size_t n_z() const { return n_z_; }

 private:
  PhysicalParams params_;
  SequenceDrives drives_;
  BlochCoefficients coeffs_;
  std::size_t n_z_;
  std::vector<double> z_;
  std::vector<double> envelope_;
};

namespace detail {

inline void axpy(std::vector<AtomicState>& out, const std::vector<AtomicState>& y, double h,
                 const std::vector<AtomicState>& k) {
  out.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * k[i];
}

class Rk4Stepper {
 public:
  void step(const EnsembleSystem& sys, double t, double h, std::vector<AtomicState>& y) {
    sys.derivative(t, y, k_, field_);
    acc_ = k_;
    axpy(tmp_, y, 0.5 * h, k_);
    sys.derivative(t + 0.5 * h, tmp_, k_, field_);
    accumulate(2.0);
    axpy(tmp_, y, 0.5 * h, k_);
    sys.derivative(t + 0.5 * h, tmp_, k_, field_);
    accumulate(2.0);
    axpy(tmp_, y, h, k_);
    sys.derivative(t + h, tmp_, k_, field_);
    accumulate(1.0);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += (h / 6.0) * acc_[i];
  }

 private:
  void accumulate(double w) {
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += w * k_[i];
  }
  std::vector<AtomicState> k_, acc_, tmp_;
  std::vector<cplx> field_;
};

inline double abs_max(const AtomicState& a) {
  double m = std::max({std::abs(a.pop11), std::abs(a.pop22), std::abs(a.pop33), std::abs(a.pop44)});
  for (const cplx& c : {a.coh12, a.coh13, a.coh23, a.coh14, a.coh24, a.coh34})
    m = std::max(m, std::max(std::abs(c.real()), std::abs(c.imag())));
  return m;
}

/// Dormand-Prince 5(4); integrates exactly over [t, t + span] with
/// step-size control on every state component.
class Rk45Stepper {
 public:
  Rk45Stepper(double abs_tol, double rel_tol, double h0) : atol_(abs_tol), rtol_(rel_tol), h_(h0) {}

  void advance(const EnsembleSystem& sys, double t, double span, std::vector<AtomicState>& y) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double t_end = t + span;
    int guard = 0;
    while (t < t_end) {
      if (++guard > 1000000) throw NumericalError("rk45: too many substeps");
      const double h = std::min(h_, t_end - t);
      const std::size_t n = y.size();
      sys.derivative(t, y, k1_, field_);
      combine(tmp_, y, h, {{a21, &k1_}});
      sys.derivative(t + c2 * h, tmp_, k2_, field_);
      combine(tmp_, y, h, {{a31, &k1_}, {a32, &k2_}});
      sys.derivative(t + c3 * h, tmp_, k3_, field_);
      combine(tmp_, y, h, {{a41, &k1_}, {a42, &k2_}, {a43, &k3_}});
      sys.derivative(t + c4 * h, tmp_, k4_, field_);
      combine(tmp_, y, h, {{a51, &k1_}, {a52, &k2_}, {a53, &k3_}, {a54, &k4_}});
      sys.derivative(t + c5 * h, tmp_, k5_, field_);
      combine(tmp_, y, h, {{a61, &k1_}, {a62, &k2_}, {a63, &k3_}, {a64, &k4_}, {a65, &k5_}});
      sys.derivative(t + h, tmp_, k6_, field_);
      combine(ynew_, y, h, {{b1, &k1_}, {b3, &k3_}, {b4, &k4_}, {b5, &k5_}, {b6, &k6_}});
      sys.derivative(t + h, ynew_, k7_, field_);

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        AtomicState e = (e1 * h) * k1_[i];
        e += (e3 * h) * k3_[i];
        e += (e4 * h) * k4_[i];
        e += (e5 * h) * k5_[i];
        e += (e6 * h) * k6_[i];
        e += (e7 * h) * k7_[i];
        const double scale = atol_ + rtol_ * std::max(abs_max(y[i]), abs_max(ynew_[i]));
        err = std::max(err, abs_max(e) / scale);
      }
      if (!std::isfinite(err)) err = 1e10;
      if (err <= 1.0) {
        t += h;
        y.swap(ynew_);
      }
      const double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h_ = h * std::clamp(factor, 0.2, 5.0);
      if (h_ < 1e-18) throw NumericalError("rk45: step size underflow");
    }
  }

 private:
  using Term = std::pair<double, const std::vector<AtomicState>*>;
  static void combine(std::vector<AtomicState>& out, const std::vector<AtomicState>& y, double h,
                      std::initializer_list<Term> terms) {
    out = y;
    for (const auto& [a, k] : terms)
      for (std::size_t i = 0; i < y.size(); ++i) out[i] += (a * h) * (*k)[i];
  }
  double atol_, rtol_, h_;
  std::vector<AtomicState> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
  std::vector<cplx> field_;
};

}  // namespace detail

/// Runs the full store / signal / recall sequence.
inline SimulationRecord run_gem_sequence(const PhysicalParams& params, const PulseSequence& seq,
                                         const ControlField& control, const SolverConfig& solver,
                                         double purity, const EquationVariant& variant = {}) {
  ValidationReport report = validate_params(params, seq, &control);
  validate_into(report, solver);
  report.throw_if_failed();

  const EnsembleSystem sys(params, seq, control, variant, solver.n_z);
  EnsembleState state = initial_state(purity, solver.n_z);
  const auto n_steps = static_cast<std::size_t>(std::llround(seq.total_time / solver.dt));

  SimulationRecord rec;
  rec.sequence = seq;
  const std::size_t n_rec = n_steps / solver.record_stride + 1;
  rec.times.reserve(n_rec);
  rec.input_field.reserve(n_rec);
  rec.output_field.reserve(n_rec);
  if (solver.field_stride > 0)
    rec.field.emplace(solver.n_z, n_steps / solver.field_stride + 1,
                      1.0 / static_cast<double>(solver.n_z - 1),
                      solver.dt * static_cast<double>(solver.field_stride));

  std::vector<double> snaps = solver.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  detail::Rk4Stepper rk4;
  detail::Rk45Stepper rk45(solver.abs_tol, solver.rel_tol, solver.dt);

  auto observe = [&](std::size_t step, double t) {
    const cplx e0 = sys.probe_input(t);
    propagate_field(state.atoms, e0, params.optical_depth, state.field);
    double worst = 0.0, excursion = 0.0;
    for (const auto& a : state.atoms) {
      if (!a.finite()) {
        std::ostringstream os;
        os << "non-finite atomic state at t = " << t;
        throw NumericalError(os.str());
      }
      worst = std::max(worst, std::abs(a.trace() - 1.0));
      for (double p : {a.pop11, a.pop22, a.pop33, a.pop44})
        excursion = std::max({excursion, -p, p - 1.0});
    }
    rec.conservation.max_trace_error = std::max(rec.conservation.max_trace_error, worst);
    rec.conservation.max_population_excursion =
        std::max(rec.conservation.max_population_excursion, excursion);
    if (worst > solver.trace_tol) {
      std::ostringstream os;
      os << "trace violation " << worst << " exceeds tolerance " << solver.trace_tol
         << " at t = " << t;
      throw NumericalError(os.str());
    }
    const cplx out = state.field.back();
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag()))
      throw NumericalError("non-finite output field");
    if (step % solver.record_stride == 0) {
      rec.times.push_back(t);
      rec.input_field.push_back(e0);
      rec.output_field.push_back(out);
    }
    if (rec.field && step % solver.field_stride == 0) {
      const std::size_t it = step / solver.field_stride;
      for (std::size_t iz = 0; iz < solver.n_z; ++iz) rec.field->at(iz, it) = state.field[iz];
    }
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 0.5 * solver.dt) {
      state.time = t;
      rec.snapshots.push_back(state);
      ++next_snap;
    }
  };

  observe(0, 0.0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * solver.dt;
    if (solver.integrator == Integrator::rk4_fixed)
      rk4.step(sys, t, solver.dt, state.atoms);
    else
      rk45.advance(sys, t, solver.dt, state.atoms);
    observe(n + 1, static_cast<double>(n + 1) * solver.dt);
  }
  return rec;
}

}  // namespace xpmgem
