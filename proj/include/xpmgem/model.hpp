#pragma once

// Domain value types shared by the analytic model, the Maxwell-Bloch solver
// and the analysis layer. All quantities are SI with angular frequencies.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xpmgem/errors.hpp"
#include "xpmgem/units.hpp"

namespace xpmgem {

using cplx = std::complex<double>;

/// How the energy-to-phase chain evaluates the closed-form XPM expression.
/// `cycles` plugs Rabi frequency, detuning and linewidth in Hz (the
/// convention behind the published per-photon numbers); `angular` plugs
/// rad/s. The value differs by exactly 2*pi.
enum class PhaseUnits { angular, cycles };

struct PhysicalParams {
  double gamma_excited = hz_to_angular(5.75e6);       // Rb87 D1
  double optical_depth = 450.0;
  double control_detuning = hz_to_angular(208e6);     // positive = red
  double gradient_eta = hz_to_angular(200e3);         // per unit of normalized z
  double broadening_width = hz_to_angular(200e3);     // == gradient_eta * 1
  double wavelength = 795e-9;
  double ensemble_length_z = 1.0;                     // fixed, z in [0, 1]

  // Energy -> Rabi frequency calibration.
  double saturation_intensity = mw_cm2_to_w_m2(4.49);
  double transition_strength = 5.0 / 6.0;             // F=1 -> F'=2 on D1

  // Closed-form model knobs.
  double stark_gamma_fraction = 0.5;                  // gamma = fraction * Gamma
  PhaseUnits phase_units = PhaseUnits::cycles;

  double photon_energy() const { return kPlanck * kSpeedOfLight / wavelength; }
  bool operator==(const PhysicalParams&) const = default;
};

/// A closed time interval [start, end] in seconds.
struct Window {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool contains(double t) const { return t >= start && t <= end; }
  bool operator==(const Window&) const = default;
};

struct ControlField {
  double rabi = hz_to_angular(2.0e6);
  std::vector<Window> on_windows;  // sorted, non-overlapping

  double at(double t) const {
    for (const auto& w : on_windows)
      if (t >= w.start && t < w.end) return rabi;
    return 0.0;
  }
  bool operator==(const ControlField&) const = default;
};

enum class BeamProfileKind { uniform, gaussian_beam };

/// Intensity envelope of the signal along the ensemble axis.
struct BeamProfile {
  BeamProfileKind kind = BeamProfileKind::uniform;
  double focus_z = 0.5;            // normalized position of the focus
  double rayleigh_range = 0.0;     // m; 0 -> derived from waist and wavelength
  double ensemble_length = 0.02;   // physical length mapped onto z in [0, 1], m
  bool operator==(const BeamProfile&) const = default;
};

struct SignalPulse {
  double energy = pj_to_joule(3.7);
  double duration_tau = us_to_s(2.96);
  double detuning_delta = hz_to_angular(-8.7e6);  // sign as in the XPM formula
  double waist = um_to_m(190.0);
  double t_start = us_to_s(11.5);
  BeamProfile z_profile{};

  double t_end() const { return t_start + duration_tau; }
  double power() const { return energy / duration_tau; }
  bool operator==(const SignalPulse&) const = default;
};

/// How a pulse's duration follows its energy when the energy is changed.
enum class EnergyScaling { fixed_power, fixed_duration };

/// The template pulse carrying `energy`. Zero energy keeps the template
/// duration so the pulse stays well formed.
inline SignalPulse with_energy(const SignalPulse& tmpl, double energy, EnergyScaling scaling) {
  SignalPulse s = tmpl;
  s.energy = energy;
  if (scaling == EnergyScaling::fixed_power && energy > 0 && tmpl.energy > 0)
    s.duration_tau = energy / tmpl.power();
  return s;
}

/// Gaussian probe pulse envelope A exp(-(t - t0)^2 / (2 w^2)). `width` is the
/// amplitude standard deviation; the pulse is treated as occupying
/// t_center +- 3 width.
struct ProbePulse {
  double t_center = 0.0;
  double width = 0.0;
  double peak_amplitude = 0.0;

  double start() const { return t_center - 3.0 * width; }
  double end() const { return t_center + 3.0 * width; }
  bool operator==(const ProbePulse&) const = default;
};

struct PulseSequence {
  std::optional<ProbePulse> reference_pulse;
  ProbePulse write_pulse;
  double gradient_flip_time = 0.0;
  std::optional<SignalPulse> signal;
  double total_time = 0.0;
  double storage_time = 0.0;  // gradient_flip_time - write_pulse.t_center
  /// Probe carrier relative to the frame, rad/s, shared by reference and
  /// write pulses (one laser). Unset -> centred in the memory band.
  std::optional<double> probe_carrier_offset;

  /// Default recall window: [flip, flip + 2 (flip - write centroid)], clipped to the run.
  Window recall_window() const {
    const double span = 2.0 * (gradient_flip_time - write_pulse.t_center);
    return {gradient_flip_time, std::min(total_time, gradient_flip_time + span)};
  }
  Window write_window() const { return {write_pulse.start(), write_pulse.end()}; }
  std::optional<Window> reference_window() const {
    if (!reference_pulse) return std::nullopt;
    return Window{reference_pulse->start(), reference_pulse->end()};
  }
  bool operator==(const PulseSequence&) const = default;
};

/// Density-matrix slice at one z. Only the upper triangle is stored;
/// element(i, j) reconstructs the lower one by conjugation.
struct AtomicState {
  double pop11 = 0, pop22 = 0, pop33 = 0, pop44 = 0;
  cplx coh12{}, coh13{}, coh23{}, coh14{}, coh24{}, coh34{};

  double trace() const { return pop11 + pop22 + pop33 + pop44; }

  /// rho_ij with 1-based indices.
  cplx element(int i, int j) const {
    if (i == j) {
      switch (i) {
        case 1: return pop11;
        case 2: return pop22;
        case 3: return pop33;
        case 4: return pop44;
      }
    }
    if (i > j) return std::conj(element(j, i));
    const int key = 10 * i + j;
    switch (key) {
      case 12: return coh12;
      case 13: return coh13;
      case 23: return coh23;
      case 14: return coh14;
      case 24: return coh24;
      case 34: return coh34;
    }
    throw std::out_of_range("AtomicState::element index");
  }

  bool finite() const {
    auto ok = [](cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); };
    return std::isfinite(pop11) && std::isfinite(pop22) && std::isfinite(pop33) &&
           std::isfinite(pop44) && ok(coh12) && ok(coh13) && ok(coh23) && ok(coh14) &&
           ok(coh24) && ok(coh34);
  }

  AtomicState& operator+=(const AtomicState& o) {
    pop11 += o.pop11; pop22 += o.pop22; pop33 += o.pop33; pop44 += o.pop44;
    coh12 += o.coh12; coh13 += o.coh13; coh23 += o.coh23;
    coh14 += o.coh14; coh24 += o.coh24; coh34 += o.coh34;
    return *this;
  }
  AtomicState& operator*=(double s) {
    pop11 *= s; pop22 *= s; pop33 *= s; pop44 *= s;
    coh12 *= s; coh13 *= s; coh23 *= s; coh14 *= s; coh24 *= s; coh34 *= s;
    return *this;
  }
  friend AtomicState operator+(AtomicState a, const AtomicState& b) { return a += b; }
  friend AtomicState operator*(double s, AtomicState a) { return a *= s; }
  bool operator==(const AtomicState&) const = default;
};

/// Complex envelope sampled on an (n_z x n_t) grid, time-major.
class FieldEnvelope {
 public:
  FieldEnvelope() = default;
  FieldEnvelope(std::size_t n_z, std::size_t n_t, double dz, double dt)
      : n_z_(n_z), n_t_(n_t), dz_(dz), dt_(dt), values_(n_z * n_t) {
    if (n_z < 2) throw ConfigError("FieldEnvelope needs n_z >= 2");
  }

  std::size_t n_z() const { return n_z_; }
  std::size_t n_t() const { return n_t_; }
  double dz() const { return dz_; }
  double dt() const { return dt_; }

  cplx& at(std::size_t iz, std::size_t it) { return values_[it * n_z_ + iz]; }
  cplx at(std::size_t iz, std::size_t it) const { return values_[it * n_z_ + iz]; }

  bool finite() const {
    for (const auto& v : values_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

 private:
  std::size_t n_z_ = 0, n_t_ = 0;
  double dz_ = 0, dt_ = 0;
  std::vector<cplx> values_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  void require(bool cond, std::string message) {
    if (!cond) violations.push_back(std::move(message));
  }
  void throw_if_failed() const {
    if (!ok()) throw ValidationError(violations);
  }
};

inline void validate_into(ValidationReport& r, const PhysicalParams& p) {
  r.require(p.gamma_excited > 0, "negative linewidth: gamma_excited must be > 0");
  r.require(p.optical_depth >= 0, "optical_depth must be >= 0");
  r.require(p.wavelength > 0, "wavelength must be > 0");
  r.require(p.saturation_intensity > 0, "saturation_intensity must be > 0");
  r.require(p.transition_strength > 0, "transition_strength must be > 0");
  r.require(p.stark_gamma_fraction > 0, "stark_gamma_fraction must be > 0");
  r.require(p.ensemble_length_z == 1.0, "ensemble_length_z is fixed to 1");
  const double scale = std::max(std::abs(p.gradient_eta), std::abs(p.broadening_width));
  r.require(scale == 0.0 ||
                std::abs(p.broadening_width - p.gradient_eta * p.ensemble_length_z) <=
                    1e-12 * scale,
            "broadening_width must equal gradient_eta * 1");
}

inline void validate_into(ValidationReport& r, const ControlField& c) {
  r.require(c.rabi >= 0, "control rabi must be >= 0");
  for (std::size_t i = 0; i < c.on_windows.size(); ++i) {
    const auto& w = c.on_windows[i];
    r.require(w.end > w.start, "control window " + std::to_string(i) + " is empty");
    if (i > 0) {
      const auto& prev = c.on_windows[i - 1];
      r.require(w.start >= prev.start, "control windows not sorted");
      r.require(w.start >= prev.end, "overlapping control windows");
    }
  }
}

inline void validate_into(ValidationReport& r, const SignalPulse& s) {
  r.require(s.energy >= 0, "signal energy must be >= 0");
  r.require(s.duration_tau > 0, "signal duration must be > 0");
  r.require(s.waist > 0, "signal waist must be > 0");
  if (s.z_profile.kind == BeamProfileKind::gaussian_beam) {
    r.require(s.z_profile.ensemble_length > 0, "beam profile ensemble_length must be > 0");
    r.require(s.z_profile.rayleigh_range >= 0, "beam profile rayleigh_range must be >= 0");
  }
}

/// Checks physics and sequence timing. Every violation is reported; nothing
/// is clamped.
inline ValidationReport validate_params(const PhysicalParams& params, const PulseSequence& seq,
                                        const ControlField* control = nullptr) {
  ValidationReport r;
  validate_into(r, params);
  if (control) validate_into(r, *control);

  const auto& w = seq.write_pulse;
  r.require(w.width > 0, "write pulse width must be > 0");
  r.require(w.peak_amplitude >= 0, "write pulse amplitude must be >= 0");
  r.require(w.t_center < seq.gradient_flip_time, "write pulse must precede gradient flip");
  r.require(seq.total_time > seq.gradient_flip_time, "total_time must exceed gradient flip");
  r.require(std::abs(seq.storage_time - (seq.gradient_flip_time - w.t_center)) <= 1e-12,
            "storage_time inconsistent with flip timing");
  if (seq.reference_pulse) {
    r.require(seq.reference_pulse->width > 0, "reference pulse width must be > 0");
    r.require(seq.reference_pulse->end() <= w.start(), "reference pulse must precede write pulse");
  }
  if (seq.signal) {
    validate_into(r, *seq.signal);
    r.require(seq.signal->t_start >= w.end() - 1e-15 &&
                  seq.signal->t_end() <= seq.gradient_flip_time + 1e-15,
              "signal outside storage window");
  }
  return r;
}

/// Number of photons in the pulse at the given wavelength.
inline double photon_number(const SignalPulse& signal, double wavelength) {
  return signal.energy / (kPlanck * kSpeedOfLight / wavelength);
}

/// Inverse of photon_number.
inline double energy_of_photons(double photons, double wavelength) {
  return photons * kPlanck * kSpeedOfLight / wavelength;
}

}  // namespace xpmgem
