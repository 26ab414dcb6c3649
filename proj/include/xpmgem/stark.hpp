#pragma once

// Closed-form cross-phase-modulation model:
//
//   phi = Omega_s^2 * delta * tau / (2 (gamma^2 + delta^2))
//
// plus the pulse-energy -> Rabi-frequency calibration and the per-photon
// and waist extrapolations built on it.

#include <cmath>
#include <utility>
#include <vector>

#include "xpmgem/model.hpp"

namespace xpmgem {

/// The formula itself, in whatever consistent units the caller uses.
inline double xpm_phase(double rabi_s, double delta, double tau, double gamma) {
  return rabi_s * rabi_s * delta * tau / (2.0 * (gamma * gamma + delta * delta));
}

struct AnalyticParams {
  double gamma_hwhm;  // rad/s
  PhaseUnits units;
};

inline AnalyticParams analytic_params(const PhysicalParams& p) {
  if (!(p.gamma_excited > 0) || !(p.stark_gamma_fraction > 0))
    throw ConfigError("gamma_hwhm must be > 0");
  return {p.stark_gamma_fraction * p.gamma_excited, p.phase_units};
}

/// Peak intensity of a Gaussian beam carrying the pulse's mean power, W/m^2.
inline double peak_intensity(const SignalPulse& s) {
  if (!(s.duration_tau > 0)) throw ConfigError("signal duration must be > 0");
  return 2.0 * s.power() / (kPi * s.waist * s.waist);
}

/// Peak Rabi frequency (rad/s): Gamma * sqrt(S * I0 / (2 I_sat)).
inline double rabi_from_pulse(const SignalPulse& s, const PhysicalParams& p) {
  const double i0 = peak_intensity(s);
  return p.gamma_excited * std::sqrt(p.transition_strength * i0 / (2.0 * p.saturation_intensity));
}

/// Factor applied to the angular-unit formula by the active convention.
inline double unit_factor(PhaseUnits u) { return u == PhaseUnits::cycles ? 1.0 / kTwoPi : 1.0; }

/// Closed-form phase for a physical pulse in the configured unit convention.
inline double stark_phase(const SignalPulse& s, const PhysicalParams& p) {
  const auto ap = analytic_params(p);
  const double rabi = rabi_from_pulse(s, p);
  if (ap.units == PhaseUnits::cycles) {
    return xpm_phase(angular_to_hz(rabi), angular_to_hz(s.detuning_delta), s.duration_tau,
                     angular_to_hz(ap.gamma_hwhm));
  }
  return xpm_phase(rabi, s.detuning_delta, s.duration_tau, ap.gamma_hwhm);
}

/// Phase imparted by a pulse holding exactly one photon with the template's
/// duration, waist and detuning.
inline double phase_per_photon(const SignalPulse& signal_template, const PhysicalParams& p) {
  SignalPulse one = signal_template;
  one.energy = energy_of_photons(1.0, p.wavelength);
  return stark_phase(one, p);
}

/// Closed-form phase over a list of detunings at the template's energy.
inline std::vector<std::pair<double, double>> phase_vs_detuning(const SignalPulse& signal_template,
                                                                const std::vector<double>& deltas,
                                                                const PhysicalParams& p) {
  if (deltas.empty()) throw ConfigError("detuning list is empty");
  std::vector<std::pair<double, double>> out;
  out.reserve(deltas.size());
  SignalPulse s = signal_template;
  for (double d : deltas) {
    s.detuning_delta = d;
    out.emplace_back(d, stark_phase(s, p));
  }
  return out;
}

}  // namespace xpmgem
