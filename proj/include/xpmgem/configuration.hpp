#pragma once

#include "xpmgem/bloch.hpp"
#include "xpmgem/gem.hpp"
#include "xpmgem/model.hpp"

namespace xpmgem {

/// Everything a single run needs. Immutable once validated.
struct Configuration {
  PhysicalParams physics;
  PulseSequence sequence;
  ControlField control;
  SolverConfig solver;
  EquationVariant equations;
  double purity = 1.0;

  bool operator==(const Configuration&) const = default;
};

inline ValidationReport validate(const Configuration& c) {
  ValidationReport r = validate_params(c.physics, c.sequence, &c.control);
  validate_into(r, c.solver);
  r.require(c.purity >= 0.0 && c.purity <= 1.0, "purity must lie in [0, 1]");
  return r;
}

/// The reference desk configuration: Rb87 D1 physics, 13 us between write
/// and gradient flip, a 3.7 pJ signal in the storage window.
inline Configuration default_configuration() {
  Configuration c;
  auto& s = c.sequence;
  s.reference_pulse = ProbePulse{us_to_s(1.0), us_to_s(0.3), 1e-4};
  s.write_pulse = ProbePulse{us_to_s(7.0), us_to_s(1.5), 1e-4};
  s.gradient_flip_time = us_to_s(20.0);
  s.storage_time = s.gradient_flip_time - s.write_pulse.t_center;
  s.total_time = us_to_s(38.0);
  s.signal = SignalPulse{};
  c.control.rabi = hz_to_angular(2.0e6);
  c.control.on_windows = {Window{us_to_s(2.0), s.total_time}};
  return c;
}

/// The same sequence with the signal laser dark. The pulse is kept at zero
/// energy rather than removed: the sigma_34 equations carry the signal
/// detuning even without drive, so removing it would change the frame.
inline PulseSequence without_signal(PulseSequence s) {
  if (s.signal) s.signal->energy = 0.0;
  return s;
}

inline SimulationRecord run_gem_sequence(const Configuration& c) {
  return run_gem_sequence(c.physics, c.sequence, c.control, c.solver, c.purity, c.equations);
}

}  // namespace xpmgem
