#pragma once

// Right-hand side of the four-level Maxwell-Bloch system.
//
// Levels: |1> initial ground (F=2), |2> storage ground (F=1), |3> probe/control
// excited (F'=1), |4> signal excited (F'=2). Probe E couples 1-3 with strength
// Gamma sqrt(d), control Omega couples 2-3, signal Omega_s couples 2-4. The
// two-photon detuning of the memory is the gradient term eta z.
//
// The lower-triangle equations are evaluated as written for sigma_31, sigma_32,
// sigma_41, sigma_42, sigma_43 and conjugated into the stored upper triangle.

#include <cmath>
#include <complex>

#include "xpmgem/model.hpp"

namespace xpmgem {

/// Selects between the printed form of three terms and the form implied by
/// the Hamiltonian that generates all the other terms.
struct EquationVariant {
  /// Coupling on E* sigma_43 in d(sigma_41)/dt: printed Gamma sqrt(3), or Gamma sqrt(d).
  enum class ProbeCoupling41 { printed_sqrt3, sqrt_d } probe_coupling_41 = ProbeCoupling41::printed_sqrt3;
  /// Control term in d(sigma_12)/dt: -Omega* sigma_13 (hamiltonian) or the printed +Omega* sigma_23.
  enum class ControlTerm12 { hamiltonian, printed } control_term_12 = ControlTerm12::hamiltonian;
  /// Detuning on sigma_42: the signal detuning (consistent) or the printed control detuning.
  enum class Detuning42 { signal, printed } detuning_42 = Detuning42::signal;

  bool operator==(const EquationVariant&) const = default;
};

/// Constants of the right-hand side, resolved once per run.
struct BlochCoefficients {
  double gamma = 0;             // Gamma
  double probe_coupling = 0;    // Gamma sqrt(d)
  double coupling_41 = 0;       // coefficient of E* sigma_43 in d(sigma_41)/dt
  double eta = 0;               // gradient slope
  double control_detuning = 0;  // Delta
  double signal_detuning = 0;   // Delta_s (positive = red, like Delta)
  double detuning_42 = 0;       // what multiplies sigma_42
  EquationVariant::ControlTerm12 control_term = EquationVariant::ControlTerm12::hamiltonian;
};

/// The solver's signal detuning. The closed-form delta and the solver's
/// Delta_s have opposite sign conventions (Delta is positive for red).
inline double solver_signal_detuning(double delta) { return -delta; }

inline BlochCoefficients make_coefficients(const PhysicalParams& p, const EquationVariant& v,
                                           double signal_detuning) {
  BlochCoefficients c;
  c.gamma = p.gamma_excited;
  c.probe_coupling = p.gamma_excited * std::sqrt(p.optical_depth);
  c.coupling_41 = v.probe_coupling_41 == EquationVariant::ProbeCoupling41::printed_sqrt3
                      ? p.gamma_excited * std::sqrt(3.0)
                      : c.probe_coupling;
  c.eta = p.gradient_eta;
  c.control_detuning = p.control_detuning;
  c.signal_detuning = signal_detuning;
  c.detuning_42 =
      v.detuning_42 == EquationVariant::Detuning42::signal ? signal_detuning : p.control_detuning;
  c.control_term = v.control_term_12;
  return c;
}

/// Time derivative of one atomic slice. `omega` and `omega_s` are real
/// (control and signal phases are absorbed into the rotating frame);
/// `flip_sign` multiplies eta.
inline AtomicState bloch_rhs(const AtomicState& s, cplx e, double omega, double omega_s, double z,
                             const BlochCoefficients& c, double flip_sign) {
  constexpr cplx I{0.0, 1.0};
  const double sqrt3 = std::sqrt(3.0);
  const double G = c.gamma;
  const double g = c.probe_coupling;
  const cplx ec = std::conj(e);

  const double p1 = s.pop11, p2 = s.pop22, p3 = s.pop33, p4 = s.pop44;
  const cplx c12 = s.coh12, c13 = s.coh13, c23 = s.coh23, c14 = s.coh14, c24 = s.coh24,
             c34 = s.coh34;
  const cplx s21 = std::conj(c12), s31 = std::conj(c13), s32 = std::conj(c23),
             s41 = std::conj(c14), s42 = std::conj(c24), s43 = std::conj(c34);

  const double ez = flip_sign * c.eta * z;
  const double re34 = 2.0 * c34.real();  // sigma_34 + sigma_43

  AtomicState d;
  d.pop11 = (-I * g * (e * s31 - ec * c13)).real() + 0.5 * G * p3;
  d.pop22 = (I * (omega * c23 - omega * s32 + omega_s * c24 - omega_s * s42)).real() +
            G / 12.0 * (p3 + sqrt3 * re34 + 3.0 * p4);
  d.pop33 = (I * (-omega * c23 + omega * s32 - g * (ec * c13 - e * s31))).real() -
            G / 24.0 * (14.0 * p3 + sqrt3 * re34);
  d.pop44 = (-I * (omega_s * c24 - omega_s * s42)).real() - G / 24.0 * (sqrt3 * re34 + 6.0 * p4);

  const cplx control12 =
      c.control_term == EquationVariant::ControlTerm12::hamiltonian ? -omega * c13 : omega * c23;
  d.coh12 = -I * (control12 - omega_s * c14 + g * e * s32 + ez * c12) -
            G / (6.0 * std::sqrt(2.0)) * (sqrt3 * p3 + 3.0 * c34);

  const cplx d31 = I * (-omega * s21 + g * ec * (p3 - p1) + (ez - c.control_detuning) * s31) -
                   G / 24.0 * (7.0 * s31 + sqrt3 * s41);
  const cplx d32 = I * (omega * (p3 - p2) - g * ec * c12 + omega_s * c34 -
                        c.control_detuning * s32) -
                   G / 24.0 * (7.0 * s32 + sqrt3 * s42);
  const cplx d41 = I * (c.coupling_41 * ec * s43 - omega_s * s21 + (ez - c.signal_detuning) * s41) -
                   G / 24.0 * (sqrt3 * s31 + 3.0 * s41);
  const cplx d42 = I * (omega * s43 + omega_s * (p4 - p2) - c.detuning_42 * s42) -
                   G / 24.0 * (sqrt3 * s32 + 3.0 * s42);
  const cplx d43 = I * (omega * s42 - omega_s * c23 + g * e * s41 +
                        (c.control_detuning - c.signal_detuning) * s43) -
                   G / 24.0 * (sqrt3 * (p3 + p4) + 10.0 * s43);

  d.coh13 = std::conj(d31);
  d.coh23 = std::conj(d32);
  d.coh14 = std::conj(d41);
  d.coh24 = std::conj(d42);
  d.coh34 = std::conj(d43);
  return d;
}

}  // namespace xpmgem
