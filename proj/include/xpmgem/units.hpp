#pragma once

#include <numbers>

namespace xpmgem {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;      // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m / s

// Everything inside the library is SI with angular frequencies (rad/s).
// Config files speak Hz, pJ, um, us, ns; these helpers are the only
// conversion point.
constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
constexpr double angular_to_hz(double w) { return w / kTwoPi; }
constexpr double pj_to_joule(double pj) { return pj * 1e-12; }
constexpr double joule_to_pj(double j) { return j * 1e12; }
constexpr double um_to_m(double um) { return um * 1e-6; }
constexpr double m_to_um(double m) { return m * 1e6; }
constexpr double us_to_s(double us) { return us * 1e-6; }
constexpr double s_to_us(double s) { return s * 1e6; }
constexpr double ns_to_s(double ns) { return ns * 1e-9; }
constexpr double s_to_ns(double s) { return s * 1e9; }
constexpr double nm_to_m(double nm) { return nm * 1e-9; }
constexpr double m_to_nm(double m) { return m * 1e9; }
// 1 mW/cm^2 = 10 W/m^2
constexpr double mw_cm2_to_w_m2(double v) { return v * 10.0; }
constexpr double w_m2_to_mw_cm2(double v) { return v / 10.0; }

}  // namespace xpmgem
