#pragma once

// JSON configuration files. The file speaks Hz, pJ, um, us and ns; this is
// the only place those are converted to the SI/angular internals. Unknown
// keys are rejected so typos surface as errors naming the key.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xpmgem/configuration.hpp"
#include "xpmgem/errors.hpp"
#include "xpmgem/observables.hpp"
#include "xpmgem/units.hpp"

namespace xpmgem {

using json = nlohmann::json;

enum class SweepVariable { signal_energy, signal_detuning, purity };
enum class ModelSelect { analytic, maxwell_bloch, both };

struct SweepSettings {
  SweepVariable variable = SweepVariable::signal_energy;
  std::vector<double> grid;  // file units: pJ, Hz or fraction
  ModelSelect model = ModelSelect::both;
  EnergyScaling energy_scaling = EnergyScaling::fixed_power;
  double extrapolation_cutoff_pj = 5.0;
  bool operator==(const SweepSettings&) const = default;
};

struct AbsorptionSettings {
  std::vector<double> purities{1.0, 0.99, 0.98};
  double delta_min_hz = -30e6;
  double delta_max_hz = 30e6;
  std::size_t points = 21;
  double noise_rms = 0.0;
  AbsorptionOptions options{64, 2e-9, 2e-6, 4e-6, 1e-4, {}};

  std::vector<double> delta_grid() const {
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
      const double f = points > 1 ? static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
      // Round away the interpolation noise so grid points print cleanly.
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12g", delta_min_hz + f * (delta_max_hz - delta_min_hz));
      g[i] = hz_to_angular(std::strtod(buf, nullptr));
    }
    return g;
  }
  bool operator==(const AbsorptionSettings& o) const {
    return purities == o.purities && delta_min_hz == o.delta_min_hz &&
           delta_max_hz == o.delta_max_hz && points == o.points && noise_rms == o.noise_rms &&
           options.n_z == o.options.n_z && options.dt == o.options.dt &&
           options.pulse_width == o.options.pulse_width && options.tail == o.options.tail &&
           options.amplitude == o.options.amplitude && options.equations == o.options.equations;
  }
};

struct HeterodyneSettings {
  bool enabled = false;
  double lo_hz = 2e6;
  double lo_amplitude = 1e-4;
  double noise_rms = 0.0;
  bool operator==(const HeterodyneSettings&) const = default;
};

struct OutputSettings {
  bool time_series = true;
  HeterodyneSettings heterodyne;
  bool operator==(const OutputSettings&) const = default;
};

/// A whole configuration file.
struct RunConfig {
  Configuration config = default_configuration();
  OutputSettings output;
  SweepSettings sweep;
  AbsorptionSettings absorption;
  bool operator==(const RunConfig&) const = default;
};

inline RunConfig default_run_config() {
  RunConfig r;
  r.sweep.grid = {0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
  return r;
}

namespace detail {

/// The file-unit number that loads back to exactly `si` via a * factor,
/// preferring the shortest decimal.
inline double to_file_units(double si, double factor) {
  const double a = si / factor;
  if (!std::isfinite(a)) return a;
  for (int digits = 6; digits <= 17; ++digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, a);
    const double c = std::strtod(buf, nullptr);
    if (c * factor == si) return c;
  }
  double lo = a, hi = a;
  for (int i = 0; i < 16; ++i) {
    lo = std::nextafter(lo, -INFINITY);
    hi = std::nextafter(hi, INFINITY);
    if (lo * factor == si) return lo;
    if (hi * factor == si) return hi;
  }
  return a;
}

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object", path_);
  }
  ~Section() = default;

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k); }
  bool is_null(const std::string& k) const { return j_.contains(k) && j_.at(k).is_null(); }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k, std::optional<double> fallback = std::nullopt) {
    if (!has(k)) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key " + key(k), key(k));
    }
    const json& v = raw(k);
    if (!v.is_number()) throw ConfigError(key(k) + " must be a number", key(k));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k) + " must be finite", key(k));
    return d;
  }
  std::size_t count(const std::string& k, std::size_t fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(key(k) + " must be a non-negative integer", key(k));
    return v.get<std::size_t>();
  }
  bool boolean(const std::string& k, bool fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_boolean()) throw ConfigError(key(k) + " must be true or false", key(k));
    return v.get<bool>();
  }
  std::string text(const std::string& k, const std::string& fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_string()) throw ConfigError(key(k) + " must be a string", key(k));
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& k, const std::vector<double>& fallback) {
    if (!has(k)) return fallback;
    const json& v = raw(k);
    if (!v.is_array()) throw ConfigError(key(k) + " must be an array of numbers", key(k));
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key(k) + " must be an array of numbers", key(k));
      out.push_back(e.get<double>());
    }
    return out;
  }
  Section child(const std::string& k) {
    if (!has(k)) throw ConfigError("missing required key " + key(k), key(k));
    return Section(raw(k), key(k));
  }

  /// Throws on any key that was never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + key(it.key()), key(it.key()));
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E>
struct EnumName {
  E value;
  const char* name;
};

template <class E, std::size_t N>
E parse_enum(const std::string& s, const EnumName<E> (&table)[N], const std::string& key) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  std::string allowed;
  for (const auto& e : table) allowed += (allowed.empty() ? "" : "|") + std::string(e.name);
  throw ConfigError(key + " must be one of " + allowed, key);
}

template <class E, std::size_t N>
const char* enum_name(E v, const EnumName<E> (&table)[N]) {
  for (const auto& e : table)
    if (v == e.value) return e.name;
  return "?";
}

inline constexpr EnumName<PhaseUnits> kPhaseUnits[] = {{PhaseUnits::cycles, "cycles"},
                                                       {PhaseUnits::angular, "angular"}};
inline constexpr EnumName<EquationVariant::ProbeCoupling41> kCoupling41[] = {
    {EquationVariant::ProbeCoupling41::printed_sqrt3, "printed_sqrt3"},
    {EquationVariant::ProbeCoupling41::sqrt_d, "sqrt_d"}};
inline constexpr EnumName<EquationVariant::ControlTerm12> kControl12[] = {
    {EquationVariant::ControlTerm12::hamiltonian, "hamiltonian"},
    {EquationVariant::ControlTerm12::printed, "printed"}};
inline constexpr EnumName<EquationVariant::Detuning42> kDetuning42[] = {
    {EquationVariant::Detuning42::signal, "signal"}, {EquationVariant::Detuning42::printed, "printed"}};
inline constexpr EnumName<BeamProfileKind> kProfile[] = {{BeamProfileKind::uniform, "uniform"},
                                                         {BeamProfileKind::gaussian_beam, "gaussian_beam"}};
inline constexpr EnumName<Integrator> kIntegrator[] = {{Integrator::rk4_fixed, "rk4"},
                                                       {Integrator::rk45_adaptive, "rk45"}};
inline constexpr EnumName<SweepVariable> kVariable[] = {
    {SweepVariable::signal_energy, "signal_energy"},
    {SweepVariable::signal_detuning, "signal_detuning"},
    {SweepVariable::purity, "purity"}};
inline constexpr EnumName<ModelSelect> kModel[] = {{ModelSelect::analytic, "analytic"},
                                                   {ModelSelect::maxwell_bloch, "mb"},
                                                   {ModelSelect::both, "both"}};
inline constexpr EnumName<EnergyScaling> kScaling[] = {{EnergyScaling::fixed_power, "fixed_power"},
                                                       {EnergyScaling::fixed_duration, "fixed_duration"}};

constexpr double kHz = kTwoPi;
constexpr double kUs = 1e-6;
constexpr double kUm = 1e-6;
constexpr double kNs = 1e-9;
constexpr double kPj = 1e-12;
constexpr double kNm = 1e-9;
constexpr double kMwCm2 = 10.0;

inline ProbePulse read_pulse(Section s) {
  ProbePulse p;
  p.t_center = s.number("t_center_us") * kUs;
  p.width = s.number("width_us") * kUs;
  p.peak_amplitude = s.number("amplitude");
  s.finish();
  return p;
}

inline json write_pulse(const ProbePulse& p) {
  return {{"t_center_us", to_file_units(p.t_center, kUs)},
          {"width_us", to_file_units(p.width, kUs)},
          {"amplitude", p.peak_amplitude}};
}

}  // namespace detail

inline const char* to_string(SweepVariable v) { return detail::enum_name(v, detail::kVariable); }
inline const char* to_string(ModelSelect v) { return detail::enum_name(v, detail::kModel); }
inline const char* to_string(EnergyScaling v) { return detail::enum_name(v, detail::kScaling); }
inline SweepVariable parse_sweep_variable(const std::string& s, const std::string& key = "variable") {
  return detail::parse_enum(s, detail::kVariable, key);
}
inline ModelSelect parse_model(const std::string& s, const std::string& key = "model") {
  return detail::parse_enum(s, detail::kModel, key);
}

/// Parses and validates a configuration document.
inline RunConfig run_config_from_json(const json& root) {
  using namespace detail;
  const RunConfig def = default_run_config();
  const Configuration& dc = def.config;
  RunConfig rc = def;
  Configuration& c = rc.config;

  Section top(root, "");
  {
    Section p = top.child("physics");
    auto& ph = c.physics;
    ph.gamma_excited = p.number("gamma_hz") * kHz;
    ph.optical_depth = p.number("optical_depth");
    ph.control_detuning = p.number("control_detuning_hz") * kHz;
    ph.gradient_eta = p.number("gradient_eta_hz") * kHz;
    ph.broadening_width = p.has("broadening_hz") ? p.number("broadening_hz") * kHz : ph.gradient_eta;
    ph.wavelength = p.number("wavelength_nm", to_file_units(dc.physics.wavelength, kNm)) * kNm;
    ph.saturation_intensity =
        p.number("saturation_intensity_mw_cm2", to_file_units(dc.physics.saturation_intensity, kMwCm2)) *
        kMwCm2;
    ph.transition_strength = p.number("transition_strength", dc.physics.transition_strength);
    ph.stark_gamma_fraction = p.number("stark_gamma_fraction", dc.physics.stark_gamma_fraction);
    ph.phase_units = parse_enum(p.text("phase_units", "cycles"), kPhaseUnits, p.key("phase_units"));
    c.purity = p.number("purity", dc.purity);
    if (p.has("equations")) {
      Section e = p.child("equations");
      c.equations.probe_coupling_41 =
          parse_enum(e.text("probe_coupling_41", "printed_sqrt3"), kCoupling41, e.key("probe_coupling_41"));
      c.equations.control_term_12 =
          parse_enum(e.text("control_term_12", "hamiltonian"), kControl12, e.key("control_term_12"));
      c.equations.detuning_42 =
          parse_enum(e.text("detuning_42", "signal"), kDetuning42, e.key("detuning_42"));
      e.finish();
    }
    p.finish();
  }
  {
    Section s = top.child("sequence");
    auto& q = c.sequence;
    if (s.has("reference_pulse")) {
      if (s.is_null("reference_pulse")) {
        s.raw("reference_pulse");
        q.reference_pulse.reset();
      } else {
        q.reference_pulse = read_pulse(s.child("reference_pulse"));
      }
    }
    q.write_pulse = read_pulse(s.child("write_pulse"));
    q.gradient_flip_time = s.number("gradient_flip_us") * kUs;
    q.total_time = s.number("total_us") * kUs;
    q.storage_time = q.gradient_flip_time - q.write_pulse.t_center;
    if (s.has("storage_us")) {
      const double st = s.number("storage_us") * kUs;
      if (std::abs(st - q.storage_time) > 1e-12)
        throw ConfigError("sequence.storage_us inconsistent with flip timing", s.key("storage_us"));
    }
    q.probe_carrier_offset.reset();
    if (s.has("probe_carrier_hz") && !s.is_null("probe_carrier_hz"))
      q.probe_carrier_offset = s.number("probe_carrier_hz") * kHz;
    else if (s.has("probe_carrier_hz"))
      s.raw("probe_carrier_hz");
    if (s.has("control")) {
      Section k = s.child("control");
      c.control.rabi = k.number("rabi_hz", to_file_units(dc.control.rabi, kHz)) * kHz;
      if (k.has("windows_us")) {
        const json& w = k.raw("windows_us");
        if (!w.is_array()) throw ConfigError(k.key("windows_us") + " must be a list of [start, end]", k.key("windows_us"));
        c.control.on_windows.clear();
        for (const auto& pair : w) {
          if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw ConfigError(k.key("windows_us") + " must be a list of [start, end]", k.key("windows_us"));
          c.control.on_windows.push_back({pair[0].get<double>() * kUs, pair[1].get<double>() * kUs});
        }
      }
      k.finish();
    }
    s.finish();
  }
  if (top.has("signal")) {
    if (top.is_null("signal")) {
      top.raw("signal");
      c.sequence.signal.reset();
    } else {
      Section s = top.child("signal");
      SignalPulse sig;
      const SignalPulse ds{};
      sig.energy = s.number("energy_pj", to_file_units(ds.energy, kPj)) * kPj;
      sig.duration_tau = s.number("duration_us", to_file_units(ds.duration_tau, kUs)) * kUs;
      sig.detuning_delta = s.number("detuning_hz", to_file_units(ds.detuning_delta, kHz)) * kHz;
      sig.waist = s.number("waist_um", to_file_units(ds.waist, kUm)) * kUm;
      sig.t_start = s.number("t_start_us", to_file_units(ds.t_start, kUs)) * kUs;
      if (s.has("profile")) {
        Section z = s.child("profile");
        sig.z_profile.kind = parse_enum(z.text("kind", "uniform"), kProfile, z.key("kind"));
        sig.z_profile.focus_z = z.number("focus_z", ds.z_profile.focus_z);
        sig.z_profile.rayleigh_range =
            z.number("rayleigh_range_um", to_file_units(ds.z_profile.rayleigh_range, kUm)) * kUm;
        sig.z_profile.ensemble_length =
            z.number("ensemble_length_um", to_file_units(ds.z_profile.ensemble_length, kUm)) * kUm;
        z.finish();
      }
      s.finish();
      c.sequence.signal = sig;
    }
  }
  if (top.has("solver")) {
    Section s = top.child("solver");
    auto& v = c.solver;
    v.n_z = s.count("n_z", dc.solver.n_z);
    v.dt = s.number("dt_ns", to_file_units(dc.solver.dt, kNs)) * kNs;
    v.integrator = parse_enum(s.text("integrator", "rk4"), kIntegrator, s.key("integrator"));
    v.abs_tol = s.number("abs_tol", dc.solver.abs_tol);
    v.rel_tol = s.number("rel_tol", dc.solver.rel_tol);
    v.trace_tol = s.number("trace_tol", dc.solver.trace_tol);
    v.record_stride = s.count("record_stride", dc.solver.record_stride);
    v.field_stride = s.count("field_stride", dc.solver.field_stride);
    v.snapshot_times.clear();
    for (double t : s.numbers("snapshot_times_us", {})) v.snapshot_times.push_back(t * kUs);
    s.finish();
  }
  if (top.has("output")) {
    Section s = top.child("output");
    rc.output.time_series = s.boolean("time_series", def.output.time_series);
    if (s.has("heterodyne")) {
      Section h = s.child("heterodyne");
      auto& het = rc.output.heterodyne;
      het.enabled = h.boolean("enabled", def.output.heterodyne.enabled);
      het.lo_hz = h.number("lo_hz", def.output.heterodyne.lo_hz);
      het.lo_amplitude = h.number("lo_amplitude", def.output.heterodyne.lo_amplitude);
      het.noise_rms = h.number("noise_rms", def.output.heterodyne.noise_rms);
      h.finish();
    }
    s.finish();
  }
  if (top.has("sweep")) {
    Section s = top.child("sweep");
    auto& w = rc.sweep;
    w.variable = parse_enum(s.text("variable", to_string(def.sweep.variable)), kVariable, s.key("variable"));
    w.grid = s.numbers("grid", def.sweep.grid);
    w.model = parse_enum(s.text("model", to_string(def.sweep.model)), kModel, s.key("model"));
    w.energy_scaling =
        parse_enum(s.text("energy_scaling", to_string(def.sweep.energy_scaling)), kScaling, s.key("energy_scaling"));
    w.extrapolation_cutoff_pj = s.number("extrapolation_cutoff_pj", def.sweep.extrapolation_cutoff_pj);
    s.finish();
  }
  if (top.has("absorption")) {
    Section s = top.child("absorption");
    auto& a = rc.absorption;
    a.purities = s.numbers("purities", def.absorption.purities);
    a.delta_min_hz = s.number("delta_min_hz", def.absorption.delta_min_hz);
    a.delta_max_hz = s.number("delta_max_hz", def.absorption.delta_max_hz);
    a.points = s.count("points", def.absorption.points);
    a.noise_rms = s.number("noise_rms", def.absorption.noise_rms);
    a.options.n_z = s.count("n_z", def.absorption.options.n_z);
    a.options.dt = s.number("dt_ns", to_file_units(def.absorption.options.dt, kNs)) * kNs;
    a.options.pulse_width =
        s.number("pulse_width_us", to_file_units(def.absorption.options.pulse_width, kUs)) * kUs;
    a.options.tail = s.number("tail_us", to_file_units(def.absorption.options.tail, kUs)) * kUs;
    a.options.amplitude = s.number("amplitude", def.absorption.options.amplitude);
    s.finish();
    if (a.points < 1) throw ConfigError("absorption.points must be >= 1", "absorption.points");
    if (a.options.n_z < 2) throw ConfigError("absorption.n_z must be >= 2", "absorption.n_z");
  }
  rc.absorption.options.equations = c.equations;
  top.finish();

  validate(c).throw_if_failed();
  return rc;
}

inline json to_json(const RunConfig& rc) {
  using namespace detail;
  const Configuration& c = rc.config;
  const auto& ph = c.physics;
  json physics = {
      {"gamma_hz", to_file_units(ph.gamma_excited, kHz)},
      {"optical_depth", ph.optical_depth},
      {"control_detuning_hz", to_file_units(ph.control_detuning, kHz)},
      {"gradient_eta_hz", to_file_units(ph.gradient_eta, kHz)},
      {"broadening_hz", to_file_units(ph.broadening_width, kHz)},
      {"wavelength_nm", to_file_units(ph.wavelength, kNm)},
      {"saturation_intensity_mw_cm2", to_file_units(ph.saturation_intensity, kMwCm2)},
      {"transition_strength", ph.transition_strength},
      {"stark_gamma_fraction", ph.stark_gamma_fraction},
      {"phase_units", enum_name(ph.phase_units, kPhaseUnits)},
      {"purity", c.purity},
      {"equations",
       {{"probe_coupling_41", enum_name(c.equations.probe_coupling_41, kCoupling41)},
        {"control_term_12", enum_name(c.equations.control_term_12, kControl12)},
        {"detuning_42", enum_name(c.equations.detuning_42, kDetuning42)}}}};

  const auto& q = c.sequence;
  json windows = json::array();
  for (const auto& w : c.control.on_windows)
    windows.push_back({to_file_units(w.start, kUs), to_file_units(w.end, kUs)});
  json sequence = {
      {"reference_pulse", q.reference_pulse ? write_pulse(*q.reference_pulse) : json(nullptr)},
      {"write_pulse", write_pulse(q.write_pulse)},
      {"gradient_flip_us", to_file_units(q.gradient_flip_time, kUs)},
      {"total_us", to_file_units(q.total_time, kUs)},
      {"probe_carrier_hz",
       q.probe_carrier_offset ? json(to_file_units(*q.probe_carrier_offset, kHz)) : json(nullptr)},
      {"control", {{"rabi_hz", to_file_units(c.control.rabi, kHz)}, {"windows_us", windows}}}};

  json signal = nullptr;
  if (q.signal) {
    const auto& s = *q.signal;
    signal = {{"energy_pj", to_file_units(s.energy, kPj)},
              {"duration_us", to_file_units(s.duration_tau, kUs)},
              {"detuning_hz", to_file_units(s.detuning_delta, kHz)},
              {"waist_um", to_file_units(s.waist, kUm)},
              {"t_start_us", to_file_units(s.t_start, kUs)},
              {"profile",
               {{"kind", enum_name(s.z_profile.kind, kProfile)},
                {"focus_z", s.z_profile.focus_z},
                {"rayleigh_range_um", to_file_units(s.z_profile.rayleigh_range, kUm)},
                {"ensemble_length_um", to_file_units(s.z_profile.ensemble_length, kUm)}}}};
  }

  const auto& v = c.solver;
  json snaps = json::array();
  for (double t : v.snapshot_times) snaps.push_back(to_file_units(t, kUs));
  json solver = {{"n_z", v.n_z},
                 {"dt_ns", to_file_units(v.dt, kNs)},
                 {"integrator", enum_name(v.integrator, kIntegrator)},
                 {"abs_tol", v.abs_tol},
                 {"rel_tol", v.rel_tol},
                 {"trace_tol", v.trace_tol},
                 {"record_stride", v.record_stride},
                 {"field_stride", v.field_stride},
                 {"snapshot_times_us", snaps}};

  const auto& het = rc.output.heterodyne;
  json output = {{"time_series", rc.output.time_series},
                 {"heterodyne",
                  {{"enabled", het.enabled},
                   {"lo_hz", het.lo_hz},
                   {"lo_amplitude", het.lo_amplitude},
                   {"noise_rms", het.noise_rms}}}};

  const auto& w = rc.sweep;
  json sweep = {{"variable", to_string(w.variable)},
                {"grid", w.grid},
                {"model", to_string(w.model)},
                {"energy_scaling", to_string(w.energy_scaling)},
                {"extrapolation_cutoff_pj", w.extrapolation_cutoff_pj}};

  const auto& a = rc.absorption;
  json absorption = {{"purities", a.purities},
                     {"delta_min_hz", a.delta_min_hz},
                     {"delta_max_hz", a.delta_max_hz},
                     {"points", a.points},
                     {"noise_rms", a.noise_rms},
                     {"n_z", a.options.n_z},
                     {"dt_ns", to_file_units(a.options.dt, kNs)},
                     {"pulse_width_us", to_file_units(a.options.pulse_width, kUs)},
                     {"tail_us", to_file_units(a.options.tail, kUs)},
                     {"amplitude", a.options.amplitude}};

  return {{"physics", physics}, {"sequence", sequence}, {"signal", signal},  {"solver", solver},
          {"output", output},   {"sweep", sweep},       {"absorption", absorption}};
}

/// Canonical text of a configuration: sorted keys, shortest round-trip numbers.
inline std::string canonical_dump(const RunConfig& rc) { return to_json(rc).dump(2) + "\n"; }

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
inline std::string config_hash(const RunConfig& rc) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_json(rc).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Reads a configuration file, or the resolved snapshot inside a run manifest.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path, "config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()), "config");
  }
  if (j.is_object() && j.contains("resolved_config")) j = j.at("resolved_config");
  return run_config_from_json(j);
}

inline RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()), "config");
  }
  if (j.is_object() && j.contains("resolved_config")) j = j.at("resolved_config");
  return run_config_from_json(j);
}

struct RunManifest {
  std::string config_path;
  RunConfig resolved;
  std::string tool_version;
  std::string command;
  double runtime_s = 0.0;
  std::vector<std::string> outputs;
};

inline json to_json(const RunManifest& m) {
  return {{"config_path", m.config_path},
          {"config_hash", config_hash(m.resolved)},
          {"resolved_config", to_json(m.resolved)},
          {"tool_version", m.tool_version},
          {"command", m.command},
          {"runtime_s", m.runtime_s},
          {"outputs", m.outputs}};
}

}  // namespace xpmgem
