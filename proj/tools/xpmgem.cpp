// Command-line front end: simulate, sweep, absorption, fit, extrapolate.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xpmgem/xpmgem.hpp"

namespace fs = std::filesystem;
using namespace xpmgem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kFit = 4 };

struct Common {
  std::string config;
  std::string output = "out";
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string model;
  bool no_signal = false;
  std::optional<double> purity;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "configuration JSON (or a run manifest)");
  if (config_required) opt->required();
  app->add_option("--output", c.output, "output directory");
  app->add_option("--threads", c.threads, "worker threads for sweeps (0 = all cores)");
  app->add_option("--seed", c.seed, "seed for synthetic noise");
  app->add_option("--model", c.model, "analytic|mb|both")->check(CLI::IsMember({"analytic", "mb", "both"}));
  app->add_flag("--no-signal", c.no_signal, "drop the signal pulse");
  app->add_option("--purity", c.purity, "initial-state purity override");
}

RunConfig resolve(const Common& c) {
  RunConfig rc = c.config.empty() ? default_run_config() : load_run_config(c.config);
  if (c.purity) {
    rc.config.purity = *c.purity;
    rc.absorption.purities = {*c.purity};
  }
  if (c.no_signal) rc.config.sequence = without_signal(rc.config.sequence);
  if (!c.model.empty()) rc.sweep.model = parse_model(c.model, "--model");
  validate(rc.config).throw_if_failed();
  return rc;
}

class Outputs {
 public:
  explicit Outputs(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message(), "--output");
  }
  std::ofstream open(const std::string& name) {
    const fs::path p = dir_ / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string(), "--output");
    files_.push_back(p.string());
    return os;
  }
  void manifest(const Common& c, const RunConfig& rc, const std::string& command, double runtime) {
    RunManifest m;
    m.config_path = c.config;
    m.resolved = rc;
    m.tool_version = kVersion;
    m.command = command;
    m.runtime_s = runtime;
    m.outputs = files_;
    std::ofstream os(dir_ / "manifest.json", std::ios::binary);
    os << to_json(m).dump(2) << "\n";
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_json(std::ofstream os, const json& j) { os << j.dump(2) << "\n"; }

/// "a:b:n" (inclusive linspace) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("grid must be start:stop:count", "--grid");
    const double a = parse_cell(parts[0]), b = parse_cell(parts[1]);
    const double n = parse_cell(parts[2]);
    if (!(n >= 1) || n != std::floor(n)) throw ConfigError("grid count must be a positive integer", "--grid");
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  } else {
    for (const auto& cell : split_csv_line(s)) out.push_back(parse_cell(cell));
  }
  if (out.empty()) throw ConfigError("grid is empty", "--grid");
  return out;
}

int cmd_simulate(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig rc = resolve(c);
  const std::string hash = config_hash(rc);
  const ModelSelect model = c.model.empty() ? ModelSelect::maxwell_bloch : rc.sweep.model;
  Outputs out(c.output);
  json report = {{"config_hash", hash}};
  auto sig = rc.config.sequence.signal;
  if (sig && sig->energy == 0.0) sig.reset();
  if (sig && model != ModelSelect::maxwell_bloch)
    report["analytic_phase_rad"] = stark_phase(*sig, rc.config.physics);

  if (model != ModelSelect::analytic) {
    const SimulationRecord rec = run_gem_sequence(rc.config);
    report["recall_efficiency"] = recall_efficiency(rec);
    report["max_trace_error"] = rec.conservation.max_trace_error;
    report["signal"] = sig.has_value();
    if (rc.output.time_series) {
      auto os = out.open("simulation.csv");
      write_time_series_csv(os, rec, hash);
    }
    if (sig) {
      Configuration base = rc.config;
      base.sequence = without_signal(base.sequence);
      const SimulationRecord ref = run_gem_sequence(base);
      const PhaseMeasurement m = extract_phase(rec, ref);
      report["phase_rad"] = m.phase_shift;
      report["reference_phase_delta_rad"] = m.reference_phase_delta;
      report["phase_valid"] = m.valid;
      report["baseline_efficiency"] = recall_efficiency(ref);
      report["analytic_phase_rad"] = stark_phase(*sig, rc.config.physics);
    }
    const auto& het = rc.output.heterodyne;
    if (het.enabled) {
      const auto& seq = rec.sequence;
      const std::vector<Window> off{{seq.write_window().end, seq.gradient_flip_time}};
      const auto trace = synthesize_heterodyne(rec, hz_to_angular(het.lo_hz), off, het.noise_rms, c.seed,
                                               het.lo_amplitude);
      auto os = out.open("heterodyne.csv");
      os << "# config_hash: " << hash << "\n# seed: " << c.seed << "\n" << kHeterodyneHeader << "\n";
      for (std::size_t i = 0; i < trace.size(); ++i)
        os << fmt(detail::to_file_units(rec.times[i], detail::kUs)) << "," << fmt(trace[i]) << "\n";
    }
  }
  write_json(out.open("simulation_report.json"), report);
  out.manifest(c, rc, "simulate", seconds_since(t0));
  std::cout << report.dump() << "\n";
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& variable, const std::string& grid) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig rc = resolve(c);
  if (!variable.empty()) rc.sweep.variable = parse_sweep_variable(variable, "--variable");
  if (!grid.empty()) rc.sweep.grid = parse_grid(grid);
  SweepSpec spec = sweep_spec_from(rc, c.threads);
  const SweepResult res = run_sweep(spec);
  Outputs out(c.output);
  {
    auto os = out.open("sweep.csv");
    write_sweep_csv(os, res);
  }
  out.manifest(c, rc, "sweep", seconds_since(t0));
  std::cout << "sweep: " << res.rows.size() << " rows, " << res.failures() << " failed -> "
            << (out.dir() / "sweep.csv").string() << "\n";
  if (res.failures() > 0) {
    for (const auto& r : res.rows)
      if (!r.ok) {
        std::cerr << json{{"error", "numerical"},
                          {"value", sweep_value_to_file(res.variable, r.value)},
                          {"model", model_tag(r.model)},
                          {"message", r.error}}
                         .dump()
                  << "\n";
      }
    return kNumerical;
  }
  return kOk;
}

int cmd_absorption(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig rc = resolve(c);
  const std::string hash = config_hash(rc);
  const auto& a = rc.absorption;
  const auto grid = a.delta_grid();
  Outputs out(c.output);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double purity : a.purities) {
    const auto spec = absorption_spectrum(purity, grid, rc.config.physics, a.options);
    std::vector<DataPoint> pts;
    for (const auto& [d, t] : spec) pts.push_back({d, a.noise_rms > 0 ? t + a.noise_rms * noise(rng) : t, 0});
    const std::string name = a.purities.size() == 1 ? "absorption.csv" : "absorption_" + fmt(purity) + ".csv";
    auto os = out.open(name);
    write_points(os, hash, kAbsorptionHeader, pts, detail::kHz, 1.0,
                 {{"purity", fmt(purity)}, {"noise_rms", fmt(a.noise_rms)}, {"seed", std::to_string(c.seed)}});
  }
  out.manifest(c, rc, "absorption", seconds_since(t0));
  std::cout << "absorption: " << a.purities.size() << " spectra x " << grid.size() << " detunings\n";
  return kOk;
}

int cmd_fit(const Common& c, const std::string& kind, const std::string& input) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig rc = resolve(c);
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot open data file " + input, "--input");
  Outputs out(c.output);
  json report = {{"config_hash", config_hash(rc)}, {"input", input}, {"fit", kind}};
  FitResult f;
  if (kind == "waist") {
    const auto pts = read_points(in, kPhaseDataHeader, detail::kPj, 1.0);
    if (!rc.config.sequence.signal) throw ConfigError("waist fit needs a signal template in the config", "signal");
    f = fit_waist(pts, *rc.config.sequence.signal, rc.config.physics, rc.sweep.energy_scaling);
    report["waist_um"] = m_to_um(f.value);
    report["waist_sigma_um"] = m_to_um(f.sigma);
    std::cout << "waist = " << m_to_um(f.value) << " +- " << m_to_um(f.sigma) << " um\n";
  } else {
    const auto pts = read_points(in, kAbsorptionHeader, detail::kHz, 1.0);
    f = fit_impurity(pts, rc.config.physics, rc.absorption.options);
    report["purity"] = f.value;
    report["impurity"] = 1.0 - f.value;
    report["purity_sigma"] = f.sigma;
    report["physical"] = f.physical;
    std::cout << "impurity = " << 1.0 - f.value << " +- " << f.sigma << (f.physical ? "" : " (non-physical)")
              << "\n";
  }
  report["rss"] = f.rss;
  report["n_points"] = f.n_points;
  report["evaluations"] = f.evaluations;
  report["uncertainty_method"] = f.uncertainty_method;
  write_json(out.open("fit_" + kind + ".json"), report);
  out.manifest(c, rc, "fit " + kind, seconds_since(t0));
  return kOk;
}

int cmd_extrapolate(const Common& c, const std::string& input) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig rc = resolve(c);
  SweepResult sweep;
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) throw ConfigError("cannot open sweep file " + input, "--input");
    sweep = read_sweep_csv(in);
  } else {
    if (c.model.empty()) rc.sweep.model = ModelSelect::analytic;
    rc.sweep.variable = SweepVariable::signal_energy;
    sweep = run_sweep(sweep_spec_from(rc, c.threads));
  }
  std::optional<ModelSelect> model;
  if (!c.model.empty() && c.model != "both") model = parse_model(c.model);
  const Extrapolation x = extrapolate_single_photon(sweep, rc.config.physics.wavelength,
                                                    pj_to_joule(rc.sweep.extrapolation_cutoff_pj), model);
  Outputs out(c.output);
  const json report = {{"config_hash", config_hash(rc)},
                       {"source", input.empty() ? "computed" : input},
                       {"model", model_tag(x.model)},
                       {"phase_per_photon_rad", x.phase_per_photon},
                       {"phase_per_photon_sigma_rad", x.sigma},
                       {"phase_per_photon_urad", x.phase_per_photon * 1e6},
                       {"slope_rad_per_pj", x.slope * 1e-12},
                       {"n_points", x.n_points},
                       {"cutoff_pj", rc.sweep.extrapolation_cutoff_pj},
                       {"uncertainty_method", "least-squares slope through origin, residual variance"}};
  write_json(out.open("extrapolate.json"), report);
  out.manifest(c, rc, "extrapolate", seconds_since(t0));
  std::cout << "phase per photon = " << x.phase_per_photon * 1e6 << " +- " << x.sigma * 1e6 << " urad\n";
  return kOk;
}

void report_error(const char* kind, const std::string& message, const std::string& key = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (!key.empty()) j["key"] = key;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-phase modulation in a gradient echo memory"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common sim, swp, abs, fit, ext;
  auto* s_sim = app.add_subcommand("simulate", "run one store/recall sequence");
  add_common(s_sim, sim, true);

  std::string variable, grid;
  auto* s_swp = app.add_subcommand("sweep", "sweep signal energy, detuning or purity");
  add_common(s_swp, swp, true);
  s_swp->add_option("--variable", variable, "signal_energy|signal_detuning|purity");
  s_swp->add_option("--grid", grid, "start:stop:count or comma list, in file units");

  auto* s_abs = app.add_subcommand("absorption", "signal absorption spectra vs initial purity");
  add_common(s_abs, abs, true);

  std::string fit_kind, fit_input;
  auto* s_fit = app.add_subcommand("fit", "fit beam waist or initial-state impurity");
  add_common(s_fit, fit, false);
  s_fit->add_option("kind", fit_kind, "waist|impurity")->required()->check(CLI::IsMember({"waist", "impurity"}));
  s_fit->add_option("--input", fit_input, "CSV data file")->required();

  std::string ext_input;
  auto* s_ext = app.add_subcommand("extrapolate", "single-photon phase from an energy sweep");
  add_common(s_ext, ext, false);
  s_ext->add_option("--input", ext_input, "sweep CSV (otherwise computed from the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kConfig;
  }

  try {
    if (s_sim->parsed()) return cmd_simulate(sim);
    if (s_swp->parsed()) return cmd_sweep(swp, variable, grid);
    if (s_abs->parsed()) return cmd_absorption(abs);
    if (s_fit->parsed()) return cmd_fit(fit, fit_kind, fit_input);
    if (s_ext->parsed()) return cmd_extrapolate(ext, ext_input);
  } catch (const ConfigError& e) {
    report_error("config", e.what(), e.key());
    return kConfig;
  } catch (const NumericalError& e) {
    report_error("numerical", e.what());
    return kNumerical;
  } catch (const FitError& e) {
    report_error("fit", e.what());
    return kFit;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return kOk;
}
