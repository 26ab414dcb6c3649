#pragma once

// Parameter sweeps over signal energy, signal detuning or initial purity,
// evaluated with the closed-form model, the Maxwell-Bloch solver, or both.
// Runs are independent and go to a small thread pool; results are keyed by
// grid index, so the output does not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "xpmgem/config.hpp"
#include "xpmgem/fit.hpp"
#include "xpmgem/observables.hpp"
#include "xpmgem/stark.hpp"

namespace xpmgem {

struct SweepSpec {
  SweepVariable variable = SweepVariable::signal_energy;
  std::vector<double> grid;  // SI: J, rad/s, or fraction
  Configuration base = default_configuration();
  ModelSelect model = ModelSelect::both;
  EnergyScaling energy_scaling = EnergyScaling::fixed_power;
  unsigned threads = 1;  // 0 -> hardware concurrency
  PhaseOptions phase{};
  std::string config_hash;  // carried into the result metadata
};

inline const char* model_tag(ModelSelect m) {
  return m == ModelSelect::analytic ? "analytic" : "mb";
}

struct SweepRow {
  double value = 0.0;  // SI
  double phase = 0.0;  // rad
  double efficiency = std::numeric_limits<double>::quiet_NaN();
  double normalized_efficiency = std::numeric_limits<double>::quiet_NaN();
  double reference_phase_delta = 0.0;
  ModelSelect model = ModelSelect::analytic;  // analytic or maxwell_bloch
  bool ok = true;
  std::string error;
};

struct SweepResult {
  SweepVariable variable = SweepVariable::signal_energy;
  std::vector<SweepRow> rows;  // sorted by value, analytic before mb
  std::string config_hash;
  SolverConfig solver;
  std::vector<double> baseline_efficiency;  // per baseline run
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.ok; }));
  }
};

/// Grid values are SI: J for energy, rad/s for detuning.
inline ValidationReport validate(const SweepSpec& spec) {
  ValidationReport r = validate(spec.base);
  r.require(!spec.grid.empty(), "sweep grid is empty");
  r.require(std::is_sorted(spec.grid.begin(), spec.grid.end()), "sweep grid must be sorted");
  r.require(spec.base.sequence.signal.has_value(), "sweep needs a signal pulse in the base config");
  for (double v : spec.grid) {
    r.require(std::isfinite(v), "sweep grid value is not finite");
    if (spec.variable == SweepVariable::signal_energy) r.require(v >= 0, "sweep energy must be >= 0");
    if (spec.variable == SweepVariable::purity)
      r.require(v >= 0 && v <= 1, "sweep purity must lie in [0, 1]");
  }
  return r;
}

/// The base configuration with the swept variable set to `value`.
inline Configuration apply_sweep_value(const SweepSpec& spec, double value) {
  Configuration c = spec.base;
  auto& s = *c.sequence.signal;
  switch (spec.variable) {
    case SweepVariable::signal_energy:
      s = with_energy(s, value, spec.energy_scaling);
      break;
    case SweepVariable::signal_detuning:
      s.detuning_delta = value;
      break;
    case SweepVariable::purity:
      c.purity = value;
      break;
  }
  return c;
}

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

inline double wrap_near(double phase, double reference) {
  return phase + kTwoPi * std::round((reference - phase) / kTwoPi);
}

}  // namespace detail

inline SweepResult run_sweep(const SweepSpec& spec) {
  validate(spec).throw_if_failed();
  const std::size_t n = spec.grid.size();
  const bool want_analytic = spec.model != ModelSelect::maxwell_bloch;
  const bool want_mb = spec.model != ModelSelect::analytic;

  SweepResult res;
  res.variable = spec.variable;
  res.config_hash = spec.config_hash;
  res.solver = spec.base.solver;

  std::vector<SweepRow> analytic(n), mb(n);
  for (std::size_t i = 0; i < n; ++i) {
    analytic[i].value = mb[i].value = spec.grid[i];
    analytic[i].model = ModelSelect::analytic;
    mb[i].model = ModelSelect::maxwell_bloch;
  }
  if (want_analytic) {
    for (std::size_t i = 0; i < n; ++i) {
      const Configuration c = apply_sweep_value(spec, spec.grid[i]);
      try {
        analytic[i].phase = stark_phase(*c.sequence.signal, c.physics);
      } catch (const std::exception& e) {
        analytic[i].ok = false;
        analytic[i].phase = std::numeric_limits<double>::quiet_NaN();
        analytic[i].error = e.what();
      }
    }
  }

  if (want_mb) {
    // The dark-signal baseline still depends on purity and on the signal
    // detuning (it sets the frame of the 3-4 coherence), so only energy
    // sweeps can share one.
    const bool per_value_baseline = spec.variable != SweepVariable::signal_energy;
    const std::size_t n_base = per_value_baseline ? n : 1;
    struct Job {
      bool baseline;
      std::size_t index;
    };
    std::vector<Job> jobs;
    for (std::size_t b = 0; b < n_base; ++b) jobs.push_back({true, b});
    for (std::size_t i = 0; i < n; ++i) jobs.push_back({false, i});

    std::vector<std::optional<SimulationRecord>> base_rec(n_base), sig_rec(n);
    std::vector<std::string> base_err(n_base), sig_err(n);
    detail::parallel_for(jobs.size(), spec.threads, [&](std::size_t j) {
      const Job job = jobs[j];
      Configuration c = apply_sweep_value(spec, spec.grid[job.index]);
      if (job.baseline) c.sequence = without_signal(c.sequence);
      try {
        SimulationRecord r = run_gem_sequence(c);
        // Only the time series is needed downstream.
        r.snapshots.clear();
        r.field.reset();
        (job.baseline ? base_rec : sig_rec)[job.index] = std::move(r);
      } catch (const std::exception& e) {
        (job.baseline ? base_err : sig_err)[job.index] = e.what();
      }
    });

    res.baseline_efficiency.assign(n_base, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t b = 0; b < n_base; ++b)
      if (base_rec[b]) {
        try {
          res.baseline_efficiency[b] = recall_efficiency(*base_rec[b]);
        } catch (const std::exception& e) {
          base_err[b] = e.what();
        }
      }

    for (std::size_t i = 0; i < n; ++i) {
      SweepRow& row = mb[i];
      const std::size_t b = per_value_baseline ? i : 0;
      try {
        if (!base_rec[b]) throw NumericalError("baseline run failed: " + base_err[b]);
        if (!sig_rec[i]) throw NumericalError(sig_err[i]);
        const PhaseMeasurement m = extract_phase(*sig_rec[i], *base_rec[b], spec.phase);
        row.phase = m.phase_shift;
        row.reference_phase_delta = m.reference_phase_delta;
        row.efficiency = recall_efficiency(*sig_rec[i]);
        row.normalized_efficiency = row.efficiency / res.baseline_efficiency[b];
      } catch (const std::exception& e) {
        row.ok = false;
        row.phase = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
      }
    }
    // The echo phase is only known mod 2 pi; energy sweeps are continuous,
    // so unwrap them along the grid.
    if (spec.variable == SweepVariable::signal_energy) {
      double prev = 0.0;
      for (auto& row : mb) {
        if (!row.ok) continue;
        row.phase = detail::wrap_near(row.phase, prev);
        prev = row.phase;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (want_analytic) res.rows.push_back(analytic[i]);
    if (want_mb) res.rows.push_back(mb[i]);
  }
  return res;
}

/// Builds a sweep spec from configuration-file settings (file units).
inline SweepSpec sweep_spec_from(const RunConfig& rc, unsigned threads = 1) {
  SweepSpec spec;
  spec.variable = rc.sweep.variable;
  spec.base = rc.config;
  spec.model = rc.sweep.model;
  spec.energy_scaling = rc.sweep.energy_scaling;
  spec.threads = threads;
  spec.config_hash = config_hash(rc);
  for (double v : rc.sweep.grid) {
    switch (spec.variable) {
      case SweepVariable::signal_energy: spec.grid.push_back(pj_to_joule(v)); break;
      case SweepVariable::signal_detuning: spec.grid.push_back(hz_to_angular(v)); break;
      case SweepVariable::purity: spec.grid.push_back(v); break;
    }
  }
  return spec;
}

struct Extrapolation {
  double phase_per_photon = 0.0;  // rad
  double sigma = 0.0;             // rad
  double slope = 0.0;             // rad / J
  double slope_sigma = 0.0;
  std::size_t n_points = 0;
  ModelSelect model = ModelSelect::analytic;
};

/// Per-photon phase from the low-energy rows of an energy sweep: least-squares
/// slope through the origin, times one photon energy.
inline Extrapolation extrapolate_single_photon(const SweepResult& sweep, double wavelength,
                                               double cutoff = pj_to_joule(5.0),
                                               std::optional<ModelSelect> model = std::nullopt) {
  if (sweep.variable != SweepVariable::signal_energy)
    throw FitError("extrapolation needs a signal_energy sweep");
  ModelSelect use = ModelSelect::analytic;
  if (model) {
    use = *model;
  } else {
    const bool has_analytic = std::any_of(sweep.rows.begin(), sweep.rows.end(), [](const SweepRow& r) {
      return r.model == ModelSelect::analytic;
    });
    use = has_analytic ? ModelSelect::analytic : ModelSelect::maxwell_bloch;
  }
  std::vector<DataPoint> pts;
  for (const auto& r : sweep.rows)
    if (r.model == use && r.ok && r.value > 0 && r.value <= cutoff) pts.push_back({r.value, r.phase, 0});
  if (pts.size() < 3) throw FitError("insufficient linear-regime points for extrapolation (need 3)");
  const SlopeFit f = fit_through_origin(pts);
  const double e1 = energy_of_photons(1.0, wavelength);
  Extrapolation out;
  out.slope = f.slope;
  out.slope_sigma = f.sigma;
  out.phase_per_photon = f.slope * e1;
  out.sigma = f.sigma * e1;
  out.n_points = f.n_points;
  out.model = use;
  return out;
}

}  // namespace xpmgem
