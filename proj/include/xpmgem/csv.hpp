#pragma once

// Plot-ready CSV tables. Every file starts with "# key: value" metadata lines
// (at least the config hash), then one header row, then data. Header names
// are part of the public contract.

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "xpmgem/config.hpp"
#include "xpmgem/fit.hpp"
#include "xpmgem/gem.hpp"
#include "xpmgem/sweep.hpp"

namespace xpmgem {

inline constexpr const char* kSweepHeader = "value,phase_rad,efficiency,model";
inline constexpr const char* kTimeSeriesHeader = "t_us,in_re,in_im,out_re,out_im";
inline constexpr const char* kAbsorptionHeader = "detuning_hz,transmission";
inline constexpr const char* kPhaseDataHeader = "energy_pj,phase_rad";
inline constexpr const char* kHeterodyneHeader = "t_us,photocurrent";

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* value_units(SweepVariable v) {
  switch (v) {
    case SweepVariable::signal_energy: return "pJ";
    case SweepVariable::signal_detuning: return "Hz";
    case SweepVariable::purity: return "fraction";
  }
  return "";
}

inline double sweep_value_to_file(SweepVariable v, double si) {
  switch (v) {
    case SweepVariable::signal_energy: return detail::to_file_units(si, detail::kPj);
    case SweepVariable::signal_detuning: return detail::to_file_units(si, detail::kHz);
    case SweepVariable::purity: return si;
  }
  return si;
}

inline double sweep_value_from_file(SweepVariable v, double f) {
  switch (v) {
    case SweepVariable::signal_energy: return f * detail::kPj;
    case SweepVariable::signal_detuning: return f * detail::kHz;
    case SweepVariable::purity: return f;
  }
  return f;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "# config_hash: " << r.config_hash << "\n";
  os << "# variable: " << to_string(r.variable) << "\n";
  os << "# value_units: " << value_units(r.variable) << "\n";
  if (!r.baseline_efficiency.empty()) {
    os << "# baseline_efficiency:";
    for (double e : r.baseline_efficiency) os << " " << fmt(e);
    os << "\n";
  }
  os << "# solver: n_z=" << r.solver.n_z << " dt_ns=" << fmt(detail::to_file_units(r.solver.dt, detail::kNs))
     << " integrator=" << (r.solver.integrator == Integrator::rk4_fixed ? "rk4" : "rk45") << "\n";
  os << kSweepHeader << "\n";
  for (const auto& row : r.rows)
    os << fmt(sweep_value_to_file(r.variable, row.value)) << "," << fmt(row.phase) << ","
       << fmt(row.efficiency) << "," << model_tag(row.model) << "\n";
  for (const auto& row : r.rows)
    if (!row.ok)
      os << "# failed: " << model_tag(row.model) << " value=" << fmt(sweep_value_to_file(r.variable, row.value))
         << " error=" << row.error << "\n";
}

/// A parsed table: metadata from comment lines, header names, numeric/text cells.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto key = line.substr(1, colon - 1);
        auto val = line.substr(colon + 1);
        key.erase(0, key.find_first_not_of(' '));
        val.erase(0, val.find_first_not_of(' '));
        if (!t.meta.count(key)) t.meta[key] = val;
      }
      continue;
    }
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError("malformed CSV: row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(t.header.size()),
                        "csv");
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ConfigError("empty CSV file", "csv");
  return t;
}

inline double parse_cell(const std::string& s) {
  if (s == "nan") return std::nan("");
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ConfigError("malformed CSV: not a number: '" + s + "'", "csv");
  return v;
}

inline SweepResult read_sweep_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header != split_csv_line(kSweepHeader))
    throw ConfigError(std::string("malformed CSV: expected header ") + kSweepHeader, "csv");
  SweepResult r;
  if (auto it = t.meta.find("variable"); it != t.meta.end()) r.variable = parse_sweep_variable(it->second);
  if (auto it = t.meta.find("config_hash"); it != t.meta.end()) r.config_hash = it->second;
  for (const auto& cells : t.rows) {
    SweepRow row;
    row.value = sweep_value_from_file(r.variable, parse_cell(cells[0]));
    row.phase = parse_cell(cells[1]);
    row.efficiency = parse_cell(cells[2]);
    if (cells[3] == "analytic") row.model = ModelSelect::analytic;
    else if (cells[3] == "mb") row.model = ModelSelect::maxwell_bloch;
    else throw ConfigError("malformed CSV: unknown model tag '" + cells[3] + "'", "csv");
    row.ok = std::isfinite(row.phase);
    r.rows.push_back(row);
  }
  return r;
}

/// Reads a two- or three-column data file whose header starts with the given
/// columns; an optional third column holds 1 sigma. Each column is scaled
/// into SI by the matching factor.
inline std::vector<DataPoint> read_points(std::istream& in, const std::string& header, double x_factor,
                                          double y_factor) {
  const CsvTable t = read_csv(in);
  const auto want = split_csv_line(header);
  if (t.header.size() < 2 || t.header.size() > 3 || t.header[0] != want[0] || t.header[1] != want[1])
    throw ConfigError("malformed CSV: expected header " + header + "[,sigma]", "csv");
  if (t.rows.empty()) throw ConfigError("CSV file has no data rows", "csv");
  std::vector<DataPoint> out;
  for (const auto& cells : t.rows) {
    DataPoint p;
    p.x = parse_cell(cells[0]) * x_factor;
    p.y = parse_cell(cells[1]) * y_factor;
    if (cells.size() == 3) p.sigma = parse_cell(cells[2]) * y_factor;
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("malformed CSV: non-finite value", "csv");
    out.push_back(p);
  }
  return out;
}

inline void write_points(std::ostream& os, const std::string& hash, const std::string& header,
                         const std::vector<DataPoint>& pts, double x_factor, double y_factor,
                         const std::map<std::string, std::string>& meta = {}) {
  os << "# config_hash: " << hash << "\n";
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << "\n";
  bool with_sigma = !pts.empty();
  for (const auto& p : pts) with_sigma = with_sigma && p.sigma > 0;
  os << header << (with_sigma ? ",sigma" : "") << "\n";
  for (const auto& p : pts) {
    os << fmt(detail::to_file_units(p.x, x_factor)) << "," << fmt(detail::to_file_units(p.y, y_factor));
    if (with_sigma) os << "," << fmt(detail::to_file_units(p.sigma, y_factor));
    os << "\n";
  }
}

inline void write_time_series_csv(std::ostream& os, const SimulationRecord& r, const std::string& hash) {
  os << "# config_hash: " << hash << "\n";
  os << "# signal: " << (r.sequence.signal ? "on" : "off") << "\n";
  os << kTimeSeriesHeader << "\n";
  for (std::size_t i = 0; i < r.times.size(); ++i)
    os << fmt(detail::to_file_units(r.times[i], detail::kUs)) << "," << fmt(r.input_field[i].real()) << ","
       << fmt(r.input_field[i].imag()) << "," << fmt(r.output_field[i].real()) << ","
       << fmt(r.output_field[i].imag()) << "\n";
}

/// Rebuilds the time series of a record; the caller supplies the sequence.
inline SimulationRecord read_time_series_csv(std::istream& in, const PulseSequence& seq) {
  const CsvTable t = read_csv(in);
  if (t.header != split_csv_line(kTimeSeriesHeader))
    throw ConfigError(std::string("malformed CSV: expected header ") + kTimeSeriesHeader, "csv");
  SimulationRecord r;
  r.sequence = seq;
  for (const auto& c : t.rows) {
    r.times.push_back(parse_cell(c[0]) * detail::kUs);
    r.input_field.emplace_back(parse_cell(c[1]), parse_cell(c[2]));
    r.output_field.emplace_back(parse_cell(c[3]), parse_cell(c[4]));
  }
  return r;
}

}  // namespace xpmgem
