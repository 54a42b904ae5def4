#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddipole/core.hpp"
#include "colddipole/dynamics.hpp"

namespace colddipole {

/// Scenario kinds dispatched by the CLI.
enum class ScenarioKind { Ensemble, DimerFlyby, DimerModes, Theory };

struct ObservablesConfig {
  bool forward = true;
  bool spectrum = false;
  double spectrum_window_center = 20.0; // after pulse end
  double spectrum_window_width = 30.0;
  double rate_window_t1 = 0.0;  // windowed average rate, after pulse end
  double rate_window_t2 = 0.01;
  int rate_smoothing = 0; // boxcar width on ln I, samples; 0 = off
};

struct DimerConfig {
  double r0 = 3.5;
  double r_m = 0.1;
  double v_rel = 0.2;
  std::string initial = "longest"; // longest|shortest|class1..class4
  double t_end = 40.0;
  double r_min = 0.3; // modes table sweep
  double r_max = 30.0;
  int points = 30;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Ensemble;
  EnsembleConfig ensemble;
  Pulse pulse;
  IntegrationPlan plan;
  ObservablesConfig observables;
  DimerConfig dimer;
  int workers = 1;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace detail

/// Flat key = value text with [sections]; '#' starts a comment. Unknown
/// sections or keys are errors.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section");
      section = detail::trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": key outside section");
    out[section][detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace detail {

struct SectionReader {
  const std::string name;
  std::map<std::string, std::string> kv;
  std::vector<std::string> seen;

  bool has(const std::string& key) {
    if (kv.count(key)) {
      seen.push_back(key);
      return true;
    }
    return false;
  }
  std::string str(const std::string& key, const std::string& def) {
    return has(key) ? kv.at(key) : def;
  }
  double num(const std::string& key, double def) {
    if (!has(key)) return def;
    std::size_t pos = 0;
    const double v = std::stod(kv.at(key), &pos);
    if (pos != kv.at(key).size())
      throw std::invalid_argument("config [" + name + "] " + key + ": bad number");
    return v;
  }
  long integer(const std::string& key, long def) {
    if (!has(key)) return def;
    return std::stol(kv.at(key));
  }
  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    const std::string v = kv.at(key);
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw std::invalid_argument("config [" + name + "] " + key + ": bad boolean");
  }
  Vec3 vec3(const std::string& key, const Vec3& def) {
    if (!has(key)) return def;
    std::istringstream in(kv.at(key));
    Vec3 v;
    if (!(in >> v[0] >> v[1] >> v[2]))
      throw std::invalid_argument("config [" + name + "] " + key + ": need three numbers");
    return v;
  }
  void finish() const {
    for (const auto& [key, value] : kv)
      if (std::find(seen.begin(), seen.end(), key) == seen.end())
        throw std::invalid_argument("config [" + name + "]: unknown key '" + key + "'");
  }
};

} // namespace detail

inline Polarization parse_polarization(const std::string& s) {
  if (s == "right-circular") return Polarization::RightCircular;
  if (s == "left-circular") return Polarization::LeftCircular;
  if (s == "linear-x") return Polarization::LinearX;
  if (s == "linear-y") return Polarization::LinearY;
  throw std::invalid_argument("bad polarization: " + s);
}

inline std::string polarization_name(Polarization p) {
  switch (p) {
    case Polarization::RightCircular: return "right-circular";
    case Polarization::LeftCircular: return "left-circular";
    case Polarization::LinearX: return "linear-x";
    case Polarization::LinearY: return "linear-y";
  }
  return "?";
}

inline Scenario scenario_from_config(const ConfigMap& cfg) {
  Scenario sc;
  for (const auto& [section, _] : cfg)
    if (section != "scenario" && section != "ensemble" && section != "pulse" &&
        section != "integration" && section != "observables" && section != "dimer")
      throw std::invalid_argument("config: unknown section [" + section + "]");

  if (cfg.count("scenario")) {
    detail::SectionReader r{"scenario", cfg.at("scenario")};
    const std::string kind = r.str("kind", "ensemble");
    if (kind == "ensemble") sc.kind = ScenarioKind::Ensemble;
    else if (kind == "dimer-flyby") sc.kind = ScenarioKind::DimerFlyby;
    else if (kind == "dimer-modes") sc.kind = ScenarioKind::DimerModes;
    else if (kind == "theory") sc.kind = ScenarioKind::Theory;
    else throw std::invalid_argument("config [scenario] kind: " + kind);
    sc.workers = static_cast<int>(r.integer("workers", 1));
    r.finish();
  }
  if (cfg.count("ensemble")) {
    detail::SectionReader r{"ensemble", cfg.at("ensemble")};
    sc.ensemble.n_atoms = static_cast<int>(r.integer("n_atoms", 1));
    // either density or box_edge may be given; both are cross-checked
    const bool has_edge = r.kv.count("box_edge") > 0;
    sc.ensemble.density = r.num("density", has_edge ? 0.0 : 0.005);
    sc.ensemble.box_edge = r.num("box_edge", 0.0);
    sc.ensemble.v0 = r.num("v0", 0.0);
    sc.ensemble.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
    sc.ensemble.realizations = static_cast<int>(r.integer("realizations", 1));
    sc.ensemble.validate();
    r.finish();
  }
  if (cfg.count("pulse")) {
    detail::SectionReader r{"pulse", cfg.at("pulse")};
    sc.pulse.rabi_amplitude = r.num("rabi_amplitude", 1e-2);
    sc.pulse.detuning = r.num("detuning", 0.0);
    sc.pulse.duration = r.num("duration", 50.0);
    sc.pulse.propagation_direction = r.vec3("propagation_direction", Vec3(0, 0, 1)).normalized();
    sc.pulse.polarization = parse_polarization(r.str("polarization", "right-circular"));
    sc.pulse.validate();
    r.finish();
  }
  if (cfg.count("integration")) {
    detail::SectionReader r{"integration", cfg.at("integration")};
    sc.plan.dt = r.num("dt", 0.01);
    sc.plan.t_end = r.num("t_end", sc.pulse.duration + 40.0);
    sc.plan.sample_stride = static_cast<int>(r.integer("sample_stride", 10));
    sc.plan.kernel_rebuild_interval = static_cast<int>(r.integer("kernel_rebuild_interval", 0));
    sc.plan.validate();
    r.finish();
  }
  if (cfg.count("observables")) {
    detail::SectionReader r{"observables", cfg.at("observables")};
    sc.observables.forward = r.flag("forward", true);
    sc.observables.spectrum = r.flag("spectrum", false);
    sc.observables.spectrum_window_center = r.num("spectrum_window_center", 20.0);
    sc.observables.spectrum_window_width = r.num("spectrum_window_width", 30.0);
    sc.observables.rate_window_t1 = r.num("rate_window_t1", 0.0);
    sc.observables.rate_window_t2 = r.num("rate_window_t2", 0.01);
    sc.observables.rate_smoothing = static_cast<int>(r.integer("rate_smoothing", 0));
    r.finish();
  }
  if (cfg.count("dimer")) {
    detail::SectionReader r{"dimer", cfg.at("dimer")};
    sc.dimer.r0 = r.num("r0", 3.5);
    sc.dimer.r_m = r.num("r_m", 0.1);
    sc.dimer.v_rel = r.num("v_rel", 0.2);
    sc.dimer.initial = r.str("initial", "longest");
    sc.dimer.t_end = r.num("t_end", 40.0);
    sc.dimer.r_min = r.num("r_min", 0.3);
    sc.dimer.r_max = r.num("r_max", 30.0);
    sc.dimer.points = static_cast<int>(r.integer("points", 30));
    r.finish();
  }
  return sc;
}

/// Render the resolved scenario back to config text (embedded in manifests;
/// re-parsing it reproduces the run).
inline std::string scenario_to_config_text(const Scenario& sc) {
  std::ostringstream out;
  out.precision(17);
  const char* kind = sc.kind == ScenarioKind::Ensemble     ? "ensemble"
                     : sc.kind == ScenarioKind::DimerFlyby ? "dimer-flyby"
                     : sc.kind == ScenarioKind::DimerModes ? "dimer-modes"
                                                           : "theory";
  out << "[scenario]\nkind = " << kind << "\nworkers = " << sc.workers << "\n";
  out << "[ensemble]\nn_atoms = " << sc.ensemble.n_atoms << "\ndensity = " << sc.ensemble.density
      << "\nbox_edge = " << sc.ensemble.box_edge << "\nv0 = " << sc.ensemble.v0
      << "\nseed = " << sc.ensemble.seed << "\nrealizations = " << sc.ensemble.realizations << "\n";
  out << "[pulse]\nrabi_amplitude = " << sc.pulse.rabi_amplitude
      << "\ndetuning = " << sc.pulse.detuning << "\nduration = " << sc.pulse.duration
      << "\npropagation_direction = " << sc.pulse.propagation_direction[0] << " "
      << sc.pulse.propagation_direction[1] << " " << sc.pulse.propagation_direction[2]
      << "\npolarization = " << polarization_name(sc.pulse.polarization) << "\n";
  out << "[integration]\ndt = " << sc.plan.dt << "\nt_end = " << sc.plan.t_end
      << "\nsample_stride = " << sc.plan.sample_stride
      << "\nkernel_rebuild_interval = " << sc.plan.kernel_rebuild_interval << "\n";
  out << "[observables]\nforward = " << (sc.observables.forward ? "true" : "false")
      << "\nspectrum = " << (sc.observables.spectrum ? "true" : "false")
      << "\nspectrum_window_center = " << sc.observables.spectrum_window_center
      << "\nspectrum_window_width = " << sc.observables.spectrum_window_width
      << "\nrate_window_t1 = " << sc.observables.rate_window_t1
      << "\nrate_window_t2 = " << sc.observables.rate_window_t2
      << "\nrate_smoothing = " << sc.observables.rate_smoothing << "\n";
  if (sc.kind == ScenarioKind::DimerFlyby || sc.kind == ScenarioKind::DimerModes) {
    out << "[dimer]\nr0 = " << sc.dimer.r0 << "\nr_m = " << sc.dimer.r_m
        << "\nv_rel = " << sc.dimer.v_rel << "\ninitial = " << sc.dimer.initial
        << "\nt_end = " << sc.dimer.t_end << "\nr_min = " << sc.dimer.r_min
        << "\nr_max = " << sc.dimer.r_max << "\npoints = " << sc.dimer.points << "\n";
  }
  return out.str();
}

} // namespace colddipole
