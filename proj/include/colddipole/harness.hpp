#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "colddipole/config.hpp"
#include "colddipole/core.hpp"
#include "colddipole/coupling.hpp"
#include "colddipole/dimer.hpp"
#include "colddipole/dynamics.hpp"
#include "colddipole/observables.hpp"
#include "colddipole/theory.hpp"

namespace colddipole {

inline constexpr const char* kVersion = "colddipole 0.1.0";

struct RealizationResult {
  bool excluded = false;
  std::string exclusion_reason;
  std::vector<ClosePairEvent> close_pair_events;
  // coarse grid (CSV / spectra), times relative to pulse end
  std::vector<double> p_ex, i_total, i_forward;
  // one polarization-summed complex amplitude series per spectrum direction
  std::vector<std::vector<Complex>> dir_amp_a, dir_amp_b;
  // dense grid around pulse end for the windowed average rate
  std::vector<double> dense_i_total, dense_i_forward;
};

struct EnsembleResult {
  std::vector<double> times; // relative to pulse end
  ObservableSeries series;   // realization-averaged
  std::vector<double> dense_times, dense_i_total, dense_i_forward;
  std::vector<Vec3> directions;
  std::vector<double> spectrum_omega;
  std::vector<std::vector<double>> spectrum_density; // per direction
  std::vector<double> spectrum_avg;
  std::vector<RealizationResult> realizations;
  int n_excluded = 0;
  double wall_clock_s = 0.0;
};

namespace detail {

inline RealizationResult run_realization(const Scenario& sc, int r,
                                         const std::vector<double>& coarse_times,
                                         const std::vector<double>& dense_times) {
  RealizationResult out;
  const double T = sc.pulse.duration;
  const double dt = sc.plan.dt;
  const bool want_spectrum = sc.observables.spectrum;
  const auto dirs = spectrum_directions();
  if (want_spectrum) {
    out.dir_amp_a.resize(dirs.size());
    out.dir_amp_b.resize(dirs.size());
  }
  const Vec3 forward = sc.pulse.propagation_direction;

  AtomSet atoms;
  try {
    atoms = sample_atoms(sc.ensemble, r);
    IntegrationPlan plan = sc.plan;
    plan.sample_stride = 1; // decimate here, against the pulse-end grid
    DriveVector zero_drive;
    zero_drive.omega = Eigen::VectorXcd::Zero(3 * sc.ensemble.n_atoms);

    std::size_t next_coarse = 0, next_dense = 0;
    auto sink = [&](double t, const Eigen::VectorXcd& beta, const CouplingMatrix& V, bool) {
      const double t_rel = t - T;
      const double eps = 0.5 * dt;
      const bool coarse = next_coarse < coarse_times.size() &&
                          std::abs(t_rel - coarse_times[next_coarse]) < eps;
      const bool dense =
          next_dense < dense_times.size() && std::abs(t_rel - dense_times[next_dense]) < eps;
      if (!coarse && !dense) return;
      // post-pulse bookkeeping: drive treated as off from the switch-off
      // instant onwards, so t_rel = 0 reports the 0+ limit
      const double it = total_intensity({t, beta}, V, zero_drive);
      std::vector<Vec3> pos;
      if (sc.observables.forward || (coarse && want_spectrum)) pos = positions_at(atoms, t);
      const double fwd =
          sc.observables.forward ? directional_intensity(beta, pos, forward) : 0.0;
      if (dense) {
        out.dense_i_total.push_back(it);
        out.dense_i_forward.push_back(fwd);
        ++next_dense;
      }
      if (coarse) {
        out.p_ex.push_back(total_excited_population(beta));
        out.i_total.push_back(it);
        out.i_forward.push_back(fwd);
        if (want_spectrum) {
          for (std::size_t d = 0; d < dirs.size(); ++d) {
            const auto [e1, e2] = transverse_pair(dirs[d]);
            out.dir_amp_a[d].push_back(
                far_field_amplitude(beta, pos, dirs[d], e1.cast<Complex>()));
            out.dir_amp_b[d].push_back(
                far_field_amplitude(beta, pos, dirs[d], e2.cast<Complex>()));
          }
        }
        ++next_coarse;
      }
    };
    out.close_pair_events = integrate(atoms, sc.pulse, plan, sink);
  } catch (const DivergenceError& e) {
    out.excluded = true;
    out.exclusion_reason = e.what();
  } catch (const DegeneratePairError& e) {
    out.excluded = true;
    out.exclusion_reason = e.what();
  }
  return out;
}

} // namespace detail

/// Execute M realizations (optionally threaded), average intensities and
/// population sample-wise across realizations, then derive rates and
/// spectra from the averages. Deterministic for a fixed seed regardless of
/// worker count: realizations are seeded by index and reduced in index
/// order.
inline EnsembleResult run_ensemble(const Scenario& sc) {
  const auto t_begin = std::chrono::steady_clock::now();
  const double T = sc.pulse.duration;
  const double dt = sc.plan.dt;
  if (sc.plan.t_end <= T)
    throw std::invalid_argument("run_ensemble: t_end must exceed the pulse duration");

  EnsembleResult res;
  // coarse grid aligned to the pulse end
  const long post_steps = std::lround((sc.plan.t_end - T) / dt);
  for (long k = 0; k <= post_steps; k += sc.plan.sample_stride)
    res.times.push_back(k * dt);
  // dense grid covering the windowed-rate interval
  const long dense_steps =
      std::min(post_steps, std::lround(std::max(2.0 * sc.observables.rate_window_t2, 2 * dt) / dt));
  for (long k = 0; k <= dense_steps; ++k) res.dense_times.push_back(k * dt);

  const int M = sc.ensemble.realizations;
  res.realizations.resize(M);
  const int workers = std::max(1, std::min(sc.workers, M));
  std::atomic<int> next(0);
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= M) return;
      res.realizations[r] = detail::run_realization(sc, r, res.times, res.dense_times);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // fixed-order reduction over included realizations
  int included = 0;
  res.series.times = res.times;
  res.series.p_ex.assign(res.times.size(), 0.0);
  res.series.i_total.assign(res.times.size(), 0.0);
  res.series.i_forward.assign(res.times.size(), 0.0);
  res.dense_i_total.assign(res.dense_times.size(), 0.0);
  res.dense_i_forward.assign(res.dense_times.size(), 0.0);
  res.directions = spectrum_directions();

  for (int r = 0; r < M; ++r) {
    const auto& rr = res.realizations[r];
    if (rr.excluded) {
      ++res.n_excluded;
      continue;
    }
    ++included;
    for (std::size_t k = 0; k < res.times.size(); ++k) {
      res.series.p_ex[k] += rr.p_ex[k];
      res.series.i_total[k] += rr.i_total[k];
      res.series.i_forward[k] += rr.i_forward[k];
    }
    for (std::size_t k = 0; k < res.dense_times.size(); ++k) {
      res.dense_i_total[k] += rr.dense_i_total[k];
      res.dense_i_forward[k] += rr.dense_i_forward[k];
    }
  }
  if (included == 0) throw std::runtime_error("run_ensemble: all realizations excluded");
  if (res.n_excluded > 0 && res.n_excluded > M / 100)
    throw std::runtime_error("run_ensemble: more than 1% of realizations excluded");
  const double inv = 1.0 / included;
  for (auto& v : res.series.p_ex) v *= inv;
  for (auto& v : res.series.i_total) v *= inv;
  for (auto& v : res.series.i_forward) v *= inv;
  for (auto& v : res.dense_i_total) v *= inv;
  for (auto& v : res.dense_i_forward) v *= inv;

  instantaneous_rate(res.series.times, res.series.i_total, res.series.gamma_inst,
                     res.series.tau_inst, sc.observables.rate_smoothing);

  if (sc.observables.spectrum) {
    const std::size_t nd = res.directions.size();
    res.spectrum_density.assign(nd, {});
    for (std::size_t d = 0; d < nd; ++d) {
      std::vector<double> acc;
      for (int r = 0; r < M; ++r) {
        const auto& rr = res.realizations[r];
        if (rr.excluded) continue;
        const Spectrum sa = stft_spectrum(res.times, rr.dir_amp_a[d],
                                          sc.observables.spectrum_window_center,
                                          sc.observables.spectrum_window_width);
        const Spectrum sb = stft_spectrum(res.times, rr.dir_amp_b[d],
                                          sc.observables.spectrum_window_center,
                                          sc.observables.spectrum_window_width);
        if (acc.empty()) {
          acc.assign(sa.density.size(), 0.0);
          if (res.spectrum_omega.empty()) res.spectrum_omega = sa.omega;
        }
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += (sa.density[k] + sb.density[k]) * inv;
      }
      res.spectrum_density[d] = std::move(acc);
    }
    res.spectrum_avg.assign(res.spectrum_omega.size(), 0.0);
    for (std::size_t d = 0; d < nd; ++d)
      for (std::size_t k = 0; k < res.spectrum_avg.size(); ++k)
        res.spectrum_avg[k] += res.spectrum_density[d][k] / static_cast<double>(nd);
  }

  res.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return res;
}

// ---------------------------------------------------------------------------
// file output

namespace detail {

inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

} // namespace detail

inline void write_intensity_csv(const std::filesystem::path& dir, const ObservableSeries& s) {
  auto out = detail::open_out(dir / "intensity.csv");
  out << "t,P_ex,I_total,I_forward,gamma_inst,tau_inst\n";
  for (std::size_t k = 0; k < s.times.size(); ++k)
    out << detail::fmt_full(s.times[k]) << ',' << detail::fmt_full(s.p_ex[k]) << ','
        << detail::fmt_full(s.i_total[k]) << ',' << detail::fmt_full(s.i_forward[k]) << ','
        << detail::fmt_full(s.gamma_inst[k]) << ',' << detail::fmt_full(s.tau_inst[k]) << '\n';
}

inline void write_spectrum_csv(const std::filesystem::path& dir, const EnsembleResult& r) {
  auto out = detail::open_out(dir / "spectrum.csv");
  out << "omega,density_avg";
  for (std::size_t d = 0; d < r.directions.size(); ++d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",density_dir_%02zu", d);
    out << buf;
  }
  out << '\n';
  for (std::size_t k = 0; k < r.spectrum_omega.size(); ++k) {
    out << detail::fmt_full(r.spectrum_omega[k]) << ',' << detail::fmt_full(r.spectrum_avg[k]);
    for (std::size_t d = 0; d < r.directions.size(); ++d)
      out << ',' << detail::fmt_full(r.spectrum_density[d][k]);
    out << '\n';
  }
}

inline void write_manifest(const std::filesystem::path& dir, const Scenario& sc,
                           const EnsembleResult* res, const nlohmann::json& summary) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config_text"] = scenario_to_config_text(sc);
  j["seed"] = sc.ensemble.seed;
  j["realizations"] = sc.ensemble.realizations;
  j["workers"] = sc.workers;
  if (res != nullptr) {
    j["wall_clock_s"] = res->wall_clock_s;
    j["n_excluded"] = res->n_excluded;
    nlohmann::json flags = nlohmann::json::array();
    for (std::size_t r = 0; r < res->realizations.size(); ++r) {
      const auto& rr = res->realizations[r];
      if (!rr.excluded && rr.close_pair_events.empty()) continue;
      nlohmann::json f;
      f["realization"] = r;
      if (rr.excluded) f["excluded"] = rr.exclusion_reason;
      if (!rr.close_pair_events.empty()) {
        nlohmann::json evs = nlohmann::json::array();
        for (const auto& e : rr.close_pair_events)
          evs.push_back({{"t", e.t}, {"distance", e.distance}});
        f["close_pair_events"] = evs;
      }
      flags.push_back(f);
    }
    j["realization_flags"] = flags;
  }
  j["summary"] = summary;
  auto out = detail::open_out(dir / "manifest.json");
  out << j.dump(2) << '\n';
}

/// Run an ensemble scenario and emit intensity.csv, spectrum.csv (when
/// enabled) and manifest.json into `out_dir`.
inline EnsembleResult run_ensemble_to_files(const Scenario& sc,
                                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  EnsembleResult res = run_ensemble(sc);
  write_intensity_csv(out_dir, res.series);
  if (sc.observables.spectrum) write_spectrum_csv(out_dir, res);

  nlohmann::json summary;
  try {
    summary["avg_rate_total"] = average_rate(res.dense_times, res.dense_i_total,
                                             sc.observables.rate_window_t1,
                                             sc.observables.rate_window_t2);
    if (sc.observables.forward)
      summary["avg_rate_forward"] = average_rate(res.dense_times, res.dense_i_forward,
                                                 sc.observables.rate_window_t1,
                                                 sc.observables.rate_window_t2);
  } catch (const std::invalid_argument&) {
    // window outside the dense grid: omit the summary rates
  }
  if (const auto fit = fit_plateau(res.series.times, res.series.tau_inst)) {
    summary["plateau_tau_d"] = fit->tau_d;
    summary["plateau_window"] = {fit->t_lo, fit->t_hi};
  }
  write_manifest(out_dir, sc, &res, summary);
  return res;
}

// ---------------------------------------------------------------------------
// dimer and theory runners

inline int dimer_initial_class(const std::string& name) {
  if (name == "longest") return -1;
  if (name == "shortest") return -2;
  if (name.rfind("class", 0) == 0 && name.size() == 6) {
    const int k = name[5] - '1';
    if (k >= 0 && k < 4) return k;
  }
  throw std::invalid_argument("dimer initial must be longest|shortest|class1..class4");
}

inline void write_flyby_csv(const std::filesystem::path& path,
                            const std::vector<FlybySample>& samples) {
  auto out = detail::open_out(path);
  out << "t,k0r,P_ex,I_total,pop_class1,pop_class2,pop_class3,pop_class4\n";
  for (const auto& s : samples) {
    out << detail::fmt_full(s.t) << ',' << detail::fmt_full(s.k0r) << ','
        << detail::fmt_full(s.p_ex) << ',' << detail::fmt_full(s.i_total);
    for (const double p : s.populations) out << ',' << detail::fmt_full(p);
    out << '\n';
  }
}

/// Fly-by run; `initial = both` additionally produces the two-curve
/// comparison table with the e^{-gamma t} reference column.
inline void run_dimer_flyby_to_files(const Scenario& sc, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  FlybyScenario fs;
  fs.r0 = sc.dimer.r0;
  fs.r_m = sc.dimer.r_m;
  fs.v_rel = sc.dimer.v_rel;
  IntegrationPlan plan = sc.plan;
  plan.t_end = sc.dimer.t_end;

  if (sc.dimer.initial == "both") {
    fs.initial_class = -1;
    const auto longest = flyby(fs, plan);
    fs.initial_class = -2;
    const auto shortest = flyby(fs, plan);
    write_flyby_csv(out_dir / "dimer_flyby_curve1.csv", longest);
    write_flyby_csv(out_dir / "dimer_flyby_curve2.csv", shortest);
    auto out = detail::open_out(out_dir / "flyby_compare.csv");
    out << "t,k0r,P_ex_longest,P_ex_shortest,I_longest,I_shortest,exp_ref\n";
    const double p0 = longest.front().p_ex;
    for (std::size_t k = 0; k < longest.size(); ++k)
      out << detail::fmt_full(longest[k].t) << ',' << detail::fmt_full(longest[k].k0r) << ','
          << detail::fmt_full(longest[k].p_ex) << ',' << detail::fmt_full(shortest[k].p_ex) << ','
          << detail::fmt_full(longest[k].i_total) << ',' << detail::fmt_full(shortest[k].i_total)
          << ',' << detail::fmt_full(p0 * std::exp(-longest[k].t)) << '\n';
  } else {
    fs.initial_class = dimer_initial_class(sc.dimer.initial);
    write_flyby_csv(out_dir / "dimer_flyby.csv", flyby(fs, plan));
  }
  write_manifest(out_dir, sc, nullptr, nlohmann::json::object());
}

inline void run_dimer_modes_to_files(const Scenario& sc, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto out = detail::open_out(out_dir / "dimer_modes.csv");
  out << "k0r,epsilon,p,q,delta_c,gamma_c\n";
  const int n = std::max(1, sc.dimer.points);
  for (int k = 0; k < n; ++k) {
    const double f = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
    const double r = sc.dimer.r_min * std::pow(sc.dimer.r_max / sc.dimer.r_min, f);
    for (const auto& mode : dimer_modes(r))
      out << detail::fmt_full(r) << ',' << mode.epsilon << ',' << mode.p << ',' << mode.q << ','
          << detail::fmt_full(mode.delta_c) << ',' << detail::fmt_full(mode.gamma_c) << '\n';
  }
  write_manifest(out_dir, sc, nullptr, nlohmann::json::object());
}

/// Tabulate b0, b_v, the slab initial rate and the diffusion time over a
/// v0 grid (tau_d uses the Doppler-reduced thickness, cube alpha = 3).
inline void run_theory_to_files(const Scenario& sc, const std::filesystem::path& out_dir,
                                double v0_max, int points) {
  std::filesystem::create_directories(out_dir);
  auto out = detail::open_out(out_dir / "theory.csv");
  out << "k0v0,b0,b_v,slab_rate,tau_d\n";
  for (int k = 0; k < points; ++k) {
    const double v0 = points == 1 ? 0.0 : v0_max * k / (points - 1);
    const auto [b0, bv] = optical_thickness(sc.ensemble.density, sc.ensemble.box_edge, v0);
    out << detail::fmt_full(v0) << ',' << detail::fmt_full(b0) << ',' << detail::fmt_full(bv)
        << ',' << detail::fmt_full(slab_initial_rate(b0, bv)) << ','
        << detail::fmt_full(diffusion_time(bv, 3.0)) << '\n';
  }
  write_manifest(out_dir, sc, nullptr, nlohmann::json::object());
}

} // namespace colddipole
