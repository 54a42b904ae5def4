// Acceptance gate: one pass/fail line per criterion. Groups:
//   fast     - criteria 1, 2, 3, 4, 5, 8, 9 (seconds to a few minutes)
//   trapping - criterion 6 (static 625-atom trapping plateau)
//   motion   - criterion 7a-f (moving-atom sweeps and dimer fly-bys)
//   all      - everything

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <colddipole/harness.hpp>

using namespace colddipole;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& label, const std::string& details) {
  std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", label.c_str(),
              details.empty() ? "" : " — ", details.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------- 1
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  AtomSet atom;
  atom.positions = {Vec3(0, 0, 0)};
  atom.velocities = {Vec3(0, 0, 0)};
  Pulse pulse;
  pulse.rabi_amplitude = 0.01;
  pulse.duration = 50.0;
  IntegrationPlan plan;
  plan.dt = 0.01;
  plan.t_end = 60.0;
  plan.sample_stride = 10;

  const auto states = integrate_collect(atom, pulse, plan);
  double p_at_T = 0.0, worst = 0.0;
  for (const auto& s : states) {
    if (std::abs(s.t - 50.0) < 1e-9) p_at_T = s.beta.squaredNorm();
    if (s.t > 50.0 + 1e-9) {
      const double expect = p_at_T * std::exp(-(s.t - 50.0));
      worst = std::max(worst, std::abs(s.beta.squaredNorm() - expect) / expect);
    }
  }
  const double dt = seconds_since(t0);
  report(worst < 1e-6 && dt < 1.0, "criterion 1: single-atom exactness",
         fmt("max rel error %.2e over 10 post-pulse lifetimes, %.2f s", worst, dt));
}

// ---------------------------------------------------------------------- 2
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const Vec3 axis = Vec3(0.36, -0.48, 0.8).normalized();
  double worst_eig = 0.0, worst_sum = 0.0;
  bool degeneracy_ok = true;
  for (int k = 0; k < 30; ++k) {
    const double x = 0.3 * std::pow(100.0, k / 29.0); // 30 log-spaced in [0.3, 30]
    const std::vector<Vec3> pos = {Vec3(0, 0, 0), x * axis};
    const Eigen::MatrixXcd M =
        Complex(0, 0.5) * assemble(pos).v - 0.5 * Eigen::MatrixXcd::Identity(6, 6);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M);
    std::vector<Complex> eig(es.eigenvalues().data(), es.eigenvalues().data() + 6);

    double width_sum = 0.0;
    std::vector<Complex> predicted;
    for (const auto& [eps, p, q] : kDimerClassOrder) {
      const auto [delta, width] = dimer_shift_width(x, eps, p, q);
      const int mult = p == 1 ? 2 : 1;
      width_sum += mult * width;
      for (int m = 0; m < mult; ++m) predicted.emplace_back(-0.5 * width, -delta);
    }
    worst_sum = std::max(worst_sum, std::abs(width_sum - 6.0));

    // greedy nearest matching of the two multisets
    std::vector<bool> used(6, false);
    for (const Complex p : predicted) {
      double best = 1e9;
      int bi = -1;
      for (int j = 0; j < 6; ++j)
        if (!used[j] && std::abs(eig[j] - p) < best) {
          best = std::abs(eig[j] - p);
          bi = j;
        }
      used[bi] = true;
      worst_eig = std::max(worst_eig, best);
    }
    // the two transverse classes must appear as numerically degenerate pairs
    for (const auto& [eps, p, q] : kDimerClassOrder) {
      if (p != 1) continue;
      const auto [delta, width] = dimer_shift_width(x, eps, p, q);
      const Complex lam(-0.5 * width, -delta);
      int close = 0;
      for (const Complex e : eig)
        if (std::abs(e - lam) < 1e-8) ++close;
      if (close != 2) degeneracy_ok = false;
    }
  }
  const double dt = seconds_since(t0);
  report(worst_eig < 1e-10 && worst_sum < 1e-12 && degeneracy_ok && dt < 1.0,
         "criterion 2: dimer closed forms vs 6x6 diagonalization",
         fmt("max eigenvalue error %.2e, width-sum error %.2e, degenerate pairs %s, %.2f s",
             worst_eig, worst_sum, degeneracy_ok ? "found" : "MISSING", dt));
}

// ---------------------------------------------------------------------- 3
namespace quad {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double t1 = t - p1 / dp;
      const bool done = std::abs(t1 - t) < 1e-15;
      t = t1;
      if (done) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

double angular_power(const Eigen::VectorXcd& beta, const std::vector<Vec3>& positions) {
  const int n_theta = 64, n_phi = 128;
  std::vector<double> ct, w;
  gauss_legendre(n_theta, ct, w);
  double acc = 0.0;
  for (int i = 0; i < n_theta; ++i) {
    const double st = std::sqrt(1.0 - ct[i] * ct[i]);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * kPi * j / n_phi;
      const Vec3 n(st * std::cos(phi), st * std::sin(phi), ct[i]);
      acc += w[i] * directional_intensity(beta, positions, n);
    }
  }
  return acc * 2.0 * kPi / n_phi;
}

} // namespace quad

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101, 0);
  std::vector<double> ratios;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec3> pos;
    for (int i = 0; i < 5; ++i)
      pos.emplace_back(rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0, 6));
    Eigen::VectorXcd beta(15);
    for (int k = 0; k < 15; ++k) beta[k] = Complex(rng.gaussian(), rng.gaussian());
    beta /= beta.norm();
    DriveVector off;
    off.omega = Eigen::VectorXcd::Zero(15);
    const double balance = total_intensity({0.0, beta}, assemble(pos), off);
    ratios.push_back(quad::angular_power(beta, pos) / balance);
  }
  double mean = 0.0;
  for (const double r : ratios) mean += r;
  mean /= ratios.size();
  double worst = 0.0;
  for (const double r : ratios) worst = std::max(worst, std::abs(r - mean) / mean);
  const double dt = seconds_since(t0);
  report(worst < 0.005 && dt < 60.0, "criterion 3: energy-conservation quadrature",
         fmt("common constant %.6f, max spread %.2e over 10 configs, %.1f s", mean, worst, dt));
}

// ---------------------------------------------------------------------- 4
void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc;
  sc.ensemble = EnsembleConfig::make(25, 0.005, 0.0, 0.5, 7, 1);
  sc.pulse.duration = 5.0;
  sc.plan.dt = 0.01;
  sc.plan.t_end = 15.0;
  sc.plan.sample_stride = 10;
  sc.observables.forward = false;

  sc.pulse.rabi_amplitude = 1e-2;
  const auto a = run_ensemble(sc);
  sc.pulse.rabi_amplitude = 1e-1;
  const auto b = run_ensemble(sc);

  double worst = 0.0;
  bool pattern_ok = true;
  for (std::size_t k = 0; k < a.series.tau_inst.size(); ++k) {
    const bool na = std::isnan(a.series.tau_inst[k]), nb = std::isnan(b.series.tau_inst[k]);
    if (na != nb) pattern_ok = false;
    if (na || nb) continue;
    worst = std::max(worst, std::abs(a.series.tau_inst[k] - b.series.tau_inst[k]) /
                                std::abs(a.series.tau_inst[k]));
  }
  report(pattern_ok && worst < 1e-10, "criterion 4: drive-strength invariance of tau(t)",
         fmt("max rel tau difference %.2e between Omega0 and 10 Omega0, %.1f s", worst,
             seconds_since(t0)));
}

// ---------------------------------------------------------------------- 5
void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = EnsembleConfig::make(25, 0.005, 0.0, 0.5, 3, 1);
  const AtomSet atoms = sample_atoms(cfg, 0);
  Pulse pulse;
  pulse.rabi_amplitude = 0.01;
  pulse.duration = 5.0;

  auto run = [&](double dt, int rebuild) {
    IntegrationPlan plan;
    plan.dt = dt;
    plan.t_end = 10.0;
    plan.sample_stride = static_cast<int>(std::lround(0.1 / dt)); // common 0.1 grid
    plan.kernel_rebuild_interval = rebuild;
    std::vector<double> p;
    integrate(atoms, pulse, plan,
              [&p](double, const Eigen::VectorXcd& beta, const CouplingMatrix&, bool) {
                p.push_back(beta.squaredNorm());
              });
    return p;
  };

  // the kernel freeze makes the scheme first order in the rebuild window,
  // so the 1e-4 bar requires a window below ~1e-3; dt = 2e-4 with a base
  // cadence of 4 steps gives a window of 8e-4 and real halvings of both knobs
  const double base_dt = 2e-4;
  const int base_rebuild = 4;
  const auto ref = run(base_dt, base_rebuild);
  const auto half_step = run(base_dt / 2, 2 * base_rebuild); // same rebuild cadence in time
  const auto half_rebuild = run(base_dt, base_rebuild / 2);

  double worst_step = 0.0, worst_rebuild = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    if (ref[k] <= 0.0) continue;
    worst_step = std::max(worst_step, std::abs(half_step[k] - ref[k]) / ref[k]);
    worst_rebuild = std::max(worst_rebuild, std::abs(half_rebuild[k] - ref[k]) / ref[k]);
  }
  report(worst_step < 1e-4 && worst_rebuild < 1e-4, "criterion 5: convergence",
         fmt("step-halving %.2e, rebuild-halving %.2e (rel P_ex, rebuild interval %d), %.1f s",
             worst_step, worst_rebuild, base_rebuild, seconds_since(t0)));
}

// ---------------------------------------------------------------------- 6
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc;
  sc.ensemble = EnsembleConfig::make(625, 0.005, 0.0, 0.0, 1, 8);
  sc.pulse.duration = 50.0;
  sc.plan.dt = 0.01;
  sc.plan.t_end = 90.0;
  sc.plan.sample_stride = 10;
  sc.observables.forward = false;
  sc.observables.rate_smoothing = 9;

  const auto res = run_ensemble(sc);
  const auto fit = fit_plateau(res.series.times, res.series.tau_inst, 0.01, 5);
  const auto [b0, bv] = optical_thickness(0.005, sc.ensemble.box_edge, 0.0);
  const double tau_eq7 = diffusion_time(b0, 3.0);
  if (!fit) {
    report(false, "criterion 6: trapping plateau",
           fmt("no flat tau(t) window found (Eq. 7 reference %.3f), %.0f s", tau_eq7,
               seconds_since(t0)));
    return;
  }
  const double rel = std::abs(fit->tau_d - tau_eq7) / tau_eq7;
  report(rel <= 0.30, "criterion 6: trapping plateau",
         fmt("tau_d = %.3f on [%.1f, %.1f], Eq. 7 gives %.3f (b0 = %.3f), deviation %.0f%%, %.0f s",
             fit->tau_d, fit->t_lo, fit->t_hi, tau_eq7, b0, 100.0 * rel, seconds_since(t0)));
}

// ---------------------------------------------------------------------- 7
void criterion_7_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> v0s = {0.0, 0.25, 0.5, 1.0};

  std::vector<double> rate_total, rate_forward, rate_eq6, fwhm;
  bool fwd_gamma_negative = false, fwd_gamma_nonmonotonic = false;

  for (const double v0 : v0s) {
    Scenario sc;
    sc.ensemble = EnsembleConfig::make(216, 0.005, 0.0, v0, 11, 4);
    sc.pulse.duration = 50.0;
    sc.plan.dt = 0.01;
    sc.plan.t_end = 85.0;
    sc.plan.sample_stride = 10;
    sc.observables.spectrum = true; // window [5, 35] after pulse end
    const auto res = run_ensemble(sc);

    rate_total.push_back(average_rate(res.dense_times, res.dense_i_total, 0.0, 0.01));
    rate_forward.push_back(average_rate(res.dense_times, res.dense_i_forward, 0.0, 0.01));
    const auto [b0, bv] = optical_thickness(0.005, sc.ensemble.box_edge, v0);
    rate_eq6.push_back(slab_initial_rate(b0, bv));

    Spectrum avg;
    avg.omega = res.spectrum_omega;
    avg.density = res.spectrum_avg;
    fwhm.push_back(spectrum_fwhm(avg));

    if (v0 == 1.0) {
      // 7a: forward-lobe instantaneous rate at k0 v0 = gamma
      std::vector<double> g, tau;
      instantaneous_rate(res.series.times, res.series.i_forward, g, tau, 3);
      bool saw_rise = false, saw_fall = false;
      double prev = std::nan("");
      for (const double gv : g) {
        if (std::isnan(gv)) continue;
        if (gv < 0.0) fwd_gamma_negative = true;
        if (!std::isnan(prev)) {
          saw_rise |= gv > prev + 1e-9;
          saw_fall |= gv < prev - 1e-9;
        }
        prev = gv;
      }
      fwd_gamma_nonmonotonic = saw_rise && saw_fall;
    }
    std::printf("  .. v0 = %.2f done (%.0f s elapsed)\n", v0, seconds_since(t0));
    std::fflush(stdout);
  }

  report(fwd_gamma_nonmonotonic && fwd_gamma_negative,
         "criterion 7a: forward rate non-monotonic and negative at k0 v0 = gamma",
         fmt("negative windows %s", fwd_gamma_negative ? "present" : "absent"));

  auto increasing = [](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
      if (v[k] <= v[k - 1]) return false;
    return true;
  };
  report(increasing(rate_total) && increasing(rate_forward) && increasing(rate_eq6),
         "criterion 7b: windowed initial rate grows with v0",
         fmt("total {%.3f %.3f %.3f %.3f}, forward {%.3f %.3f %.3f %.3f}, Eq. 6 {%.3f %.3f %.3f %.3f}",
             rate_total[0], rate_total[1], rate_total[2], rate_total[3], rate_forward[0],
             rate_forward[1], rate_forward[2], rate_forward[3], rate_eq6[0], rate_eq6[1],
             rate_eq6[2], rate_eq6[3]));

  report(increasing(fwhm), "criterion 7d: spectral width grows with v0",
         fmt("FWHM {%.3f %.3f %.3f %.3f}", fwhm[0], fwhm[1], fwhm[2], fwhm[3]));
}

// 7c: trapping time decays faster with v0 than the rescaled diffusion model
void criterion_7_trap() {
  const auto t0 = std::chrono::steady_clock::now();
  // heating shortens and tilts the trapping stage, so the plateau fit is
  // graded: the strict criterion-6 flatness first, then looser drifts
  auto tau_at = [&](double v0, double& flat_used) {
    Scenario sc;
    sc.ensemble = EnsembleConfig::make(1080, 0.005, 0.0, v0, 21, 4);
    sc.pulse.duration = 25.0;
    sc.plan.dt = 0.02;
    sc.plan.t_end = 55.0;
    sc.plan.sample_stride = 5;
    sc.observables.forward = false;
    sc.observables.rate_smoothing = 9;
    const auto res = run_ensemble(sc);
    for (const double flatness : {0.01, 0.02, 0.04}) {
      if (const auto fit = fit_plateau(res.series.times, res.series.tau_inst, flatness, 5)) {
        flat_used = flatness;
        return fit->tau_d;
      }
    }
    flat_used = std::nan("");
    return -1.0;
  };
  double flat0 = 0.0, flat_v = 0.0;
  const double tau0 = tau_at(0.0, flat0);
  std::printf("  .. k0L = 60 static plateau done (%.0f s elapsed)\n", seconds_since(t0));
  std::fflush(stdout);
  const double tau_v = tau_at(0.5, flat_v);
  const auto [b0, bv] = optical_thickness(0.005, std::cbrt(1080.0 / 0.005), 0.5);
  const double tau_model = tau0 * (bv / b0) * (bv / b0); // Eq. 7 rescaled to the static run
  report(tau0 > 0.0 && tau_v > 0.0 && tau_v < tau_model,
         "criterion 7c: simulated trapping decays faster than the rescaled model",
         fmt("tau(0) = %.3f (drift %.2f), tau(0.5) = %.3f (drift %.2f), rescaled model %.3f, %.0f s",
             tau0, flat0, tau_v, flat_v, tau_model, seconds_since(t0)));
}

void criterion_7_dimers() {
  const auto t0 = std::chrono::steady_clock::now();
  // 7e: fly-by scenarios of the close pair
  IntegrationPlan fplan;
  fplan.dt = 2e-4; // resolves |V| ~ 1.5 / r_m^3 near closest approach
  fplan.t_end = 35.0;
  fplan.sample_stride = 250;
  FlybyScenario fsc;
  fsc.r0 = 3.5;
  fsc.r_m = 0.1;
  fsc.v_rel = 0.2;

  fsc.initial_class = -2;
  const auto shortlived = flyby(fsc, fplan);
  std::size_t k_close = 0;
  for (std::size_t k = 0; k < shortlived.size(); ++k)
    if (shortlived[k].k0r < shortlived[k_close].k0r) k_close = k;
  // dip: a local intensity minimum near closest approach, followed by recovery
  double i_min = 1e300, i_after = 0.0;
  const double t_close = shortlived[k_close].t;
  for (const auto& s : shortlived) {
    if (std::abs(s.t - t_close) < 3.0) i_min = std::min(i_min, s.i_total);
    if (s.t > t_close && s.t < t_close + 5.0) i_after = std::max(i_after, s.i_total);
  }
  const bool dip = i_after > 1.05 * i_min;

  fsc.initial_class = -1;
  const auto longlived = flyby(fsc, fplan);
  bool below_reference = false;
  for (const auto& s : longlived)
    if (s.t > 0.0 && s.t <= t_close && s.p_ex < std::exp(-s.t) * 0.999) below_reference = true;

  report(dip && below_reference, "criterion 7e: fly-by dip and reference crossing",
         fmt("closest approach t = %.1f, dip recovery %.2fx, long-lived falls below e^{-t}: %s",
             t_close, i_after / i_min, below_reference ? "yes" : "no"));

  // 7f: fixed/moving geometry, all four initial classes end long-lived-dominant
  FlybyScenario gsc;
  gsc.r0 = std::sqrt(10.0);
  gsc.r_m = 1.0;
  gsc.v_rel = 0.05;
  IntegrationPlan gplan;
  gplan.dt = 0.01;
  gplan.t_end = 120.0; // z runs from -3 to +3
  gplan.sample_stride = 100;

  bool all_longest = true;
  std::string finals;
  for (int cls = 0; cls < 4; ++cls) {
    gsc.initial_class = cls;
    const auto run = flyby(gsc, gplan);
    const auto& last = run.back();
    const auto modes = dimer_modes(last.k0r);
    int longest = 0, dominant = 0;
    for (int k = 1; k < 4; ++k) {
      if (modes[k].gamma_c < modes[longest].gamma_c) longest = k;
      if (last.populations[k] > last.populations[dominant]) dominant = k;
    }
    finals += fmt("%d->%d(%.2f) ", cls + 1, dominant + 1, last.populations[dominant]);
    if (dominant != longest) all_longest = false;
  }
  report(all_longest, "criterion 7f: post-pass dominance of the longest-lived class",
         fmt("final dominant classes: %s(%.0f s total)", finals.c_str(), seconds_since(t0)));
}

// ---------------------------------------------------------------------- 8
void criterion_8() {
  const double e1 = std::abs(slab_initial_rate(2.0, 2.0) - 1.0 / (1.0 - std::exp(-1.0)));
  const double e2 = std::abs(diffusion_time(10.0, 3.0) - 100.0 / (kPi * kPi));
  report(e1 < 1e-12 && e2 < 1e-12, "criterion 8: theory arithmetic",
         fmt("slab rate error %.1e, diffusion time error %.1e", e1, e2));
}

// ---------------------------------------------------------------------- 9
void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc;
  sc.ensemble = EnsembleConfig::make(20, 0.0, 10.0, 0.3, 5, 8);
  sc.pulse.duration = 3.0;
  sc.plan.dt = 0.01;
  sc.plan.t_end = 8.0;
  sc.observables.spectrum = true;
  sc.observables.spectrum_window_center = 2.5;
  sc.observables.spectrum_window_width = 4.0;

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string intensity_ref, spectrum_ref;
  bool identical = true;
  for (const int workers : {1, 4, 8}) {
    const fs::path dir = fs::temp_directory_path() / ("colddipole_acc9_w" + std::to_string(workers));
    fs::remove_all(dir);
    sc.workers = workers;
    run_ensemble_to_files(sc, dir);
    const std::string i = slurp(dir / "intensity.csv"), s = slurp(dir / "spectrum.csv");
    if (intensity_ref.empty()) {
      intensity_ref = i;
      spectrum_ref = s;
    } else if (i != intensity_ref || s != spectrum_ref) {
      identical = false;
    }
  }
  report(identical, "criterion 9: worker-count determinism",
         fmt("intensity.csv and spectrum.csv identical for workers {1, 4, 8}, %.1f s",
             seconds_since(t0)));
}

} // namespace

int main(int argc, char** argv) {
  const std::string group = argc > 1 ? argv[1] : "all";
  const bool fast = group == "fast" || group == "all";
  const bool trapping = group == "trapping" || group == "all";
  const bool motion = group == "motion" || group == "all";
  // sub-groups of the motion batch, mainly for iterating on one criterion
  const bool m_sweep = motion || group == "motion-sweep";
  const bool m_trap = motion || group == "motion-trap";
  const bool m_dimers = motion || group == "motion-dimers";
  if (!fast && !trapping && !m_sweep && !m_trap && !m_dimers) {
    std::fprintf(stderr, "usage: acceptance [fast|trapping|motion|all]\n");
    return 2;
  }

  if (fast) {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_8();
    criterion_9();
  }
  if (trapping) criterion_6();
  if (m_sweep) criterion_7_sweep();
  if (m_trap) criterion_7_trap();
  if (m_dimers) criterion_7_dimers();

  std::printf("%d criterion check(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
