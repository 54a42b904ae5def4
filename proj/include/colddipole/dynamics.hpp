#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "colddipole/coupling.hpp"
#include "colddipole/core.hpp"

namespace colddipole {

struct AmplitudeState {
  double t = 0.0;
  Eigen::VectorXcd beta;
};

struct IntegrationPlan {
  double dt = 0.01;               // gamma dt
  double t_end = 100.0;           // absolute end time (pulse starts at t = 0)
  int sample_stride = 10;         // emit every sample_stride steps
  int kernel_rebuild_interval = 0; // steps between V rebuilds; 0 = auto

  void validate() const {
    if (dt <= 0) throw std::invalid_argument("IntegrationPlan: dt > 0 required");
    if (sample_stride < 1) throw std::invalid_argument("IntegrationPlan: sample_stride >= 1");
    if (kernel_rebuild_interval < 0)
      throw std::invalid_argument("IntegrationPlan: kernel_rebuild_interval >= 1 (or 0 for auto)");
  }
};

struct ClosePairEvent {
  double t;
  double distance;
};

/// Hard cap on the stability sub-steps per outer step; a kernel stiffer
/// than this allows is frozen through instead (close-pair event).
inline constexpr int kMaxSubsteps = 4096;

/// Sub-steps needed to keep the frozen kernel inside the RK4 stability
/// region: the dominant eigenvalue of a close pair grows as 3 / r^3, plus
/// a collective-shift allowance; the classical imaginary-axis bound is
/// |lambda| h / 2 < 2.83, kept with margin as |lambda| h <= 2.5.
inline long stability_substeps(double dt, double min_distance) {
  const double lambda = 3.0 / (min_distance * min_distance * min_distance) + 30.0;
  return std::lround(std::ceil(dt * lambda / 2.5));
}

struct DivergenceError : std::runtime_error {
  double t;
  DivergenceError(const std::string& what, double time) : std::runtime_error(what), t(time) {}
};

/// Rebuild interval from the accuracy rule k0 * v99 * dt * interval <= 1e-2,
/// where v99 is the 99th-percentile speed of the realization.
inline int auto_rebuild_interval(const AtomSet& atoms, double dt) {
  std::vector<double> speeds(atoms.velocities.size());
  for (std::size_t i = 0; i < speeds.size(); ++i) speeds[i] = atoms.velocities[i].norm();
  std::sort(speeds.begin(), speeds.end());
  if (speeds.empty()) return 1 << 20;
  const std::size_t idx =
      std::min(speeds.size() - 1, static_cast<std::size_t>(0.99 * speeds.size()));
  const double v99 = speeds[idx];
  if (v99 * dt <= 0.0) return 1 << 20; // immobile atoms: never rebuild
  return std::max(1, static_cast<int>(1e-2 / (v99 * dt)));
}

/// Right-hand side of the amplitude equation:
///   dbeta/dt = (i delta - 1/2) beta - i Omega/2 + (i/2) V beta.
inline Eigen::VectorXcd rhs(const AmplitudeState& state, const CouplingMatrix& V,
                            const DriveVector& drive, double detuning) {
  if (V.v.rows() != state.beta.size() || drive.omega.size() != state.beta.size())
    throw std::invalid_argument("rhs: dimension mismatch");
  const Complex i(0, 1);
  Eigen::VectorXcd out = (i * detuning - 0.5) * state.beta - (i * 0.5) * drive.omega;
  out.noalias() += (i * 0.5) * (V.v * state.beta);
  return out;
}

/// Per-sample observer: time, amplitudes, frozen kernel, drive-on flag.
using SampleSink =
    std::function<void(double t, const Eigen::VectorXcd& beta, const CouplingMatrix& V, bool drive_on)>;

/// Integrate the amplitude equations from beta(0) = 0 with a classical
/// fixed-step 4th-order method. The kernel is frozen over each rebuild
/// window while the drive phase follows the moving atoms every stage.
/// Close pairs make the frozen kernel stiff; each rebuild sizes equal
/// sub-steps from the closest pair so fly-bys stay inside the stability
/// region. Returns close-pair events flagged at rebuild times.
inline std::vector<ClosePairEvent> integrate(const AtomSet& atoms, const Pulse& pulse,
                                             const IntegrationPlan& plan, const SampleSink& sink,
                                             double t_start = 0.0) {
  plan.validate();
  pulse.validate();
  const int n3 = 3 * atoms.size();
  const int rebuild =
      plan.kernel_rebuild_interval > 0 ? plan.kernel_rebuild_interval : auto_rebuild_interval(atoms, plan.dt);
  const long n_steps = std::lround((plan.t_end - t_start) / plan.dt);

  std::vector<ClosePairEvent> events;
  Eigen::VectorXcd beta = Eigen::VectorXcd::Zero(n3);
  CouplingMatrix V;
  V.v = Eigen::MatrixXcd::Zero(n3, n3); // N = 1 stays zero

  const Complex i(0, 1);
  const Complex c0 = i * pulse.detuning - 0.5;
  Eigen::VectorXcd k1(n3), k2(n3), k3(n3), k4(n3), tmp(n3);

  // The drive flag is decided per step, not per stage: a step starting
  // inside [0, T) is fully driven (T is grid-aligned, so the rectangular
  // edge is integrated exactly), later steps are pure decay. The drive
  // phase still follows the moving atoms at each stage time.
  double step_rel = 0.0;
  auto eval = [&](double t, bool drive_on, const Eigen::VectorXcd& b, Eigen::VectorXcd& out) {
    out = c0 * b;
    out.noalias() += (i * 0.5) * (V.v * b);
    if (drive_on) {
      const DriveVector d = drive_vector(positions_at(atoms, t), pulse, step_rel);
      out.noalias() -= (i * 0.5) * d.omega;
    }
  };

  long substeps = 1;
  auto refresh_kernel = [&](double t) {
    if (atoms.size() < 2) return;
    const auto pos = positions_at(atoms, t);
    const double dmin = min_pair_distance(pos);
    if (dmin < kExclusionRadius) {
      if (t <= t_start) throw DegeneratePairError("integrate: degenerate pair at start");
      // moving pair crossed the exclusion radius: flag the event and keep
      // the previous kernel frozen until the pair separates again
      events.push_back({t, dmin});
      return;
    }
    const long need = stability_substeps(plan.dt, dmin);
    if (need > kMaxSubsteps && t > t_start) {
      // too stiff to integrate at this dt: freeze through the passage
      // with the previous (milder) kernel rather than blow up
      events.push_back({t, dmin});
      return;
    }
    V = assemble(pos, t);
    substeps = std::clamp(need, long{1}, long{kMaxSubsteps});
  };

  refresh_kernel(t_start);
  sink(t_start, beta, V, pulse.active_at(0.0) && pulse.duration > 0.0);

  const double h = plan.dt;
  for (long step = 0; step < n_steps; ++step) {
    const double t = t_start + step * h;
    if (step > 0 && step % rebuild == 0) refresh_kernel(t);

    step_rel = t - t_start;
    const bool driven = pulse.active_at(step_rel);
    const double hs = h / substeps;
    for (long s = 0; s < substeps; ++s) {
      const double ts = t + s * hs;
      eval(ts, driven, beta, k1);
      tmp = beta + (0.5 * hs) * k1;
      eval(ts + 0.5 * hs, driven, tmp, k2);
      tmp = beta + (0.5 * hs) * k2;
      eval(ts + 0.5 * hs, driven, tmp, k3);
      tmp = beta + hs * k3;
      eval(ts + hs, driven, tmp, k4);
      beta += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    if (!beta.allFinite())
      throw DivergenceError("integrate: non-finite amplitudes", t + h);

    if ((step + 1) % plan.sample_stride == 0)
      sink(t + h, beta, V, pulse.active_at(t + h - t_start));
  }
  return events;
}

/// Convenience wrapper collecting the sampled states.
inline std::vector<AmplitudeState> integrate_collect(const AtomSet& atoms, const Pulse& pulse,
                                                     const IntegrationPlan& plan,
                                                     double t_start = 0.0) {
  std::vector<AmplitudeState> out;
  integrate(
      atoms, pulse, plan,
      [&out](double t, const Eigen::VectorXcd& b, const CouplingMatrix&, bool) {
        out.push_back({t, b});
      },
      t_start);
  return out;
}

} // namespace colddipole
