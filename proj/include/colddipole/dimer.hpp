#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddipole/coupling.hpp"
#include "colddipole/core.hpp"
#include "colddipole/dynamics.hpp"
#include "colddipole/observables.hpp"

namespace colddipole {

/// One of the four distinct single-excitation eigenmode classes of the
/// stationary dimer. Classes are keyed by (epsilon, p, |q|); the stored q
/// keeps the closed-form sign (q = -2 for the longitudinal class). The two
/// transverse classes are doubly degenerate.
struct DimerMode {
  int epsilon;   // +-1 (symmetric / antisymmetric atom exchange)
  int p;         // 0 (longitudinal) or 1 (transverse)
  int q;         // -2 (longitudinal) or 1 (transverse)
  double delta_c; // collective shift, gamma
  double gamma_c; // collective width, gamma
  bool degenerate_pair; // true for the transverse classes
  // Right eigenvectors in the lab (atom, m) basis for the given axis;
  // one column per degenerate partner.
  Eigen::MatrixXcd eigenvectors; // 6 x (1 or 2), orthonormal columns
};

/// Canonical class order used in output tables and population columns:
/// 1:(+1,1,1)  2:(-1,1,1)  3:(-1,0,-2)  4:(+1,0,-2).
inline constexpr std::array<std::array<int, 3>, 4> kDimerClassOrder{{
    {{+1, 1, 1}}, {{-1, 1, 1}}, {{-1, 0, -2}}, {{+1, 0, -2}}}};

/// Closed-form shift/width of one class at separation x = k0 r:
///   Delta_c/g = 3e/4 [ q (cos x / x^3 + sin x / x^2) - p cos x / x ]
///   Gamma_c/g = 1 - 3e/2 [ q (sin x / x^3 - cos x / x^2) - p sin x / x ]
inline std::pair<double, double> dimer_shift_width(double k0r, int epsilon, int p, int q) {
  if (k0r <= 0.0) throw std::domain_error("dimer_shift_width: k0r > 0 required");
  const double x = k0r, x2 = x * x, x3 = x2 * x;
  const double s = std::sin(x), c = std::cos(x);
  const double delta = 0.75 * epsilon * (q * (c / x3 + s / x2) - p * c / x);
  const double width = 1.0 - 1.5 * epsilon * (q * (s / x3 - c / x2) - p * s / x);
  return {delta, width};
}

namespace detail {

// beta components of the single-excitation state whose dipole polarization
// is w on both atoms, with exchange parity eps: beta_{a,m} = s_a (e_m^* . w),
// matching the row-conjugated kernel contraction. These diagonalize the
// pair kernel exactly: V maps the w-representation to (A I + B rr^T) w.
inline Eigen::VectorXcd dimer_vector(const CVec3& w, int eps) {
  Eigen::VectorXcd v(6);
  for (int m = -1; m <= 1; ++m) {
    const Complex amp = spherical_basis(m).adjoint() * w;
    v[m + 1] = amp;
    v[3 + m + 1] = static_cast<double>(eps) * amp;
  }
  return v / v.norm();
}

} // namespace detail

/// The four stationary-dimer eigenmode classes at separation k0r along
/// `axis` (interatomic axis, atom 0 -> atom 1 at +axis).
inline std::array<DimerMode, 4> dimer_modes(double k0r, const Vec3& axis = Vec3(0, 0, 1)) {
  if (k0r <= 0.0) throw std::domain_error("dimer_modes: k0r > 0 required");
  const Vec3 n = axis.normalized();
  const auto [t1, t2] = transverse_pair(n);
  // helicity pair about the interatomic axis
  const CVec3 wp = (t1.cast<Complex>() + Complex(0, 1) * t2.cast<Complex>()) / std::sqrt(2.0);
  const CVec3 wm = (t1.cast<Complex>() - Complex(0, 1) * t2.cast<Complex>()) / std::sqrt(2.0);

  std::array<DimerMode, 4> out;
  for (int k = 0; k < 4; ++k) {
    const auto [eps, p, q] = std::tuple(kDimerClassOrder[k][0], kDimerClassOrder[k][1],
                                        kDimerClassOrder[k][2]);
    const auto [delta, width] = dimer_shift_width(k0r, eps, p, q);
    DimerMode mode{eps, p, q, delta, width, p == 1, {}};
    if (p == 0) {
      mode.eigenvectors = detail::dimer_vector(n.cast<Complex>(), eps);
    } else {
      mode.eigenvectors.resize(6, 2);
      mode.eigenvectors.col(0) = detail::dimer_vector(wp, eps);
      mode.eigenvectors.col(1) = detail::dimer_vector(wm, eps);
    }
    out[k] = mode;
  }
  return out;
}

/// Straight-line relative fly-by: atom 0 fixed at the origin, atom 1 starts
/// at (r_m, 0, -sqrt(r0^2 - r_m^2)) and moves along +z with speed v_rel.
struct FlybyScenario {
  double r0 = 3.5;      // initial separation
  double r_m = 0.1;     // impact parameter / closest approach
  double v_rel = 0.2;   // relative speed
  int initial_class = -1; // index into kDimerClassOrder; -1 = longest-lived,
                          // -2 = shortest-lived at r0
  int initial_partner = 0; // degenerate partner column for transverse classes

  void validate() const {
    if (!(r_m > 0.0 && r_m <= r0)) throw std::invalid_argument("FlybyScenario: 0 < r_m <= r0");
    if (v_rel < 0.0) throw std::invalid_argument("FlybyScenario: v_rel >= 0");
  }

  AtomSet atoms() const {
    AtomSet a;
    a.box_edge = 0.0; // unbounded; no wall folding
    a.positions = {Vec3(0, 0, 0), Vec3(r_m, 0, -std::sqrt(r0 * r0 - r_m * r_m))};
    a.velocities = {Vec3(0, 0, 0), Vec3(0, 0, v_rel)};
    return a;
  }
};

struct FlybySample {
  double t;
  double k0r;       // current separation
  double p_ex;
  double i_total;
  std::array<double, 4> populations; // relative class populations, sum 1
  Eigen::VectorXcd beta;
};

/// Relative populations of the four mode classes from the instantaneous
/// 6-amplitude state: biorthogonal projection onto the closed-form class
/// eigenvectors at the current geometry, degenerate partners summed,
/// normalized to sum 1.
inline std::array<double, 4> mode_populations(const Eigen::VectorXcd& beta, const Vec3& separation) {
  if (beta.size() != 6) throw std::invalid_argument("mode_populations: need 6 amplitudes");
  if (beta.squaredNorm() <= 0.0)
    throw std::invalid_argument("mode_populations: zero state");
  const auto modes = dimer_modes(separation.norm(), separation);
  Eigen::MatrixXcd basis(6, 6);
  std::array<std::pair<int, int>, 4> cols; // (first column, count) per class
  int c = 0;
  for (int k = 0; k < 4; ++k) {
    const int w = static_cast<int>(modes[k].eigenvectors.cols());
    basis.block(0, c, 6, w) = modes[k].eigenvectors;
    cols[k] = {c, w};
    c += w;
  }
  // left eigenvectors are the rows of basis^{-1}
  const Eigen::VectorXcd coeff = basis.partialPivLu().solve(beta);
  std::array<double, 4> pops{};
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    double s = 0.0;
    for (int j = 0; j < cols[k].second; ++j) s += std::norm(coeff[cols[k].first + j]);
    pops[k] = s;
    total += s;
  }
  for (auto& p : pops) p /= total;
  return pops;
}

/// Integrate the free decay of a dimer along the fly-by trajectory,
/// starting in the selected eigenmode at the initial geometry.
inline std::vector<FlybySample> flyby(const FlybyScenario& scenario, const IntegrationPlan& plan) {
  scenario.validate();
  plan.validate();
  const AtomSet atoms = scenario.atoms();

  const Vec3 sep0 = atoms.positions[1] - atoms.positions[0];
  const auto modes0 = dimer_modes(sep0.norm(), sep0);
  int cls = scenario.initial_class;
  if (cls == -1 || cls == -2) {
    cls = 0;
    for (int k = 1; k < 4; ++k) {
      const bool better = scenario.initial_class == -1
                              ? modes0[k].gamma_c < modes0[cls].gamma_c
                              : modes0[k].gamma_c > modes0[cls].gamma_c;
      if (better) cls = k;
    }
  }
  if (cls < 0 || cls > 3) throw std::invalid_argument("flyby: bad initial class");
  const int partner = std::min<int>(scenario.initial_partner,
                                    static_cast<int>(modes0[cls].eigenvectors.cols()) - 1);
  const Eigen::VectorXcd beta0 = modes0[cls].eigenvectors.col(partner);

  // free decay: rebuild the 6x6 kernel every step, no drive
  Pulse no_drive;
  no_drive.rabi_amplitude = 0.0;
  no_drive.duration = 0.0;
  IntegrationPlan p = plan;
  p.kernel_rebuild_interval = 1;

  std::vector<FlybySample> samples;
  const int n_steps = static_cast<int>(std::lround(p.t_end / p.dt));
  Eigen::VectorXcd beta = beta0;
  const Complex i(0, 1);
  Eigen::VectorXcd k1(6), k2(6), k3(6), k4(6), tmp(6);

  auto kernel_at = [&](double t) {
    const auto pos = positions_at(atoms, t);
    return assemble(pos, t);
  };
  auto record = [&](double t, const CouplingMatrix& V) {
    const auto pos = positions_at(atoms, t);
    const Vec3 sep = pos[1] - pos[0];
    DriveVector zero;
    zero.omega = Eigen::VectorXcd::Zero(6);
    FlybySample s;
    s.t = t;
    s.k0r = sep.norm();
    s.p_ex = total_excited_population(beta);
    s.i_total = total_intensity({t, beta}, V, zero);
    s.populations = mode_populations(beta, sep);
    s.beta = beta;
    samples.push_back(std::move(s));
  };

  CouplingMatrix V = kernel_at(0.0);
  record(0.0, V);
  for (int step = 0; step < n_steps; ++step) {
    const double t = step * p.dt;
    if (step > 0) V = kernel_at(t);
    auto eval = [&](const Eigen::VectorXcd& b, Eigen::VectorXcd& out) {
      out = -0.5 * b;
      out.noalias() += (i * 0.5) * (V.v * b);
    };
    eval(beta, k1);
    tmp = beta + (0.5 * p.dt) * k1;
    eval(tmp, k2);
    tmp = beta + (0.5 * p.dt) * k2;
    eval(tmp, k3);
    tmp = beta + p.dt * k3;
    eval(tmp, k4);
    beta += (p.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!beta.allFinite()) throw DivergenceError("flyby: non-finite amplitudes", t + p.dt);
    if ((step + 1) % p.sample_stride == 0) {
      V = kernel_at(t + p.dt);
      record(t + p.dt, V);
    }
  }
  return samples;
}

} // namespace colddipole
