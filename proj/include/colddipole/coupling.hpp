#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddipole/core.hpp"

namespace colddipole {

inline constexpr double kExclusionRadius = 1e-3; // k0 r_min

/// Dimensionless dipole-dipole kernel V (3N x 3N). Diagonal 3x3 blocks are
/// zero; self-action is the -gamma/2 term of the amplitude equation.
struct CouplingMatrix {
  Eigen::MatrixXcd v;
  double time_tag = 0.0;
};

struct DriveVector {
  Eigen::VectorXcd omega;
  bool pulse_active = false;
};

struct DegeneratePairError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 3x3 coupling block for one ordered atom pair separated by r_vec (rows:
/// sublevel m of the excited atom, columns: m' of the partner). Normalized
/// so that two-atom eigenvalues reproduce the stationary-dimer closed forms:
///   V_mm' = -3/2 e^{ix}/x^3 [ (1 - ix - x^2) delta_mm'
///                             - (3 - 3ix - x^2) (e_m . rhat)^* (e_m' . rhat) ]
/// with x = k0 r; the row (receiving) dipole enters conjugated, which is the
/// arrangement consistent with the far-field detection amplitude u* . e_m
/// (energy balance vs angular quadrature pins the choice; a transposed
/// kernel has the same spectrum but violates energy conservation).
inline Eigen::Matrix3cd pair_block(const Vec3& r_vec) {
  const double x = r_vec.norm();
  if (x <= 0.0) throw DegeneratePairError("pair_block: zero separation");
  const Vec3 rhat = r_vec / x;
  const Complex i(0, 1);
  const Complex phase = std::exp(i * x) / (x * x * x);
  const Complex a = -1.5 * phase * (1.0 - i * x - x * x);
  const Complex b = +1.5 * phase * (3.0 - 3.0 * i * x - x * x);

  Complex c[3]; // c_m = e_m . rhat
  for (int m = -1; m <= 1; ++m) c[m + 1] = spherical_basis(m).transpose() * rhat;

  Eigen::Matrix3cd block;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      block(row, col) = (row == col ? a : Complex(0)) + b * std::conj(c[row]) * c[col];
  return block;
}

/// Assemble the full kernel from a position snapshot. O(N^2).
/// Throws DegeneratePairError when a pair is closer than the exclusion
/// radius (the kernel diverges as (k0 r)^-3).
inline CouplingMatrix assemble(const std::vector<Vec3>& positions, double time_tag = 0.0) {
  const int n = static_cast<int>(positions.size());
  CouplingMatrix cm;
  cm.time_tag = time_tag;
  cm.v = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec3 r = positions[i] - positions[j];
      if (r.norm() < kExclusionRadius)
        throw DegeneratePairError("assemble: atoms " + std::to_string(i) + " and " +
                                  std::to_string(j) + " closer than exclusion radius");
      cm.v.block<3, 3>(3 * i, 3 * j) = pair_block(r);
      cm.v.block<3, 3>(3 * j, 3 * i) = pair_block(-r);
    }
  }
  return cm;
}

/// Minimum pairwise distance of a snapshot (used to flag close-pair events
/// during integration without aborting).
inline double min_pair_distance(const std::vector<Vec3>& positions) {
  double dmin = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dmin = std::min(dmin, (positions[i] - positions[j]).norm());
  return dmin;
}

/// Rabi drive Omega_e = Omega_0 (e_m . u_L)^* e^{i k_L . r_i} while the
/// rectangular pulse is on, zero afterwards.
inline DriveVector drive_vector(const std::vector<Vec3>& positions, const Pulse& pulse,
                                double t) {
  const int n = static_cast<int>(positions.size());
  DriveVector d;
  d.pulse_active = pulse.active_at(t);
  d.omega = Eigen::VectorXcd::Zero(3 * n);
  if (!d.pulse_active) return d;

  const CVec3 u = polarization_vector(pulse.polarization);
  Complex coupling[3]; // conj(e_m) . u_L
  for (int m = -1; m <= 1; ++m) coupling[m + 1] = spherical_basis(m).adjoint() * u;

  const Complex i(0, 1);
  for (int atom = 0; atom < n; ++atom) {
    const Complex phase = std::exp(i * pulse.propagation_direction.dot(positions[atom]));
    for (int s = 0; s < 3; ++s)
      d.omega[3 * atom + s] = pulse.rabi_amplitude * coupling[s] * phase;
  }
  return d;
}

} // namespace colddipole
