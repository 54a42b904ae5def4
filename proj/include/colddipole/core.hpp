#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "colddipole/rng.hpp"

// Dimensionless units throughout: k0 = 1 (lengths in 1/k0), gamma = 1
// (times in 1/gamma, velocities in gamma/k0, frequencies in gamma).

namespace colddipole {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class Polarization { RightCircular, LeftCircular, LinearX, LinearY };

/// Spherical unit vectors e_0 = z, e_{+-1} = -+(x +- iy)/sqrt(2)
/// (Condon-Shortley). Orthonormal under the conjugate inner product.
inline CVec3 spherical_basis(int m) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (m) {
    case -1: return CVec3(Complex(s, 0), Complex(0, -s), 0);
    case 0: return CVec3(0, 0, 1);
    case +1: return CVec3(Complex(-s, 0), Complex(0, -s), 0);
    default: throw std::domain_error("spherical_basis: m must be -1, 0 or +1");
  }
}

inline CVec3 polarization_vector(Polarization p) {
  switch (p) {
    case Polarization::RightCircular: return spherical_basis(+1);
    case Polarization::LeftCircular: return spherical_basis(-1);
    case Polarization::LinearX: return CVec3(1, 0, 0);
    case Polarization::LinearY: return CVec3(0, 1, 0);
  }
  throw std::domain_error("polarization_vector: bad enum");
}

/// Flat excitation index e = 3*atom + (m+1) <-> (atom, Zeeman sublevel m).
struct BasisIndex {
  int atom;
  int sublevel; // m in {-1, 0, +1}

  int flat() const { return 3 * atom + (sublevel + 1); }
  static BasisIndex from_flat(int e) { return {e / 3, e % 3 - 1}; }
};

struct EnsembleConfig {
  int n_atoms = 1;
  double density = 0.005;  // atoms per k0^-3
  double box_edge = 0.0;   // L; derived from (N/density)^(1/3) if <= 0
  double v0 = 0.0;         // velocity dispersion, gamma/k0
  std::uint64_t seed = 1;
  int realizations = 1;

  static EnsembleConfig make(int n_atoms, double density, double box_edge,
                             double v0, std::uint64_t seed, int realizations) {
    EnsembleConfig c{n_atoms, density, box_edge, v0, seed, realizations};
    c.validate();
    return c;
  }

  void validate() {
    if (n_atoms < 1) throw std::invalid_argument("EnsembleConfig: N >= 1 required");
    if (realizations < 1) throw std::invalid_argument("EnsembleConfig: M >= 1 required");
    if (v0 < 0) throw std::invalid_argument("EnsembleConfig: v0 >= 0 required");
    if (box_edge <= 0.0 && density <= 0.0)
      throw std::invalid_argument("EnsembleConfig: need density or box_edge");
    if (box_edge <= 0.0) {
      box_edge = std::cbrt(static_cast<double>(n_atoms) / density);
    } else if (density <= 0.0) {
      density = static_cast<double>(n_atoms) / (box_edge * box_edge * box_edge);
    } else {
      const double d = static_cast<double>(n_atoms) / std::pow(box_edge, 3);
      if (std::abs(d - density) > 1e-12 * density)
        throw std::invalid_argument("EnsembleConfig: density != N / L^3");
    }
  }

  /// Doppler FWHM of the line, 2 sqrt(2 ln 2) k0 v0.
  double doppler_width() const { return 2.0 * std::sqrt(2.0 * std::log(2.0)) * v0; }
};

struct Pulse {
  double rabi_amplitude = 1e-2; // Omega_0, weak field
  double detuning = 0.0;        // delta
  double duration = 50.0;       // T; rectangular pulse on [0, T]
  Vec3 propagation_direction = Vec3(0, 0, 1);
  Polarization polarization = Polarization::RightCircular;

  void validate() const {
    if (duration < 0) throw std::invalid_argument("Pulse: duration >= 0 required");
    if (std::abs(propagation_direction.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("Pulse: |propagation_direction| must be 1");
  }

  // half-open window: the step starting at t = T integrates pure decay, so
  // the sample at the switch-off instant is the exact 0+ limit
  bool active_at(double t) const { return t >= 0.0 && t < duration; }
};

/// Snapshot of N atom positions/velocities at a reference time, inside
/// the cube [0, L]^3 with elastically reflecting walls.
struct AtomSet {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  double reference_time = 0.0;
  double box_edge = 0.0;

  int size() const { return static_cast<int>(positions.size()); }
};

namespace detail {

// Triangle-wave fold of y into [0, L]; sign reports the instantaneous
// velocity sign flip accumulated by the reflections.
inline double fold_coordinate(double y, double L, double& sign) {
  sign = 1.0;
  if (L <= 0.0) return y;
  double u = std::fmod(y, 2.0 * L);
  if (u < 0.0) u += 2.0 * L;
  if (u > L) {
    sign = -1.0;
    return 2.0 * L - u;
  }
  return u;
}

} // namespace detail

/// Positions at time t under uniform rectilinear motion with specular wall
/// reflection (exact closed-form folding, no event stepping).
inline std::vector<Vec3> positions_at(const AtomSet& atoms, double t) {
  const double dt = t - atoms.reference_time;
  std::vector<Vec3> out(atoms.positions.size());
  for (std::size_t i = 0; i < atoms.positions.size(); ++i) {
    double s;
    for (int a = 0; a < 3; ++a)
      out[i][a] = detail::fold_coordinate(
          atoms.positions[i][a] + atoms.velocities[i][a] * dt, atoms.box_edge, s);
  }
  return out;
}

/// Instantaneous velocities at time t (sign flipped by each reflection).
inline std::vector<Vec3> velocities_at(const AtomSet& atoms, double t) {
  const double dt = t - atoms.reference_time;
  std::vector<Vec3> out(atoms.positions.size());
  for (std::size_t i = 0; i < atoms.positions.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      double s;
      detail::fold_coordinate(
          atoms.positions[i][a] + atoms.velocities[i][a] * dt, atoms.box_edge, s);
      out[i][a] = s * atoms.velocities[i][a];
    }
  }
  return out;
}

/// Draw one random realization: positions i.i.d. uniform in [0,L]^3,
/// velocity components i.i.d. Gaussian with dispersion v0. Deterministic
/// in (config.seed, realization_index).
inline AtomSet sample_atoms(const EnsembleConfig& config, int realization_index) {
  Rng rng(config.seed, static_cast<std::uint64_t>(realization_index));
  AtomSet atoms;
  atoms.box_edge = config.box_edge;
  atoms.reference_time = 0.0;
  atoms.positions.resize(config.n_atoms);
  atoms.velocities.resize(config.n_atoms);
  for (int i = 0; i < config.n_atoms; ++i)
    for (int a = 0; a < 3; ++a) atoms.positions[i][a] = rng.uniform(0.0, config.box_edge);
  for (int i = 0; i < config.n_atoms; ++i)
    for (int a = 0; a < 3; ++a) atoms.velocities[i][a] = rng.gaussian(config.v0);
  return atoms;
}

} // namespace colddipole
