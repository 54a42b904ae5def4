#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "colddipole/coupling.hpp"
#include "colddipole/core.hpp"
#include "colddipole/dynamics.hpp"

namespace colddipole {

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

/// Sampled time series of the scalar fluorescence observables.
struct ObservableSeries {
  std::vector<double> times;      // relative to pulse end
  std::vector<double> p_ex;       // total excited population
  std::vector<double> i_total;    // -dP_ex/dt
  std::vector<double> i_forward;  // forward-lobe intensity
  std::vector<double> gamma_inst; // -d ln I_total / dt
  std::vector<double> tau_inst;   // 1 / gamma_inst
};

struct Spectrum {
  std::vector<double> omega;    // relative to atomic resonance, gamma
  std::vector<double> density;  // |STFT|^2, >= 0
  double window_center = 0.0;
  double window_width = 0.0;
};

/// Far-field amplitude k0^2 sum_e (u* . e_m) beta_e e^{-i k . r_i} for one
/// detection direction and polarization.
inline Complex far_field_amplitude(const Eigen::VectorXcd& beta, const std::vector<Vec3>& positions,
                                   const Vec3& direction, const CVec3& polarization) {
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("far_field_amplitude: direction must be unit");
  Complex coupling[3]; // u* . e_m
  for (int m = -1; m <= 1; ++m)
    coupling[m + 1] = polarization.adjoint() * spherical_basis(m);

  const Complex i(0, 1);
  Complex acc(0, 0);
  const int n = static_cast<int>(positions.size());
  for (int atom = 0; atom < n; ++atom) {
    const Complex phase = std::exp(-i * direction.dot(positions[atom]));
    Complex s(0, 0);
    for (int k = 0; k < 3; ++k) s += coupling[k] * beta[3 * atom + k];
    acc += s * phase;
  }
  return acc; // k0^2 = 1
}

/// Intensity unit: 3/(8 pi) * |amplitude|^2 summed over an orthonormal
/// transverse polarization pair, so that the solid-angle integral equals
/// -dP_ex/dt (a single resonant atom radiates gamma * P_ex in total).
inline constexpr double kIntensityUnit = 3.0 / (8.0 * kPi);

/// Orthonormal pair of vectors transverse to n.
inline std::pair<Vec3, Vec3> transverse_pair(const Vec3& n) {
  Vec3 a = std::abs(n.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  Vec3 e1 = n.cross(a).normalized();
  Vec3 e2 = n.cross(e1);
  return {e1, e2};
}

/// Polarization-summed intensity in a unit solid angle around `direction`.
inline double directional_intensity(const Eigen::VectorXcd& beta, const std::vector<Vec3>& positions,
                                    const Vec3& direction) {
  const auto [e1, e2] = transverse_pair(direction);
  const Complex a1 = far_field_amplitude(beta, positions, direction, e1.cast<Complex>());
  const Complex a2 = far_field_amplitude(beta, positions, direction, e2.cast<Complex>());
  return kIntensityUnit * (std::norm(a1) + std::norm(a2));
}

inline double total_excited_population(const Eigen::VectorXcd& beta) { return beta.squaredNorm(); }

/// Total radiated intensity from energy conservation, -dP_ex/dt evaluated
/// analytically as -2 Re sum_e beta_e* rhs_e. Only valid after the drive is
/// off (otherwise the bookkeeping would include absorption).
inline double total_intensity(const AmplitudeState& state, const CouplingMatrix& V,
                              const DriveVector& drive) {
  if (drive.pulse_active)
    throw std::logic_error("total_intensity: drive must be off");
  const Eigen::VectorXcd d = rhs(state, V, drive, 0.0);
  // detuning enters rhs as i*delta*beta, which drops out of 2 Re(beta* rhs);
  // pass 0 so the result is detuning-independent by construction
  return -2.0 * state.beta.dot(d).real();
}

/// Instantaneous decay rate Gamma(t) = -d ln I / dt by centered differences,
/// and tau = 1/Gamma. Nonpositive intensities mask the affected samples with
/// NaN. An optional boxcar of odd width `smooth` pre-smooths ln I.
inline void instantaneous_rate(const std::vector<double>& times, const std::vector<double>& intensity,
                               std::vector<double>& gamma_out, std::vector<double>& tau_out,
                               int smooth = 0) {
  const std::size_t n = times.size();
  if (intensity.size() != n) throw std::invalid_argument("instantaneous_rate: size mismatch");
  std::vector<double> lni(n, nan_value());
  for (std::size_t k = 0; k < n; ++k)
    if (intensity[k] > 0.0) lni[k] = std::log(intensity[k]);
  if (smooth > 1) {
    const int half = smooth / 2;
    std::vector<double> sm(n, nan_value());
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      int cnt = 0;
      for (int j = -half; j <= half; ++j) {
        const long idx = static_cast<long>(k) + j;
        if (idx < 0 || idx >= static_cast<long>(n) || std::isnan(lni[idx])) continue;
        acc += lni[idx];
        ++cnt;
      }
      if (cnt > 0) sm[k] = acc / cnt;
    }
    lni.swap(sm);
  }
  gamma_out.assign(n, nan_value());
  tau_out.assign(n, nan_value());
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (std::isnan(lni[k - 1]) || std::isnan(lni[k + 1])) continue;
    const double g = -(lni[k + 1] - lni[k - 1]) / (times[k + 1] - times[k - 1]);
    gamma_out[k] = g;
    tau_out[k] = g != 0.0 ? 1.0 / g : nan_value();
  }
}

/// Windowed average rate ln(I(t1)/I(t2)) / (t2 - t1) with linear
/// interpolation of I at the endpoints.
inline double average_rate(const std::vector<double>& times, const std::vector<double>& intensity,
                           double t1, double t2) {
  if (t2 <= t1) throw std::invalid_argument("average_rate: t2 > t1 required");
  auto interp = [&](double t) {
    if (t < times.front() || t > times.back())
      throw std::invalid_argument("average_rate: window outside series");
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    const std::size_t k = std::min<std::size_t>(std::max<long>(1, it - times.begin()), times.size() - 1);
    const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return (1.0 - w) * intensity[k - 1] + w * intensity[k];
  };
  const double i1 = interp(t1), i2 = interp(t2);
  if (i1 <= 0.0 || i2 <= 0.0) throw std::invalid_argument("average_rate: nonpositive intensity");
  return std::log(i1 / i2) / (t2 - t1);
}

/// Rectangular-window discrete Fourier transform of a complex analytic
/// amplitude series (the carrier is already removed by the rotating frame).
/// Grid spacing is 2 pi / window_width; density = |S(omega)|^2 with
/// S = dt * sum_j a_j e^{i omega t_j}.
inline Spectrum stft_spectrum(const std::vector<double>& times, const std::vector<Complex>& amplitude,
                              double window_center, double window_width) {
  if (times.size() != amplitude.size())
    throw std::invalid_argument("stft_spectrum: size mismatch");
  const double t_lo = window_center - 0.5 * window_width;
  const double t_hi = window_center + 0.5 * window_width;
  const double eps = 1e-9 * std::max(1.0, window_width);
  if (times.empty() || t_lo < times.front() - eps || t_hi > times.back() + eps)
    throw std::invalid_argument("stft_spectrum: window exceeds sampled range");

  std::vector<double> wt;
  std::vector<Complex> wa;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= t_lo - eps && times[k] < t_hi - eps) {
      wt.push_back(times[k]);
      wa.push_back(amplitude[k]);
    }
  const int nw = static_cast<int>(wt.size());
  if (nw < 2) throw std::invalid_argument("stft_spectrum: window too narrow");
  const double h = wt[1] - wt[0];

  Spectrum sp;
  sp.window_center = window_center;
  sp.window_width = window_width;
  const double domega = 2.0 * kPi / window_width;
  const Complex i(0, 1);
  for (int k = -nw / 2; k < (nw + 1) / 2; ++k) {
    const double omega = k * domega;
    Complex s(0, 0);
    for (int j = 0; j < nw; ++j) s += wa[j] * std::exp(i * omega * (wt[j] - wt[0]));
    sp.omega.push_back(omega);
    sp.density.push_back(std::norm(s * h));
  }
  return sp;
}

/// Detection directions for direction-averaged spectra: the 26-point cube
/// pattern (vertices, edge midpoints, face centers) minus the exact forward
/// direction +z.
inline std::vector<Vec3> spectrum_directions() {
  std::vector<Vec3> dirs;
  for (int ix = -1; ix <= 1; ++ix)
    for (int iy = -1; iy <= 1; ++iy)
      for (int iz = -1; iz <= 1; ++iz) {
        if (ix == 0 && iy == 0 && iz == 0) continue;
        if (ix == 0 && iy == 0 && iz == 1) continue; // exact forward excluded
        dirs.push_back(Vec3(ix, iy, iz).normalized());
      }
  return dirs;
}

/// FWHM of a sampled spectral line (linear interpolation at half maximum).
inline double spectrum_fwhm(const Spectrum& sp) {
  const auto it = std::max_element(sp.density.begin(), sp.density.end());
  const double peak = *it;
  const long kp = it - sp.density.begin();
  const double half = 0.5 * peak;
  double lo = sp.omega.front(), hi = sp.omega.back();
  for (long k = kp; k > 0; --k)
    if (sp.density[k - 1] < half) {
      const double w = (half - sp.density[k - 1]) / (sp.density[k] - sp.density[k - 1]);
      lo = sp.omega[k - 1] + w * (sp.omega[k] - sp.omega[k - 1]);
      break;
    }
  for (std::size_t k = kp; k + 1 < sp.density.size(); ++k)
    if (sp.density[k + 1] < half) {
      const double w = (sp.density[k] - half) / (sp.density[k] - sp.density[k + 1]);
      hi = sp.omega[k] + w * (sp.omega[k + 1] - sp.omega[k]);
      break;
    }
  return hi - lo;
}

} // namespace colddipole
