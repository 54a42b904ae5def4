#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "colddipole/core.hpp"

namespace colddipole {

/// Resonant scattering cross-section for the J=0 -> J=1 transition,
/// sigma_0 = 6 pi / k0^2 (k0 = 1).
inline constexpr double kResonantCrossSection = 6.0 * kPi;

struct TheoryInputs {
  double b0;    // resonant optical thickness at v0 -> 0
  double b_v;   // Doppler-reduced optical thickness at dispersion v0
  double alpha = 3.0; // cloud shape parameter; cube: 3
  double tau0 = 1.0;  // natural lifetime (= 1 in our units)
};

namespace detail {

// adaptive Simpson on [a, b]
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-12) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace detail

/// Gaussian-velocity average of the resonant Lorentzian,
/// integral of f(v) / (1 + (2 k0 v / gamma)^2) dv over one axis.
inline double doppler_reduction_factor(double v0) {
  if (v0 <= 0.0) return 1.0;
  const auto integrand = [v0](double v) {
    const double g = std::exp(-0.5 * v * v / (v0 * v0)) / std::sqrt(2.0 * kPi * v0 * v0);
    return g / (1.0 + 4.0 * v * v);
  };
  return detail::integrate_adaptive(integrand, -10.0 * v0, 10.0 * v0);
}

/// (b0, b_v): resonant optical thickness n sigma_0 L and its Doppler-reduced
/// value at velocity dispersion v0.
inline std::pair<double, double> optical_thickness(double density, double box_edge, double v0) {
  if (density <= 0.0 || box_edge <= 0.0)
    throw std::invalid_argument("optical_thickness: density, L > 0 required");
  if (v0 < 0.0) throw std::invalid_argument("optical_thickness: v0 >= 0 required");
  const double b0 = density * kResonantCrossSection * box_edge;
  return {b0, b0 * doppler_reduction_factor(v0)};
}

/// Flat-slab initial superradiant rate for resonant excitation:
/// Gamma(0+) = b0 gamma / (2 (1 - e^{-b_v/2})).
inline double slab_initial_rate(double b0, double b_v) {
  if (b_v <= 0.0) throw std::invalid_argument("slab_initial_rate: b_v > 0 required");
  return b0 / (2.0 * (1.0 - std::exp(-0.5 * b_v)));
}

/// Diffusion trapping time tau_d = 3 b0^2 / (alpha pi^2) * tau0.
inline double diffusion_time(double b0, double alpha, double tau0 = 1.0) {
  if (b0 <= 0.0 || alpha <= 0.0) throw std::invalid_argument("diffusion_time: b0, alpha > 0");
  return 3.0 * b0 * b0 / (alpha * kPi * kPi) * tau0;
}

struct PlateauFit {
  double tau_d;
  double t_lo;
  double t_hi;
};

/// Longest window of a tau(t) series where |d ln tau / dt| stays below the
/// flatness threshold; returns the mean tau there, or nullopt when no
/// window of at least min_samples passes.
inline std::optional<PlateauFit> fit_plateau(const std::vector<double>& times,
                                             const std::vector<double>& tau,
                                             double flatness_threshold = 0.01,
                                             int min_samples = 5) {
  const std::size_t n = times.size();
  if (tau.size() != n) throw std::invalid_argument("fit_plateau: size mismatch");
  std::vector<bool> flat(n, false);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!(tau[k - 1] > 0.0 && tau[k] > 0.0 && tau[k + 1] > 0.0)) continue;
    const double d = (std::log(tau[k + 1]) - std::log(tau[k - 1])) / (times[k + 1] - times[k - 1]);
    flat[k] = std::abs(d) < flatness_threshold;
  }
  std::size_t best_lo = 0, best_len = 0;
  std::size_t k = 0;
  while (k < n) {
    if (!flat[k]) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j < n && flat[j]) ++j;
    if (j - k > best_len) {
      best_len = j - k;
      best_lo = k;
    }
    k = j;
  }
  if (best_len < static_cast<std::size_t>(min_samples)) return std::nullopt;
  double acc = 0.0;
  for (std::size_t i = best_lo; i < best_lo + best_len; ++i) acc += tau[i];
  return PlateauFit{acc / best_len, times[best_lo], times[best_lo + best_len - 1]};
}

} // namespace colddipole
