#include <catch_amalgamated.hpp>

#include <algorithm>
#include <complex>

#include <colddipole/coupling.hpp>
#include <colddipole/dimer.hpp>

using namespace colddipole;
using Catch::Approx;

namespace {

// Sorted eigenvalues of the free-decay evolution matrix (i/2) V - (1/2) I.
std::vector<Complex> evolution_eigenvalues(const Eigen::MatrixXcd& v) {
  const Eigen::MatrixXcd m =
      Complex(0, 0.5) * v - 0.5 * Eigen::MatrixXcd::Identity(v.rows(), v.cols());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  std::vector<Complex> eig(es.eigenvalues().data(), es.eigenvalues().data() + v.rows());
  std::sort(eig.begin(), eig.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return eig;
}

} // namespace

TEST_CASE("pair kernel reproduces the stationary-dimer closed forms") {
  // general (non-axial) orientation: the full 6x6 spectrum must match the
  // four closed-form classes, transverse ones twice
  const Vec3 axis = Vec3(0.3, -0.7, 0.55).normalized();
  for (const double x : {0.5, 1.0, 3.5, 10.0}) {
    const std::vector<Vec3> pos = {Vec3(0.2, -0.1, 0.4), Vec3(0.2, -0.1, 0.4) + x * axis};
    const auto eig = evolution_eigenvalues(assemble(pos).v);

    std::vector<Complex> predicted;
    for (const auto& [eps, p, q] : kDimerClassOrder) {
      const auto [delta, width] = dimer_shift_width(x, eps, p, q);
      // lambda = -Gamma_c/2 - i Delta_c
      const Complex lam(-0.5 * width, -delta);
      predicted.push_back(lam);
      if (p == 1) predicted.push_back(lam); // doubly degenerate
    }
    std::sort(predicted.begin(), predicted.end(), [](Complex a, Complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (int k = 0; k < 6; ++k) REQUIRE(std::abs(eig[k] - predicted[k]) < 1e-10);
  }
}

TEST_CASE("axial pair kernel is diagonal in the sublevel index") {
  const std::vector<Vec3> pos = {Vec3(0, 0, 0), Vec3(0, 0, 2.0)};
  const auto V = assemble(pos).v;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (r != c) {
        REQUIRE(std::abs(V(r, 3 + c)) < 1e-14);
        REQUIRE(std::abs(V(3 + r, c)) < 1e-14);
      }
}

TEST_CASE("kernel block structure: zero diagonal blocks, atom-exchange symmetry") {
  Rng rng(11, 0);
  std::vector<Vec3> pos;
  for (int i = 0; i < 5; ++i)
    pos.emplace_back(rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0, 6));
  const auto V = assemble(pos).v;
  const int n = 5;
  for (int i = 0; i < n; ++i)
    REQUIRE(V.block<3, 3>(3 * i, 3 * i).norm() == 0.0);
  // the 3x3 block is even in the separation, so ij and ji blocks coincide
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      REQUIRE((V.block<3, 3>(3 * i, 3 * j) - V.block<3, 3>(3 * j, 3 * i)).norm() < 1e-13);
}

TEST_CASE("kernel conjugation identity V^T = T V T with T_mm' = (-1)^m delta_m,-m'") {
  Rng rng(12, 0);
  std::vector<Vec3> pos;
  for (int i = 0; i < 4; ++i)
    pos.emplace_back(rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 5));
  const auto V = assemble(pos).v;

  Eigen::Matrix3cd T3 = Eigen::Matrix3cd::Zero();
  for (int m = -1; m <= 1; ++m) T3(m + 1, -m + 1) = std::pow(-1.0, m);
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(12, 12);
  for (int i = 0; i < 4; ++i) T.block<3, 3>(3 * i, 3 * i) = T3;

  REQUIRE((V.transpose() - T * V * T).norm() < 1e-12 * V.norm());
}

TEST_CASE("near-field divergence guard") {
  REQUIRE_THROWS_AS(assemble({Vec3(0, 0, 0), Vec3(0, 0, 0.5 * kExclusionRadius)}),
                    DegeneratePairError);
  REQUIRE_THROWS_AS(pair_block(Vec3(0, 0, 0)), DegeneratePairError);
  REQUIRE(min_pair_distance({Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 1.3)}) == Approx(0.3));
}

TEST_CASE("large separation decouples the pair") {
  const auto V = assemble({Vec3(0, 0, 0), Vec3(0, 0, 1e4)}).v;
  REQUIRE(V.norm() < 2e-3);
}

TEST_CASE("drive vector: plane-wave phases and polarization selection") {
  Pulse pulse;
  pulse.rabi_amplitude = 0.01;
  pulse.duration = 50.0;
  pulse.polarization = Polarization::RightCircular;

  const std::vector<Vec3> pos = {Vec3(0, 0, 0), Vec3(0.4, -0.2, 1.7)};
  const auto d = drive_vector(pos, pulse, 10.0);
  REQUIRE(d.pulse_active);

  // right-circular along +z couples only to m = +1
  REQUIRE(std::abs(d.omega[0]) < 1e-16);                       // m = -1
  REQUIRE(std::abs(d.omega[1]) < 1e-16);                       // m = 0
  REQUIRE(std::abs(d.omega[2]) == Approx(0.01).epsilon(1e-12)); // m = +1

  // relative phase between atoms is e^{i k z}
  const Complex ratio = d.omega[5] / d.omega[2];
  REQUIRE(std::abs(ratio - std::exp(Complex(0, 1) * 1.7)) < 1e-12);

  // off from the switch-off instant
  const auto off = drive_vector(pos, pulse, 50.0);
  REQUIRE_FALSE(off.pulse_active);
  REQUIRE(off.omega.norm() == 0.0);
}

TEST_CASE("linear drive polarization splits between the circular components") {
  Pulse pulse;
  pulse.rabi_amplitude = 1.0;
  pulse.polarization = Polarization::LinearX;
  const auto d = drive_vector({Vec3(0, 0, 0)}, pulse, 0.0);
  // x = (e_{-1} - e_{+1})/sqrt(2)
  REQUIRE(std::abs(d.omega[0]) == Approx(1.0 / std::sqrt(2.0)));
  REQUIRE(std::abs(d.omega[1]) < 1e-16);
  REQUIRE(std::abs(d.omega[2]) == Approx(1.0 / std::sqrt(2.0)));
}
