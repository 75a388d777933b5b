#include <numbers>
#include <random>

#include "doctest.h"
#include "gapflag/errors.hpp"
#include "gapflag/gkls.hpp"
#include "gapflag/info_geometry.hpp"
#include "gapflag/sun_param.hpp"
#include "oracles.hpp"

using namespace gapflag;
using oracle::CMat;

namespace {

constexpr double kPi = std::numbers::pi;

CMat pauli(int k) {
  CMat s = CMat::Zero(2, 2);
  if (k == 1) s << 0, 1, 1, 0;
  if (k == 2) s << 0, Complex(0, -1), Complex(0, 1), 0;
  if (k == 3) s << 1, 0, 0, -1;
  return s;
}

template <class Rng>
CMat random_hermitian(int n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return scale * 0.5 * (a + a.adjoint());
}

template <class Rng>
SplitState random_split_state(int n, Rng& rng, double min_gap = 0.01) {
  for (;;) {
    const RealVector p = oracle::sorted_spectrum(n, rng);
    if (oracle::diffs(p).minCoeff() < min_gap) continue;
    return SplitState{GapVector(oracle::diffs(p)), oracle::special_unitary(n, rng), 0.0};
  }
}

CMat density_of(const SplitState& s) {
  const RealVector p = oracle::probs(s.r.values());
  return s.u * p.cast<Complex>().asDiagonal() * s.u.adjoint();
}

double bloch_radius(const ComplexMatrix& rho) {
  const RealVector p = descending_eigenvalues(rho);
  return p(0) - p(1);
}

LindbladModel amplitude_damping() {
  CMat lower = CMat::Zero(2, 2);
  lower(1, 0) = 1.0;
  return LindbladModel(CMat::Zero(2, 2), {lower}, {1.0});
}

}  // namespace

TEST_SUITE("gkls") {
  TEST_CASE("model validation") {
    CMat h = CMat::Zero(2, 2);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(LindbladModel(h, {}, {}), ValidationError);
    CHECK_THROWS_AS(LindbladModel(CMat::Zero(2, 2), {pauli(1)}, {-1.0}), ValidationError);
    CHECK_THROWS_AS(LindbladModel(CMat::Zero(2, 2), {pauli(1)}, {}), ValidationError);
    CHECK_THROWS_AS(LindbladModel(CMat::Zero(2, 2), {CMat::Zero(3, 3)}, {1.0}), ValidationError);
    const LindbladModel m(CMat::Zero(3, 3), {}, {});
    CHECK_THROWS_AS(lindblad_rhs(CMat::Identity(2, 2) / 2.0, m), ValidationError);
  }

  TEST_CASE("Lindblad right-hand side") {
    std::mt19937_64 rng(1);
    const LindbladModel empty(CMat::Zero(3, 3), {}, {});
    CHECK(lindblad_rhs(DensityMatrix::maximally_mixed(3), empty).norm() == 0.0);
    for (int n = 2; n <= 5; ++n) {
      const LindbladModel m = random_lindblad_model(n, 3, 100 + n);
      for (int t = 0; t < 20; ++t) {
        const CMat rho = oracle::random_density(n, rng);
        const ComplexMatrix d = lindblad_rhs(rho, m);
        CHECK(std::abs(d.trace()) < 1e-13);
        CHECK(hermiticity_defect(d) < 1e-13);
      }
      // Hermitian jumps are unital: the maximally mixed state is stationary
      // under the dissipator.
      const LindbladModel unital(random_hermitian(n, rng), {random_hermitian(n, rng), random_hermitian(n, rng)},
                                 {0.7, 1.3});
      CHECK(dissipator(CMat::Identity(n, n) / double(n), unital).norm() < 1e-14);
    }
  }

  TEST_CASE("qubit Pauli channel populations") {
    // Diagonal of the RHS in the Bloch frame reproduces r' / r.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const std::array<double, 3> h = {u(rng), u(rng), u(rng)};
      const QubitAngles s{0.6, 0.2 + 2.5 * u(rng), 2 * kPi * u(rng)};
      const ComplexMatrix rho = qubit_density(s).matrix();
      const ComplexMatrix d = lindblad_rhs(rho, pauli_model(CMat::Zero(2, 2), h));
      const ComplexMatrix frame = rotation_factor(2, 0, 1, s.theta, s.phi).matrix();
      const ComplexMatrix dt = frame.adjoint() * d * frame;
      CHECK((dt(0, 0) - dt(1, 1)).real() == doctest::Approx(qubit_rhs(s, CMat::Zero(2, 2), h).r_dot));
    }
  }

  TEST_CASE("direct integration: unitary evolution") {
    std::mt19937_64 rng(3);
    for (int n = 2; n <= 4; ++n) {
      const CMat h = random_hermitian(n, rng);
      const CMat rho0 = oracle::random_density(n, rng);
      const Trajectory traj = integrate_direct(DensityMatrix(rho0), LindbladModel(h, {}, {}), 1.0, 1e-3);
      const RealVector p0 = descending_eigenvalues(rho0);
      for (std::size_t k = 0; k < traj.times.size(); k += 50) {
        CHECK((descending_eigenvalues(traj.states[k]) - p0).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(traj.diagnostics[k].trace_error < 1e-10);
      }
      CHECK((traj.states.back() - oracle::unitary_evolve(h, rho0, 1.0)).norm() < 1e-10);
    }
  }

  TEST_CASE("direct integration: depolarizing qubit") {
    const LindbladModel m = pauli_model(CMat::Zero(2, 2), {1.0, 1.0, 1.0});
    const DensityMatrix rho0 = qubit_density({0.8, 1.0, 2.0});
    const Trajectory traj = integrate_direct(rho0, m, 0.5, 1e-3);
    CHECK(traj.times.back() == doctest::Approx(0.5));
    CHECK(std::abs(bloch_radius(traj.states.back()) - 0.8 * std::exp(-2.0)) < 1e-6);
    for (std::size_t k = 1; k < traj.times.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
  }

  TEST_CASE("direct integration is fourth order") {
    const LindbladModel m = random_lindblad_model(3, 2, 77);
    std::mt19937_64 rng(4);
    const DensityMatrix rho0(oracle::random_density(3, rng));
    const ComplexMatrix ref = integrate_direct(rho0, m, 1.0, 1e-3).states.back();
    const double e1 = (integrate_direct(rho0, m, 1.0, 0.1).states.back() - ref).norm();
    const double e2 = (integrate_direct(rho0, m, 1.0, 0.05).states.back() - ref).norm();
    CHECK(e1 / e2 > 13.0);
    CHECK(e1 / e2 < 19.0);
  }

  TEST_CASE("direct integration reports positivity loss") {
    const LindbladModel strong(CMat::Zero(2, 2), amplitude_damping().jumps(), {5.0});
    ComplexMatrix excited = ComplexMatrix::Zero(2, 2);
    excited(0, 0) = 1.0;
    CHECK_THROWS_AS(integrate_direct(DensityMatrix(excited), strong, 2.0, 1.0), PositivityError);
    CHECK_THROWS_AS(integrate_direct(DensityMatrix(excited), strong, 1.0, 0.0), ValidationError);
    CHECK(step_count(1.0, 1e-3) == 1000);
    CHECK(step_count(0.0, 0.1) == 0);
    CHECK(step_count(1.0, 0.3) == 4);
  }

  TEST_CASE("split right-hand side reconstructs the Lindblad generator") {
    std::mt19937_64 rng(5);
    for (int n = 2; n <= 4; ++n) {
      for (int t = 0; t < 50; ++t) {
        const LindbladModel m = random_lindblad_model(n, 2, 1000 * n + t);
        const SplitState s = random_split_state(n, rng);
        const SplitRates rates = split_rhs(s, m);
        const CMat rho = density_of(s);
        const CMat rebuilt = s.u * rates.p_dot.cast<Complex>().asDiagonal() * s.u.adjoint() +
                             rates.omega * rho - rho * rates.omega;
        CHECK((rebuilt - lindblad_rhs(rho, m)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(rates.dissipator_diag.sum()) < 1e-12);
        CHECK(std::abs(rates.p_dot.sum()) < 1e-12);
        CHECK((rates.omega + rates.omega.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(rates.omega_tilde.diagonal().cwiseAbs().maxCoeff() == 0.0);
        // Gap rates do not see the Hamiltonian.
        const SplitRates other = split_rhs(s, m.with_hamiltonian(random_hermitian(n, rng, 3.0)));
        CHECK((other.r_dot - rates.r_dot).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  TEST_CASE("split right-hand side special cases") {
    std::mt19937_64 rng(6);
    const SplitState s = random_split_state(3, rng);
    const SplitRates closed = split_rhs(s, LindbladModel(random_hermitian(3, rng), {}, {}));
    CHECK(closed.r_dot.cwiseAbs().maxCoeff() == 0.0);
    // H = 0: the frame rotates only through the dissipator.
    const LindbladModel m = random_lindblad_model(3, 2, 9).with_hamiltonian(CMat::Zero(3, 3));
    const SplitRates rates = split_rhs(s, m);
    const RealVector p = oracle::probs(s.r.values());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j)
          CHECK(std::abs(rates.omega_tilde(i, j) - rates.dissipator_tilde(i, j) / (p(j) - p(i))) < 1e-14);
    RealVector degenerate(2);
    degenerate << 0.3, 1e-9;
    CHECK_THROWS_AS(split_rhs(degenerate, s.u, m), DegeneracyError);
  }

  TEST_CASE("split integration matches direct integration") {
    std::mt19937_64 rng(7);
    for (int n = 2; n <= 3; ++n) {
      const LindbladModel m = random_lindblad_model(n, 2, 500 + n);
      const DensityMatrix rho0(density_of(random_split_state(n, rng, 0.05)));
      const Trajectory d = integrate_direct(rho0, m, 1.0, 1e-3);
      const Trajectory s = integrate_split(rho0, m, 1.0, 1e-3);
      REQUIRE(d.times.size() == s.times.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < d.times.size(); ++k) {
        worst = std::max(worst, (d.states[k] - s.states[k]).norm());
        CHECK(s.diagnostics[k].frame_drift < 1e-10);
      }
      CHECK(worst < 1e-6);
    }
  }

  TEST_CASE("split integration: unitary and depolarizing models") {
    std::mt19937_64 rng(8);
    const CMat h = random_hermitian(3, rng);
    const SplitState s0 = random_split_state(3, rng, 0.05);
    const Trajectory closed = integrate_split(DensityMatrix(density_of(s0)), LindbladModel(h, {}, {}), 1.0, 1e-3);
    for (const auto& r : closed.gaps) CHECK((r - s0.r.values()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((closed.states.back() - oracle::unitary_evolve(h, density_of(s0), 1.0)).norm() < 1e-10);

    const DensityMatrix q0 = qubit_density({0.8, 1.0, 2.0});
    const Trajectory depol = integrate_split(q0, pauli_model(CMat::Zero(2, 2), {1, 1, 1}), 0.5, 1e-3);
    CHECK(std::abs(depol.gaps.back()(0) - 0.8 * std::exp(-2.0)) < 1e-9);
    CHECK((depol.frames.back() - depol.frames.front()).norm() < 1e-14);
  }

  TEST_CASE("split integration detects spectral degeneracy") {
    ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
    rho.diagonal() << 0.7, 0.3;
    // p_1(t) = 0.7 e^{-t} reaches 1/2 at t = ln 1.4.
    try {
      integrate_split(DensityMatrix(rho), amplitude_damping(), 1.0, 1e-3);
      FAIL("expected a degeneracy error");
    } catch (const DegeneracyError& e) {
      REQUIRE(e.time().has_value());
      CHECK(*e.time() == doctest::Approx(std::log(1.4)).epsilon(1e-2));
    }
    IntegrationOptions opts;
    opts.fallback_to_direct = true;
    const Trajectory t = integrate_split(DensityMatrix(rho), amplitude_damping(), 1.0, 1e-3, opts);
    REQUIRE(t.breakdown_time.has_value());
    CHECK(t.times.back() == doctest::Approx(1.0));
    const Trajectory d = integrate_direct(DensityMatrix(rho), amplitude_damping(), 1.0, 1e-3);
    CHECK((t.states.back() - d.states.back()).norm() < 1e-6);
    CHECK_THROWS_AS(integrate_split(DensityMatrix::maximally_mixed(2), amplitude_damping(), 1.0, 1e-3),
                    DegeneracyError);
  }

  TEST_CASE("qubit closed form") {
    const CMat zero = CMat::Zero(2, 2);
    const QubitRates depol = qubit_rhs({0.5, 1.2, 0.4}, zero, {1, 1, 1});
    CHECK(depol.r_dot / 0.5 == doctest::Approx(-4.0));
    CHECK(depol.theta_dot == doctest::Approx(0.0));
    CHECK(depol.phi_dot == doctest::Approx(0.0));
    CMat h = CMat::Zero(2, 2);
    h(0, 0) = 1.7;
    h(1, 1) = -0.4;
    CHECK(qubit_rhs({0.5, 1.2, 0.4}, h, {0.3, 0.3, 0.9}).phi_dot == doctest::Approx(2.1));
    CHECK_THROWS_AS(qubit_rhs({0.5, 0.0, 0.4}, h, {1, 1, 1}), DegeneracyError);
    CHECK_THROWS_AS(qubit_rhs({0.0, 1.0, 0.4}, h, {1, 1, 1}), DegeneracyError);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
      const CMat hh = random_hermitian(2, rng);
      const std::array<double, 3> rates = {u(rng), u(rng), u(rng)};
      const QubitAngles s{0.05 + 0.9 * u(rng), 0.1 + (kPi - 0.2) * u(rng), 2 * kPi * u(rng)};
      const QubitRates closed = qubit_rhs(s, hh, rates);
      const QubitRates general = qubit_rates_from_split(s, pauli_model(hh, rates));
      CHECK(std::abs(closed.r_dot - general.r_dot) < 1e-10);
      CHECK(std::abs(closed.theta_dot - general.theta_dot) < 1e-10);
      CHECK(std::abs(closed.phi_dot - general.phi_dot) < 1e-10);
    }
  }

  TEST_CASE("qubit radial rate is non-positive") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int draw = 0; draw < 5; ++draw) {
      const std::array<double, 3> rates = {u(rng), u(rng), u(rng)};
      for (int i = 1; i <= 50; ++i)
        for (int j = 0; j < 50; ++j) {
          const QubitAngles s{0.7, kPi * i / 51.0, 2 * kPi * j / 50.0};
          CHECK(qubit_rhs(s, CMat::Zero(2, 2), rates).r_dot <= 0.0);
        }
    }
  }

  TEST_CASE("real qutrit") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto antisymmetric = [&] {
      Eigen::Matrix3d a;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = g(rng);
      return Eigen::Matrix3d(a - a.transpose());
    };
    for (int t = 0; t < 100; ++t) {
      const RealVector p = oracle::sorted_spectrum(3, rng);
      if (oracle::diffs(p).minCoeff() < 0.02) continue;
      const QutritEuler s{p(0) - p(1), p(1) - p(2), 2 * kPi * u(rng), 0.2 + (kPi - 0.4) * u(rng),
                          2 * kPi * u(rng)};
      const Eigen::Matrix3d a = antisymmetric();
      std::vector<ComplexMatrix> jumps;
      for (int k = 0; k < 2; ++k) {
        Eigen::Matrix3d l;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) l(i, j) = g(rng);
        jumps.push_back(l.cast<Complex>());
      }
      const LindbladModel diss(CMat::Zero(3, 3), jumps, {1.0, 0.5});
      const QutritRates q = real_qutrit_rhs(s, a, diss);

      const Eigen::Matrix3d rot = oracle::zyz(s.alpha, s.beta, s.gamma);
      CHECK((euler_rotation(s.alpha, s.beta, s.gamma) - rot).cwiseAbs().maxCoeff() < 1e-14);
      RealVector r(2);
      r << s.r1, s.r2;
      const SplitRates general =
          split_rhs(r, rot.cast<Complex>(), diss.with_hamiltonian(Complex(0, 1) * a.cast<Complex>()));
      CHECK(std::abs(q.r1_dot - general.r_dot(0)) < 1e-10);
      CHECK(std::abs(q.r2_dot - general.r_dot(1)) < 1e-10);
      CHECK((q.omega.cast<Complex>() - general.omega_tilde).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((euler_omega(s, q.alpha_dot, q.beta_dot, q.gamma_dot) - q.omega).cwiseAbs().maxCoeff() < 1e-10);
      const Eigen::Matrix3d fd =
          oracle::zyz_omega_fd(s.alpha, s.beta, s.gamma, q.alpha_dot, q.beta_dot, q.gamma_dot);
      CHECK((fd - q.omega).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(std::abs(q.d.sum()) < 1e-12);
    }
    const QutritEuler s{0.3, 0.2, 0.4, 1.0, 2.0};
    const Eigen::Matrix3d a = antisymmetric();
    const QutritRates closed = real_qutrit_rhs(s, a, LindbladModel(CMat::Zero(3, 3), {}, {}));
    CHECK(closed.r1_dot == 0.0);
    CHECK(closed.r2_dot == 0.0);
    const Eigen::Matrix3d rot = oracle::zyz(s.alpha, s.beta, s.gamma);
    CHECK((closed.omega - rot.transpose() * a * rot).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(real_qutrit_rhs({0.3, 0.2, 0.4, 0.0, 2.0}, a, LindbladModel(CMat::Zero(3, 3), {}, {})),
                    DegeneracyError);
    CHECK_THROWS_AS(real_qutrit_rhs(s, Eigen::Matrix3d::Identity(), LindbladModel(CMat::Zero(3, 3), {}, {})),
                    ValidationError);
    CMat complex_jump = CMat::Zero(3, 3);
    complex_jump(0, 1) = Complex(0, 1);
    complex_jump(1, 2) = 1.0;
    CHECK_THROWS_AS(real_qutrit_rhs(s, a, LindbladModel(CMat::Zero(3, 3), {complex_jump}, {1.0})),
                    ValidationError);
  }

  TEST_CASE("secular factorization") {
    std::mt19937_64 rng(12);
    for (int n = 2; n <= 4; ++n) {
      const SplitState s = random_split_state(n, rng);
      const SecularReport zero = secular_factorization_test(LindbladModel(random_hermitian(n, rng), {}, {}), s, 1e-10);
      CHECK(zero.factorized);
      CHECK(zero.max_spread == 0.0);
      CHECK(zero.probes.size() == 8);

      // Jumps U (sigma_1 + sigma_3)^{(i,i+1)} U^dagger give k_{i,i+1} = p_i - p_{i+1}.
      std::vector<ComplexMatrix> jumps;
      for (int i = 0; i + 1 < n; i += 2)
        jumps.push_back(s.u * (embedded_generator(n, i, i + 1, 1) + embedded_generator(n, i, i + 1, 3)) *
                        s.u.adjoint());
      const LindbladModel aligned(random_hermitian(n, rng), jumps, std::vector<double>(jumps.size(), 0.8));
      const SecularReport ok = secular_factorization_test(aligned, s, 1e-10);
      CHECK(ok.factorized);
      CHECK(ok.max_spread < 1e-12);

      if (n >= 3) {
        const SecularReport generic = secular_factorization_test(random_lindblad_model(n, 2, 40 + n), s, 1e-6);
        CHECK_FALSE(generic.factorized);
      }
    }
  }
}
