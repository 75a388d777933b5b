#include <random>

#include "doctest.h"
#include "gapflag/errors.hpp"
#include "gapflag/info_geometry.hpp"
#include "gapflag/sun_param.hpp"
#include "oracles.hpp"

using namespace gapflag;
using oracle::CMat;

namespace {

RealVector vec(std::initializer_list<double> xs) {
  RealVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

double kl_of_gaps(const RealVector& r) {
  const RealVector p = oracle::probs(r);
  double d = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) d += p(k) * std::log(p.size() * p(k));
  return d;
}

CMat psd_sqrt(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  const RealVector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

double bures_distance_sq(const CMat& a, const CMat& b) {
  const CMat s = psd_sqrt(a);
  const double root_fidelity = psd_sqrt(s * b * s).trace().real();
  return 2.0 * (1.0 - root_fidelity);
}

template <class Rng>
RealVector interior_gaps(int n, Rng& rng, double min_p = 0.02) {
  for (;;) {
    const RealVector p = oracle::sorted_spectrum(n, rng);
    if (p(n - 1) >= min_p && oracle::diffs(p).minCoeff() > 1e-3) return oracle::diffs(p);
  }
}

}  // namespace

TEST_SUITE("info_geometry") {
  TEST_CASE("Fisher metric at the origin is n times the inverse Cartan matrix") {
    const MetricTensor g3 = fisher_metric_r(GapVector(RealVector::Zero(2)));
    CHECK(g3.g(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g3.g(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g3.g(1, 1) == doctest::Approx(2.0).epsilon(1e-15));
    for (int n = 2; n <= 8; ++n) {
      const RealMatrix g = fisher_metric_r(GapVector(RealVector::Zero(n - 1))).g;
      const auto ci = oracle::cartan_inverse(n);
      for (int a = 0; a < n - 1; ++a)
        for (int b = 0; b < n - 1; ++b)
          CHECK(std::abs(g(a, b) - n * static_cast<double>(ci[a][b])) < 1e-13);
    }
  }

  TEST_CASE("Fisher metric is symmetric positive definite in the interior") {
    std::mt19937_64 rng(3);
    for (int n = 2; n <= 6; ++n) {
      const RealMatrix g = fisher_metric_r(GapVector(interior_gaps(n, rng))).g;
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<RealMatrix>(g).eigenvalues().minCoeff() > 0.0);
    }
    CHECK_THROWS_AS(fisher_metric_r(GapVector(vec({1.0, 0.0}))), SingularMetricError);
  }

  TEST_CASE("Fisher metric is the curvature of the relative entropy") {
    // D(p(r) || p(r + d)) = d^T g d / 2 + O(d^3).
    std::mt19937_64 rng(8);
    for (int n = 2; n <= 5; ++n) {
      const RealVector r = interior_gaps(n, rng, 0.05);
      const RealVector p = oracle::probs(r);
      const RealMatrix g = fisher_metric_r(GapVector(r)).g;
      auto divergence = [&](const RealVector& d) {
        const RealVector q = oracle::probs(r + d);
        return (p.array() * (p.array() / q.array()).log()).sum();
      };
      const double h = 1e-4;
      for (int a = 0; a < n - 1; ++a)
        for (int b = 0; b < n - 1; ++b) {
          RealVector ea = RealVector::Zero(n - 1), eb = RealVector::Zero(n - 1);
          ea(a) = h;
          eb(b) = h;
          const double hess = (divergence(ea + eb) - divergence(ea - eb) - divergence(eb - ea) +
                               divergence(-ea - eb)) / (4 * h * h);
          CHECK(hess == doctest::Approx(g(a, b)).epsilon(1e-4));
        }
    }
  }

  TEST_CASE("KL quadratic form") {
    for (int n = 2; n <= 6; ++n) {
      const RealVector r = RealVector::LinSpaced(n - 1, 1.0, 2.0) * 1e-3;
      const double exact = kl_exact(probs_from_gaps(GapVector(r)));
      CHECK(kl_quadratic(GapVector(r)) == doctest::Approx(exact).epsilon(1e-2));
    }
    CHECK(kl_quadratic(GapVector(RealVector::Zero(3))) == 0.0);
    CHECK(kl_exact(ProbVector(RealVector::Constant(4, 0.25))) == doctest::Approx(0.0));
    CHECK_THROWS_AS(kl_exact(ProbVector(vec({1.0, 0.0}))), SingularMetricError);
    CHECK(kl_of_gaps(vec({0.3, 0.2})) == doctest::Approx(kl_exact(ProbVector(vec({0.6, 0.3, 0.1})))));
  }

  TEST_CASE("Bures decomposition weights and spectral part") {
    const BuresDecomposition b = bures_decomposition(GapVector(vec({0.3, 0.2})));
    CHECK(b.angular_weights.at({0, 2}) == doctest::Approx(0.125 / 0.7));
    CHECK(b.angular_weights.at({0, 1}) == doctest::Approx(0.5 * 0.09 / 0.9));
    CHECK(b.angular_weights.at({1, 2}) == doctest::Approx(0.5 * 0.04 / 0.4));
    CHECK(b.angular_weights.size() == 3);
    CHECK_THROWS_AS(bures_decomposition(GapVector(vec({0.3, 0.0}))), DegeneracyError);
  }

  TEST_CASE("Bures parts against the fidelity expansion") {
    std::mt19937_64 rng(21);
    const double t = 1e-4;
    for (int n = 2; n <= 4; ++n) {
      const RealVector r = interior_gaps(n, rng, 0.05);
      const BuresDecomposition b = bures_decomposition(GapVector(r));
      const RealVector p = oracle::probs(r);
      const CMat rho = p.cast<Complex>().asDiagonal();

      const RealVector dr = RealVector::LinSpaced(n - 1, 0.3, -0.2);
      const CMat sigma = oracle::probs(r + t * dr).cast<Complex>().asDiagonal();
      CHECK(bures_distance_sq(rho, sigma) / (t * t) ==
            doctest::Approx(dr.dot(b.spectral_part.g * dr)).epsilon(1e-3));

      for (const auto& [pair, w] : b.angular_weights) {
        CMat x = CMat::Zero(n, n);
        x(pair.first, pair.second) = Complex(0.6, 0.8);
        x(pair.second, pair.first) = -std::conj(x(pair.first, pair.second));
        const CMat u = (t * x).exp();
        CHECK(bures_distance_sq(rho, u * rho * u.adjoint()) / (t * t) ==
              doctest::Approx(2.0 * w).epsilon(1e-3));
      }
    }
  }

  TEST_CASE("purity examples") {
    const GapVector r(vec({0.3, 0.2}));
    CHECK(purity_from_probs(probs_from_gaps(r)) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(purity_gap(r) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(purity_gap(GapVector(vec({1.0}))) == doctest::Approx(1.0));
    CHECK(purity_from_probs(ProbVector(RealVector::Constant(5, 0.2))) == 0.0);
    CHECK_THROWS_AS(purity_gap(GapVector(RealVector::Zero(4))), CrossoverTieError);
    for (int n = 2; n <= 6; ++n) {
      RealVector pure = RealVector::Zero(n - 1);
      pure(0) = 1.0;
      CHECK(purity_gap(GapVector(pure)) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("purity routes agree with the trace-distance oracle") {
    std::mt19937_64 rng(5);
    for (int n = 2; n <= 6; ++n) {
      for (int t = 0; t < 500; ++t) {
        const CMat rho = oracle::random_density(n, rng);
        const DensityMatrix d(rho);
        const RealVector p = descending_eigenvalues(rho);
        const GapVector r = gaps_from_unsorted(std::span<const double>(p.data(), p.size()));
        const double reference = oracle::purity_trace_distance(rho);
        CHECK(std::abs(purity_trace_norm(d) - reference) < 1e-12);
        CHECK(std::abs(purity_gap(r) - reference) < 1e-12);
      }
    }
  }

  TEST_CASE("entropy") {
    CHECK(shannon_entropy(ProbVector(RealVector::Constant(4, 0.25))) ==
          doctest::Approx(std::log(4.0)));
    CHECK(shannon_entropy(ProbVector(vec({1.0, 0.0, 0.0}))) == 0.0);
  }
}
