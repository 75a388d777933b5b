#include "gapflag/sun_param.hpp"

#include <cmath>
#include <future>
#include <numbers>
#include <string>

#include "gapflag/errors.hpp"

namespace gapflag {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

void require_pair(int n, int i, int j) {
  if (n < 2 || i < 0 || j >= n || i >= j)
    throw ValidationError("invalid index pair (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") for n = " + std::to_string(n));
}

ComplexMatrix rotation_block(int n, int i, int j, double theta, double phi) {
  ComplexMatrix r = ComplexMatrix::Identity(n, n);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  r(i, i) = c;
  r(j, j) = c;
  r(i, j) = -s * std::exp(-kI * phi);
  r(j, i) = s * std::exp(kI * phi);
  return r;
}

ComplexMatrix coset_matrix(const AngleSet& angles) {
  const int n = angles.dim();
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  for (const auto& [i, j] : lexicographic_pairs(n))
    u = u * rotation_block(n, i, j, angles.theta(i, j), angles.phi(i, j));
  return u;
}

ComplexMatrix density_from_frame(const GapVector& r, const ComplexMatrix& u) {
  const ProbVector p = probs_from_gaps(r);
  return u * p.values().cast<Complex>().asDiagonal() * u.adjoint();
}

struct ShardSums {
  ComplexMatrix sum;
  RealMatrix sum_sq;
};

// Runs `body` over kMonteCarloShards sub-streams with deterministic sub-seeds
// and reduces in shard order, so results do not depend on scheduling.
template <class Body>
MonteCarloMatrix sharded_mean(int n, std::uint64_t samples, std::uint64_t seed, Body body) {
  std::vector<std::future<ShardSums>> futures;
  for (int shard = 0; shard < kMonteCarloShards; ++shard) {
    const std::uint64_t count = samples / kMonteCarloShards +
                                (static_cast<std::uint64_t>(shard) < samples % kMonteCarloShards ? 1 : 0);
    futures.push_back(std::async(std::launch::async, [=]() {
      ShardSums acc{ComplexMatrix::Zero(n, n), RealMatrix::Zero(n, n)};
      FlagSampler sampler(n, mix_seed(seed, static_cast<std::uint64_t>(shard)));
      for (std::uint64_t s = 0; s < count; ++s) {
        const ComplexMatrix x = body(sampler);
        acc.sum += x;
        acc.sum_sq += x.cwiseAbs2();
      }
      return acc;
    }));
  }
  ShardSums total{ComplexMatrix::Zero(n, n), RealMatrix::Zero(n, n)};
  for (auto& f : futures) {
    ShardSums part = f.get();
    total.sum += part.sum;
    total.sum_sq += part.sum_sq;
  }
  MonteCarloMatrix out;
  out.samples = samples;
  out.seed = seed;
  out.standard_error = RealMatrix::Zero(n, n);
  if (samples == 0) {
    out.mean = ComplexMatrix::Zero(n, n);
    out.frobenius_error = std::sqrt(static_cast<double>(n));
    return out;
  }
  const double count = static_cast<double>(samples);
  out.mean = total.sum / count;
  if (samples > 1) {
    const RealMatrix var =
        ((total.sum_sq / count) - out.mean.cwiseAbs2()).cwiseMax(0.0) * (count / (count - 1.0));
    out.standard_error = (var / count).cwiseSqrt();
  }
  out.frobenius_error = (out.mean - ComplexMatrix::Identity(n, n)).norm();
  return out;
}

}  // namespace

int pair_index(int n, int i, int j) {
  require_pair(n, i, j);
  // Pairs before row i: sum_{m<i} (n-1-m).
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::vector<std::pair<int, int>> lexicographic_pairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return pairs;
}

AngleSet::AngleSet(int n)
    : n_(n), theta_(static_cast<std::size_t>(n * (n - 1) / 2), 0.0), phi_(theta_.size(), 0.0) {
  if (n < 2) throw ValidationError("AngleSet needs n >= 2");
}

AngleSet::AngleSet(int n, std::vector<double> theta, std::vector<double> phi,
                   std::optional<std::vector<double>> torus)
    : n_(n), theta_(std::move(theta)), phi_(std::move(phi)), torus_(std::move(torus)) {
  if (n < 2) throw ValidationError("AngleSet needs n >= 2");
  const std::size_t pairs = static_cast<std::size_t>(n * (n - 1) / 2);
  if (theta_.size() != pairs || phi_.size() != pairs)
    throw ValidationError("AngleSet needs exactly n(n-1)/2 theta and phi entries");
  for (double t : theta_)
    if (!(t >= 0.0 && t <= kPi)) throw ValidationError("theta_ij outside [0, pi]");
  for (double p : phi_)
    if (!(p >= 0.0 && p < 2.0 * kPi)) throw ValidationError("phi_ij outside [0, 2pi)");
  if (torus_ && torus_->size() != static_cast<std::size_t>(n - 1))
    throw ValidationError("torus needs n-1 phases");
}

AngleSet uniform_angles(int n, Rng& rng, bool with_torus) {
  const std::size_t pairs = static_cast<std::size_t>(n * (n - 1) / 2);
  std::uniform_real_distribution<double> theta_dist(0.0, kPi);
  std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * kPi);
  std::vector<double> theta(pairs), phi(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    theta[k] = theta_dist(rng);
    phi[k] = phi_dist(rng);
  }
  std::optional<std::vector<double>> torus;
  if (with_torus) {
    torus.emplace(static_cast<std::size_t>(n - 1));
    for (double& t : *torus) t = phi_dist(rng);
  }
  return AngleSet(n, std::move(theta), std::move(phi), std::move(torus));
}

ComplexMatrix embedded_generator(int n, int i, int j, int k) {
  require_pair(n, i, j);
  ComplexMatrix s = ComplexMatrix::Zero(n, n);
  switch (k) {
    case 1:
      s(i, j) = 1.0;
      s(j, i) = 1.0;
      break;
    case 2:
      s(i, j) = -kI;
      s(j, i) = kI;
      break;
    case 3:
      s(i, i) = 1.0;
      s(j, j) = -1.0;
      break;
    default:
      throw ValidationError("embedded generator index k must be 1, 2 or 3");
  }
  return s;
}

RealMatrix cartan_generator(int n, int l) {
  if (n < 2 || l < 1 || l > n - 1)
    throw ValidationError("Cartan generator index l must be in 1..n-1");
  RealMatrix h = RealMatrix::Zero(n, n);
  for (int j = 0; j < l; ++j) h(j, j) = 1.0;
  h(l, l) = -static_cast<double>(l);
  return h / std::sqrt(static_cast<double>(l) * (l + 1));
}

UnitaryFrame rotation_factor(int n, int i, int j, double theta, double phi) {
  require_pair(n, i, j);
  return UnitaryFrame(rotation_block(n, i, j, theta, phi));
}

UnitaryFrame coset_unitary(const AngleSet& angles) { return UnitaryFrame(coset_matrix(angles)); }

UnitaryFrame full_unitary(const AngleSet& angles) {
  if (!angles.torus()) throw ValidationError("full_unitary requires torus phases");
  const int n = angles.dim();
  RealVector exponent = RealVector::Zero(n);
  for (int l = 1; l <= n - 1; ++l)
    exponent += (*angles.torus())[l - 1] * cartan_generator(n, l).diagonal();
  ComplexVector phases(n);
  for (int k = 0; k < n; ++k) phases(k) = std::exp(kI * exponent(k));
  return UnitaryFrame(coset_matrix(angles) * phases.asDiagonal());
}

ComplexMatrix qutrit_coset_closed_form(const AngleSet& angles) {
  if (angles.dim() != 3) throw ValidationError("closed-form coset matrix is for n = 3");
  const double c12 = std::cos(angles.theta(0, 1) / 2), s12 = std::sin(angles.theta(0, 1) / 2);
  const double c13 = std::cos(angles.theta(0, 2) / 2), s13 = std::sin(angles.theta(0, 2) / 2);
  const double c23 = std::cos(angles.theta(1, 2) / 2), s23 = std::sin(angles.theta(1, 2) / 2);
  const double p12 = angles.phi(0, 1), p13 = angles.phi(0, 2), p23 = angles.phi(1, 2);
  auto e = [](double x) { return std::exp(kI * x); };
  ComplexMatrix u(3, 3);
  u(0, 0) = c12 * c13;
  u(0, 1) = -e(-p12) * s12 * c23 - e(-p13 + p23) * c12 * s13 * s23;
  u(0, 2) = e(-(p12 + p23)) * s12 * s23 - e(-p13) * c12 * s13 * c23;
  u(1, 0) = e(p12) * s12 * c13;
  u(1, 1) = c12 * c23 - e(p12 - p13 + p23) * s12 * s13 * s23;
  u(1, 2) = -e(-p23) * c12 * s23 - e(p12 - p13) * s12 * s13 * c23;
  u(2, 0) = e(p13) * s13;
  u(2, 1) = e(p23) * c13 * s23;
  u(2, 2) = c13 * c23;
  return u;
}

DensityMatrix assemble_density(const GapVector& r, const AngleSet& angles) {
  if (r.dim() != angles.dim()) throw ValidationError("gap vector and angles disagree on n");
  return DensityMatrix(density_from_frame(r, coset_matrix(angles)));
}

DensityMatrix assemble_density(const GapVector& r, const ComplexMatrix& u) {
  if (u.rows() != r.dim() || u.cols() != r.dim())
    throw ValidationError("frame and gap vector disagree on n");
  return DensityMatrix(density_from_frame(r, u));
}

ComplexMatrix fix_frame_phases(ComplexMatrix u) {
  const int n = static_cast<int>(u.cols());
  for (int c = 0; c < n; ++c) {
    Eigen::Index row = 0;
    u.col(c).cwiseAbs().maxCoeff(&row);
    const Complex z = u(row, c);
    if (std::abs(z) > 0.0) u.col(c) *= std::conj(z) / std::abs(z);
  }
  const Complex det = u.determinant();
  if (std::abs(det) > 0.0) u.col(n - 1) *= std::conj(det) / std::abs(det);
  return u;
}

SpectralFrame eigendecompose_ordered(const DensityMatrix& rho) {
  const int n = rho.dim();
  const ComplexMatrix herm = 0.5 * (rho.matrix() + rho.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm);
  RealVector p = es.eigenvalues().reverse();
  ComplexMatrix u = es.eigenvectors().rowwise().reverse();
  for (int k = 0; k + 1 < n; ++k)
    if (p(k) - p(k + 1) < kFrameGapThreshold)
      throw DegeneracyError("degenerate spectrum: |p_" + std::to_string(k + 1) + " - p_" +
                            std::to_string(k + 2) + "| below threshold");
  // Clip round-off negatives so the gaps land inside R_{n-1}.
  p = p.cwiseMax(0.0);
  p /= p.sum();
  RealVector r(n - 1);
  for (int a = 0; a + 1 < n; ++a) r(a) = p(a) - p(a + 1);
  return SpectralFrame{GapVector(std::move(r)), UnitaryFrame(fix_frame_phases(std::move(u)))};
}

double flag_density(const AngleSet& angles) {
  const int n = angles.dim();
  double norm = 1.0;
  for (int m = 1; m <= n - 1; ++m) norm *= std::tgamma(m + 1.0) / std::pow(4.0 * kPi, m);
  double density = norm;
  for (const auto& [i, j] : lexicographic_pairs(n)) {
    const double theta = angles.theta(i, j);
    density *= std::sin(theta) * std::pow(std::cos(0.5 * theta), 2 * (j - i - 1));
  }
  return density;
}

double angle_box_volume(int n) { return std::pow(2.0 * kPi * kPi, n * (n - 1) / 2); }

FlagSampler::FlagSampler(int n, std::uint64_t seed) : n_(n), rng_(seed) {
  if (n < 2) throw ValidationError("flag sampling needs n >= 2");
}

ComplexMatrix FlagSampler::next_matrix() {
  ComplexMatrix g(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const double re = normal_(rng_);
      const double im = normal_(rng_);
      g(i, j) = Complex(re, im);
    }
  // span(q_1..q_k) = span(g_1..g_k), so the flag inherits the left invariance
  // of the Gaussian ensemble; column phases are then fixed by convention.
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n_, n_);
  return fix_frame_phases(std::move(q));
}

UnitaryFrame FlagSampler::next() { return UnitaryFrame(next_matrix()); }

UnitaryFrame sample_flag(int n, std::uint64_t seed) { return FlagSampler(n, seed).next(); }

MonteCarloMatrix resolution_check(int n, int column, std::uint64_t samples, std::uint64_t seed) {
  if (n < 2 || column < 0 || column >= n) throw ValidationError("column index out of range");
  return sharded_mean(n, samples, seed, [n, column](FlagSampler& sampler) -> ComplexMatrix {
    const ComplexMatrix u = sampler.next_matrix();
    const ComplexVector v = u.col(column);
    return static_cast<double>(n) * (v * v.adjoint());
  });
}

MonteCarloMatrix quantize(const FlagFunction& f, const GapVector& r, std::uint64_t samples,
                          std::uint64_t seed) {
  const int n = r.dim();
  const RealVector p = probs_from_gaps(r).values();
  return sharded_mean(n, samples, seed, [&f, &p, n](FlagSampler& sampler) -> ComplexMatrix {
    const UnitaryFrame frame = sampler.next();
    const double weight = f(frame);
    const ComplexMatrix& u = frame.matrix();
    return (weight * n) * (u * p.cast<Complex>().asDiagonal() * u.adjoint());
  });
}

double flag_volume(int n) {
  if (n < 2 || n > kMaxExactDim)
    throw ValidationError("flag_volume supports 2 <= n <= " + std::to_string(kMaxExactDim));
  double superfactorial = 1.0;
  for (int m = 1; m <= n - 1; ++m) superfactorial *= std::tgamma(m + 1.0);
  return std::pow(4.0 * kPi, n * (n - 1) / 2) / superfactorial;
}

double state_space_volume(int n) {
  return static_cast<double>(weighted_simplex_volume(n)) * flag_volume(n);
}

}  // namespace gapflag
