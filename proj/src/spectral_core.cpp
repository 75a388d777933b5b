#include "gapflag/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "gapflag/errors.hpp"
#include "gapflag/random.hpp"

namespace gapflag {

namespace {

void require_dim(int n) {
  if (n < 2) throw ValidationError("dimension n must be >= 2, got " + std::to_string(n));
}

void require_exact_dim(int n) {
  require_dim(n);
  if (n > kMaxExactDim)
    throw ValidationError("exact volumes are limited to n <= " + std::to_string(kMaxExactDim));
}

Rational factorial(int m) {
  Rational f = 1;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

// Bareiss-free Gaussian elimination over the rationals.
Rational determinant(RationalMatrix m) {
  const int n = m.rows();
  Rational det = 1;
  for (int c = 0; c < n; ++c) {
    int pivot = c;
    while (pivot < n && m(pivot, c) == 0) ++pivot;
    if (pivot == n) return 0;
    if (pivot != c) {
      for (int j = 0; j < n; ++j) std::swap(m(pivot, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (int i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      const Rational f = m(i, c) / m(c, c);
      for (int j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

VolumeEstimate rejection_estimate(int dims, std::uint64_t samples, std::uint64_t seed,
                                  const std::vector<double>& box,
                                  const std::function<bool(const std::vector<double>&)>& inside) {
  VolumeEstimate out;
  out.samples = samples;
  if (samples == 0) return out;
  double box_volume = 1.0;
  for (double side : box) box_volume *= side;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(dims);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (int d = 0; d < dims; ++d) x[d] = box[d] * unit(rng);
    if (inside(x)) ++hits;
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  out.estimate = box_volume * frac;
  out.standard_error = box_volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
  return out;
}

}  // namespace

ProbVector::ProbVector(RealVector p) : p_(std::move(p)) {
  const int n = static_cast<int>(p_.size());
  require_dim(n);
  for (int k = 0; k + 1 < n; ++k) {
    if (p_(k) < p_(k + 1) - kValidationTol) {
      std::ostringstream os;
      os << "probabilities not in descending order: p_" << k + 1 << " = " << p_(k) << " < p_"
         << k + 2 << " = " << p_(k + 1);
      throw ValidationError(os.str());
    }
  }
  if (p_(n - 1) < -kValidationTol) throw ValidationError("negative probability p_n");
  const double total = p_.sum();
  if (std::abs(total - 1.0) > kValidationTol) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities not normalized: sum = " << total;
    throw ValidationError(os.str());
  }
}

GapVector::GapVector(RealVector r) : r_(std::move(r)) {
  if (r_.size() < 1) throw ValidationError("gap vector must have length n-1 >= 1");
  if (!in_polytope(std::span<const double>(r_.data(), r_.size()), dim())) {
    std::ostringstream os;
    os << "polytope violation: gap vector outside the weighted simplex R_" << r_.size()
       << " (requires r_a >= 0 and sum a*r_a <= 1)";
    throw ValidationError(os.str());
  }
}

RationalMatrix::RationalMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, Rational(0)) {}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw ValidationError("rational matrix shape mismatch");
  RationalMatrix out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Rational& a = (*this)(i, k);
      if (a == 0) continue;
      for (int j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

bool RationalMatrix::is_identity() const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      if ((*this)(i, j) != (i == j ? 1 : 0)) return false;
  return true;
}

RealMatrix RationalMatrix::to_real() const {
  RealMatrix out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = static_cast<double>((*this)(i, j));
  return out;
}

GapVector gaps_from_probs(const ProbVector& p) {
  const int n = p.dim();
  RealVector r(n - 1);
  for (int a = 0; a + 1 < n; ++a) r(a) = p[a] - p[a + 1];
  return GapVector(std::move(r));
}

GapVector gaps_from_unsorted(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return gaps_from_probs(
      ProbVector(Eigen::Map<const RealVector>(sorted.data(), static_cast<Eigen::Index>(sorted.size()))));
}

ProbVector probs_from_gaps(const GapVector& r) {
  const int n = r.dim();
  const double nn = n;
  RealVector p(n);
  for (int k = 1; k <= n; ++k) {
    double pk = 1.0 / nn;
    for (int a = k; a <= n - 1; ++a) pk += ((n - a) / nn) * r[a - 1];
    for (int a = 1; a <= k - 1; ++a) pk -= (a / nn) * r[a - 1];
    p(k - 1) = pk;
  }
  return ProbVector(std::move(p));
}

RealMatrix jacobian_matrix(int n) {
  require_dim(n);
  const double nn = n;
  RealMatrix m(n, n - 1);
  for (int k = 1; k <= n; ++k)
    for (int a = 1; a <= n - 1; ++a) m(k - 1, a - 1) = (k <= a ? static_cast<double>(n - a) : -static_cast<double>(a)) / nn;
  return m;
}

CoweightBasis fundamental_coweights(int n) {
  require_dim(n);
  CoweightBasis basis;
  basis.n = n;
  for (int a = 1; a <= n - 1; ++a) {
    RealVector d(n);
    for (int k = 1; k <= n; ++k) d(k - 1) = (k <= a ? static_cast<double>(n - a) : -static_cast<double>(a)) / n;
    basis.diagonals.push_back(std::move(d));
  }
  return basis;
}

RationalMatrix cartan_matrix(int n) {
  require_dim(n);
  RationalMatrix c(n - 1, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    c(j, j) = 2;
    if (j > 0) c(j, j - 1) = -1;
    if (j + 1 < n - 1) c(j, j + 1) = -1;
  }
  return c;
}

RationalMatrix inverse_cartan(int n) {
  require_dim(n);
  RationalMatrix ci(n - 1, n - 1);
  for (int a = 1; a <= n - 1; ++a)
    for (int j = 1; j <= n - 1; ++j)
      ci(a - 1, j - 1) = Rational(std::min(a, j) * (n - std::max(a, j)), n);
  return ci;
}

RealMatrix spectral_diagonal(const GapVector& r) {
  const ProbVector p = probs_from_gaps(r);
  const int n = p.dim();
  return (p.values().array() - 1.0 / n).matrix().asDiagonal();
}

bool in_polytope(std::span<const double> r, int n) {
  if (n < 2 || static_cast<int>(r.size()) != n - 1) return false;
  double weighted = 0.0;
  for (std::size_t a = 0; a < r.size(); ++a) {
    if (!std::isfinite(r[a]) || r[a] < -kValidationTol) return false;
    weighted += static_cast<double>(a + 1) * r[a];
  }
  return weighted <= 1.0 + kValidationTol;
}

std::vector<GapVector> polytope_vertices(int n) {
  require_dim(n);
  std::vector<GapVector> vertices;
  vertices.emplace_back(RealVector::Zero(n - 1));
  for (int a = 1; a <= n - 1; ++a) {
    RealVector v = RealVector::Zero(n - 1);
    v(a - 1) = 1.0 / a;
    vertices.emplace_back(std::move(v));
  }
  return vertices;
}

Rational ordered_simplex_volume(int n) {
  require_exact_dim(n);
  // The standard simplex splits into n! congruent chambers, one per ordering.
  const Rational standard = 1 / factorial(n - 1);
  return standard / factorial(n);
}

Rational weighted_simplex_volume(int n) {
  require_exact_dim(n);
  // Edges from the origin vertex to e_a / a.
  RationalMatrix edges(n - 1, n - 1);
  for (int a = 1; a <= n - 1; ++a) edges(a - 1, a - 1) = Rational(1, a);
  return abs(determinant(edges)) / factorial(n - 1);
}

VolumeEstimate estimate_weighted_simplex_volume(int n, std::uint64_t samples, std::uint64_t seed) {
  require_dim(n);
  std::vector<double> box(n - 1);
  for (int a = 1; a <= n - 1; ++a) box[a - 1] = 1.0 / a;
  return rejection_estimate(n - 1, samples, seed, box, [n](const std::vector<double>& x) {
    double w = 0.0;
    for (int a = 1; a <= n - 1; ++a) w += a * x[a - 1];
    return w <= 1.0;
  });
}

VolumeEstimate estimate_ordered_simplex_volume(int n, std::uint64_t samples, std::uint64_t seed) {
  require_dim(n);
  std::vector<double> box(n - 1, 1.0);
  return rejection_estimate(n - 1, samples, seed, box, [n](const std::vector<double>& x) {
    double total = 0.0;
    for (double v : x) total += v;
    const double last = 1.0 - total;
    if (last < 0.0) return false;
    for (int k = 0; k + 1 < n - 1; ++k)
      if (x[k] < x[k + 1]) return false;
    return x[n - 2] >= last;
  });
}

int crossover_index(const GapVector& r) {
  const ProbVector p = probs_from_gaps(r);
  const int n = p.dim();
  const double uniform = 1.0 / n;
  int kstar = 0;
  for (int k = 0; k < n; ++k) {
    const double dev = p[k] - uniform;
    if (std::abs(dev) < kValidationTol) {
      throw CrossoverTieError("p_" + std::to_string(k + 1) +
                              " equals 1/n; crossover index is ambiguous");
    }
    if (dev > 0.0) kstar = k + 1;
  }
  return kstar;
}

}  // namespace gapflag
