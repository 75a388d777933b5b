#pragma once

// Gap coordinates r_a = p_a - p_{a+1} of an ordered spectrum, the weighted
// simplex they live in, and the sl(n) data (fundamental coweights, Cartan
// matrix) that makes them the natural spectral chart.
//
// Index convention: all vector and matrix indices are 0-based. The gap r_a
// with a = 1..n-1 lives at position a-1, and so does the coweight omega_a.

#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gapflag/types.hpp"

namespace gapflag {

using Rational = boost::multiprecision::cpp_rational;

/// Descending probability vector p_1 >= ... >= p_n >= 0 with unit sum.
class ProbVector {
public:
  /// Validates ordering, non-negativity and normalization; throws
  /// ValidationError naming the violated invariant. Never reorders.
  explicit ProbVector(RealVector p);

  int dim() const { return static_cast<int>(p_.size()); }
  const RealVector& values() const { return p_; }
  double operator[](int k) const { return p_(k); }

private:
  RealVector p_;
};

/// Gap vector r in the weighted simplex R_{n-1} (length n-1).
class GapVector {
public:
  /// Validates r_a >= 0 and sum_a a*r_a <= 1 within kValidationTol.
  explicit GapVector(RealVector r);

  int dim() const { return static_cast<int>(r_.size()) + 1; }
  const RealVector& values() const { return r_; }
  double operator[](int a) const { return r_(a); }

private:
  RealVector r_;
};

/// Diagonals of the fundamental coweights omega_1 ... omega_{n-1}.
struct CoweightBasis {
  int n = 0;
  std::vector<RealVector> diagonals;

  RealMatrix matrix(int a) const { return diagonals.at(a).asDiagonal(); }
};

/// Dense matrix of exact rationals, row-major.
class RationalMatrix {
public:
  RationalMatrix(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& operator()(int i, int j) { return data_[i * cols_ + j]; }
  const Rational& operator()(int i, int j) const { return data_[i * cols_ + j]; }

  RationalMatrix operator*(const RationalMatrix& rhs) const;
  bool is_identity() const;
  RealMatrix to_real() const;

private:
  int rows_;
  int cols_;
  std::vector<Rational> data_;
};

GapVector gaps_from_probs(const ProbVector& p);

/// Sorts descending first, then converts. The only entry point that reorders.
GapVector gaps_from_unsorted(std::span<const double> values);

ProbVector probs_from_gaps(const GapVector& r);

/// M_{ka} = dp_k/dr_a (n x (n-1)); column a is diag(omega_{a+1}).
RealMatrix jacobian_matrix(int n);

CoweightBasis fundamental_coweights(int n);

/// Type A_{n-1} Cartan matrix, integer entries stored as rationals.
RationalMatrix cartan_matrix(int n);
/// (C^{-1})_{aj} = min(a,j)(n - max(a,j))/n with 1-based a, j.
RationalMatrix inverse_cartan(int n);

/// D(r) = sum_a r_a omega_a = diag(p_k - 1/n).
RealMatrix spectral_diagonal(const GapVector& r);

bool in_polytope(std::span<const double> r, int n);
std::vector<GapVector> polytope_vertices(int n);

/// Vol of the ordered probability simplex, in (p_1..p_{n-1}) coordinates.
Rational ordered_simplex_volume(int n);
/// Vol of R_{n-1}, computed from its vertex edge matrix.
Rational weighted_simplex_volume(int n);

struct VolumeEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
};

/// Rejection sampling of R_{n-1} inside [0,1] x [0,1/2] x ... x [0,1/(n-1)].
VolumeEstimate estimate_weighted_simplex_volume(int n, std::uint64_t samples,
                                                std::uint64_t seed);
/// Rejection sampling of the ordered simplex inside [0,1]^{n-1}.
VolumeEstimate estimate_ordered_simplex_volume(int n, std::uint64_t samples,
                                               std::uint64_t seed);

/// k* = max{k : p_k >= 1/n}, a count in 1..n-1. Throws CrossoverTieError when
/// some |p_k - 1/n| < 1e-12.
int crossover_index(const GapVector& r);

}  // namespace gapflag
