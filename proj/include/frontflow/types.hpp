#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "frontflow/errors.hpp"

namespace frontflow {

// Type indices are 0-based in code; CLI/file output uses 1-based labels.
// A TypeSet is a bitmask over the types of one side (bit j <-> type j+1).
using TypeSet = std::uint32_t;

inline constexpr int kMaxTypesPerSide = 30;

inline TypeSet prefix_set(int n) { return n <= 0 ? 0u : (TypeSet{1} << n) - 1u; }
inline int set_size(TypeSet s) { return std::popcount(s); }
inline bool set_has(TypeSet s, int j) { return (s >> j) & 1u; }

// Index of the highest set bit; with the velocity orderings used here that is
// always the slowest type present on either side.
inline int slowest_index(TypeSet s) { return 31 - std::countl_zero(s); }

inline std::vector<int> set_indices(TypeSet s) {
  std::vector<int> out;
  for (int j = 0; s != 0; ++j, s >>= 1)
    if (s & 1u) out.push_back(j);
  return out;
}

// A pair (J-, J+) of type subsets.
struct Group {
  TypeSet minus = 0;
  TypeSet plus = 0;

  friend bool operator==(const Group&, const Group&) = default;
};

inline Group prefix_group(int l, int k) { return Group{prefix_set(l), prefix_set(k)}; }

// ---------------------------------------------------------------------------
// Velocity comparisons
//
// All branch decisions against velocities use a relative band of width
// kVelocityTol; a comparison that lands inside the band is refused instead of
// silently picking a side.
// ---------------------------------------------------------------------------
inline constexpr double kVelocityTol = 1e-9;

inline bool velocities_close(double a, double b, double tol = kVelocityTol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Strict a < b / a > b with a degeneracy band in between.
inline bool strictly_less(double a, double b, const char* what) {
  if (velocities_close(a, b))
    throw DegenerateParameters(std::string("comparison too close to call: ") + what);
  return a < b;
}

// ---------------------------------------------------------------------------
// PairMatrix: a dense L x K array of reals indexed by (minus type, plus type).
// Used for distance vectors, induced vectors and collision-count tables.
// ---------------------------------------------------------------------------
class PairMatrix {
 public:
  PairMatrix() = default;
  PairMatrix(int L, int K, double fill = 0.0) : L_(L), K_(K), a_(size_t(L) * K, fill) {}

  int L() const { return L_; }
  int K() const { return K_; }
  int size() const { return L_ * K_; }

  double& at(int i, int k) { return a_[size_t(i) * K_ + k]; }
  double at(int i, int k) const { return a_[size_t(i) * K_ + k]; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const PairMatrix&, const PairMatrix&) = default;

  PairMatrix& operator*=(double c) {
    for (double& v : a_) v *= c;
    return *this;
  }

  double row_sum(int i) const {
    double s = 0.0;
    for (int k = 0; k < K_; ++k) s += at(i, k);
    return s;
  }
  double col_sum(int k) const {
    double s = 0.0;
    for (int i = 0; i < L_; ++i) s += at(i, k);
    return s;
  }

 private:
  int L_ = 0, K_ = 0;
  std::vector<double> a_;
};

// ---------------------------------------------------------------------------
// Face of the distance orthant.
//
// Stored canonically: the blocked (zero) pairs form a product J- x J+.  The
// interior face is (0, 0).  Construction from an arbitrary zero set takes the
// row/column closure, which is exactly the canonicalization that leaves the
// zero set unchanged on the conservation manifold.
// ---------------------------------------------------------------------------
class Face {
 public:
  Face() = default;  // interior

  static Face interior() { return Face{}; }

  static Face from_blocked(TypeSet jminus, TypeSet jplus) {
    Face f;
    if (jminus != 0 && jplus != 0) {
      f.jminus_ = jminus;
      f.jplus_ = jplus;
    }
    return f;  // an empty product is the interior
  }

  // Row/column closure of an arbitrary set of zero pairs.
  static Face from_zero_pairs(const std::vector<std::pair<int, int>>& zeros) {
    TypeSet jm = 0, jp = 0;
    for (auto [i, k] : zeros) {
      jm |= TypeSet{1} << i;
      jp |= TypeSet{1} << k;
    }
    return from_blocked(jm, jp);
  }

  TypeSet blocked_minus() const { return jminus_; }
  TypeSet blocked_plus() const { return jplus_; }
  Group blocked_group() const { return Group{jminus_, jplus_}; }

  bool is_interior() const { return jminus_ == 0; }
  bool is_origin(int L, int K) const {
    return jminus_ == prefix_set(L) && jplus_ == prefix_set(K);
  }

  bool pair_blocked(int i, int k) const {
    return set_has(jminus_, i) && set_has(jplus_, k);
  }

  // Number of blocked pairs |J-| * |J+|.
  int blocked_count() const { return set_size(jminus_) * set_size(jplus_); }

  // Positive pairs form a superset of another face's positive pairs iff the
  // blocked sets are nested the other way.
  bool contains(const Face& other) const {
    if (other.is_interior()) return is_interior();
    if (is_interior()) return true;
    return (jminus_ & other.jminus_) == jminus_ && (jplus_ & other.jplus_) == jplus_;
  }

  friend bool operator==(const Face&, const Face&) = default;

 private:
  TypeSet jminus_ = 0;
  TypeSet jplus_ = 0;
};

}  // namespace frontflow
