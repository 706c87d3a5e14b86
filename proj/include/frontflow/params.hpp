#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "frontflow/errors.hpp"
#include "frontflow/types.hpp"

namespace frontflow {

// ---------------------------------------------------------------------------
// Model parameters.
//
// Two opposing particle streams: L "minus" types moving right with speeds
// v1- > v2- > ... > vL- >= 0 and K "plus" types moving left with speeds
// v1+ < v2+ < ... < vK+ <= 0.  Each type has a density rho = 1/mean-spacing
// and a spacing distribution.  A zero speed is admitted only for the slowest
// type of a side, and every closing speed vi- - vk+ must stay positive.
// ---------------------------------------------------------------------------

enum class SpacingFamily { Exponential, Uniform, Gamma };

struct SpacingSpec {
  SpacingFamily family = SpacingFamily::Exponential;
  double shape = 1.0;  // gamma only

  friend bool operator==(const SpacingSpec&, const SpacingSpec&) = default;
};

struct TypeSpec {
  double velocity = 0.0;
  double density = 1.0;
  SpacingSpec spacing{};

  friend bool operator==(const TypeSpec&, const TypeSpec&) = default;
};

struct SystemParams {
  std::vector<TypeSpec> minus;  // indexed 1..L in file formats
  std::vector<TypeSpec> plus;   // indexed 1..K

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

// Parameters that passed validate_params(); constructible only through it.
class ValidatedParams {
 public:
  int L() const { return int(p_.minus.size()); }
  int K() const { return int(p_.plus.size()); }

  double vminus(int i) const { return p_.minus[i].velocity; }
  double vplus(int k) const { return p_.plus[k].velocity; }
  double rho_minus(int i) const { return p_.minus[i].density; }
  double rho_plus(int k) const { return p_.plus[k].density; }
  double mu_minus(int i) const { return 1.0 / p_.minus[i].density; }
  double mu_plus(int k) const { return 1.0 / p_.plus[k].density; }
  const SpacingSpec& spacing_minus(int i) const { return p_.minus[i].spacing; }
  const SpacingSpec& spacing_plus(int k) const { return p_.plus[k].spacing; }

  const SystemParams& raw() const { return p_; }

 private:
  friend ValidatedParams validate_params(const SystemParams&);
  explicit ValidatedParams(SystemParams p) : p_(std::move(p)) {}
  SystemParams p_;
};

namespace detail {

inline void check_side(const std::vector<TypeSpec>& side, bool is_minus) {
  const char* name = is_minus ? "minus" : "plus";
  if (side.empty()) throw OrderingViolation(std::string(name) + " side has no types");
  if (side.size() > kMaxTypesPerSide)
    throw OrderingViolation(std::string(name) + " side exceeds supported type count");
  for (size_t j = 0; j < side.size(); ++j) {
    const TypeSpec& t = side[j];
    if (!std::isfinite(t.velocity))
      throw SignViolation(std::string(name) + " velocity not finite");
    if (!(t.density > 0.0) || !std::isfinite(t.density))
      throw DensityViolation(std::string(name) + " density must be positive and finite");
    if (t.spacing.family == SpacingFamily::Gamma &&
        (!(t.spacing.shape > 0.0) || !std::isfinite(t.spacing.shape)))
      throw BadFamilyParams("gamma spacing needs shape > 0");
    const bool last = (j + 1 == side.size());
    if (is_minus) {
      if (t.velocity < 0.0 || (t.velocity == 0.0 && !last))
        throw SignViolation("minus velocities must be positive (zero only for the slowest type)");
    } else {
      if (t.velocity > 0.0 || (t.velocity == 0.0 && !last))
        throw SignViolation("plus velocities must be negative (zero only for the slowest type)");
    }
    if (j > 0) {
      const double prev = side[j - 1].velocity;
      const bool ok = is_minus ? (t.velocity < prev) : (t.velocity > prev);
      if (!ok)
        throw OrderingViolation(std::string(name) +
                                " velocities must be strictly monotone in type index");
    }
  }
}

}  // namespace detail

// Checks every SystemParams invariant and returns the validated wrapper.
inline ValidatedParams validate_params(const SystemParams& raw) {
  detail::check_side(raw.minus, true);
  detail::check_side(raw.plus, false);
  // The slowest pair has the smallest closing speed; orderings make the rest follow.
  const double closing = raw.minus.back().velocity - raw.plus.back().velocity;
  if (!(closing > 0.0))
    throw ClosingSpeedViolation("closing speed v_L- - v_K+ must be positive");
  return ValidatedParams(raw);
}

// Idempotent re-validation.
inline ValidatedParams validate_params(const ValidatedParams& p) { return p; }

}  // namespace frontflow
