#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "frontflow/errors.hpp"
#include "frontflow/params.hpp"
#include "frontflow/types.hpp"

// Closed-form layer: group velocities, critical prefixes, asymptotic boundary
// speed with its three-regime classification, the balance-equation root used
// as an independent cross-check, and the group-growing chain that mirrors the
// piecewise-linear flow.

namespace frontflow {

// ---------------------------------------------------------------------------
// Group velocity: density-weighted mean speed of a set of types.
// Scale-invariant in the densities (ratio of two degree-1 forms).
// ---------------------------------------------------------------------------
inline double group_velocity(const ValidatedParams& p, const Group& g) {
  if (g.minus == 0 || g.plus == 0) throw EmptyGroup("group velocity needs both sides nonempty");
  double num = 0.0, den = 0.0;
  for (int i = 0; i < p.L(); ++i)
    if (set_has(g.minus, i)) {
      num += p.vminus(i) * p.rho_minus(i);
      den += p.rho_minus(i);
    }
  for (int k = 0; k < p.K(); ++k)
    if (set_has(g.plus, k)) {
      num += p.vplus(k) * p.rho_plus(k);
      den += p.rho_plus(k);
    }
  return num / den;
}

// ---------------------------------------------------------------------------
// Genericity: no group velocity may coincide with an individual velocity.
// ---------------------------------------------------------------------------
struct GenericityViolation {
  Group group;
  double group_velocity = 0.0;
  double offending_velocity = 0.0;
  double gap = 0.0;
};

enum class GenericityMode { Exhaustive, PrefixOnly };

struct GenericityReport {
  GenericityMode mode = GenericityMode::Exhaustive;
  std::uint64_t checked_pairs = 0;
  std::vector<GenericityViolation> violations;

  bool ok() const { return violations.empty(); }
};

namespace detail {

inline void check_group_generic(const ValidatedParams& p, const Group& g,
                                GenericityReport& rep) {
  const double V = group_velocity(p, g);
  auto probe = [&](double v) {
    const double band = kVelocityTol * std::max(1.0, std::abs(v));
    if (std::abs(V - v) <= band)
      rep.violations.push_back({g, V, v, std::abs(V - v)});
  };
  for (int i = 0; i < p.L(); ++i) probe(p.vminus(i));
  for (int k = 0; k < p.K(); ++k) probe(p.vplus(k));
  ++rep.checked_pairs;
}

}  // namespace detail

// Exhaustive over all nonempty (J-, J+) pairs when (2^L-1)(2^K-1) fits the
// budget; otherwise only the prefix groups the analytic layer actually
// consults are checked and the report says so.
inline GenericityReport genericity_check(const ValidatedParams& p,
                                         std::uint64_t budget = 1'000'000) {
  GenericityReport rep;
  const std::uint64_t total =
      ((std::uint64_t{1} << p.L()) - 1) * ((std::uint64_t{1} << p.K()) - 1);
  if (total <= budget) {
    rep.mode = GenericityMode::Exhaustive;
    for (TypeSet jm = 1; jm < (TypeSet{1} << p.L()); ++jm)
      for (TypeSet jp = 1; jp < (TypeSet{1} << p.K()); ++jp)
        detail::check_group_generic(p, Group{jm, jp}, rep);
  } else {
    rep.mode = GenericityMode::PrefixOnly;
    for (int l = 1; l <= p.L(); ++l)
      for (int k = 1; k <= p.K(); ++k)
        detail::check_group_generic(p, prefix_group(l, k), rep);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Prefix profiles f(k) = V(I-, {1..k}) and g(l) = V({1..l}, I+).
// f decreases to its minimum at K1 then increases; g mirrors that at L1.
// ---------------------------------------------------------------------------
struct PrefixProfiles {
  std::vector<double> f;  // k = 1..K
  std::vector<double> g;  // l = 1..L
  int L1 = 1;
  int K1 = 1;
  bool unimodal = true;
};

// Critical prefixes: largest l with v_l- above the prefix group velocity, and
// largest k with v_k+ below it.  Both exist because the fastest type of each
// side always beats the mean.
inline std::pair<int, int> critical_indices(const ValidatedParams& p) {
  int L1 = 1, K1 = 1;
  for (int l = 1; l <= p.L(); ++l)
    if (strictly_less(group_velocity(p, prefix_group(l, p.K())), p.vminus(l - 1),
                      "v_l- vs g(l)"))
      L1 = l;
  for (int k = 1; k <= p.K(); ++k)
    if (strictly_less(p.vplus(k - 1), group_velocity(p, prefix_group(p.L(), k)),
                      "v_k+ vs f(k)"))
      K1 = k;
  return {L1, K1};
}

inline PrefixProfiles prefix_profiles(const ValidatedParams& p) {
  PrefixProfiles out;
  out.f.reserve(p.K());
  out.g.reserve(p.L());
  for (int k = 1; k <= p.K(); ++k) out.f.push_back(group_velocity(p, prefix_group(p.L(), k)));
  for (int l = 1; l <= p.L(); ++l) out.g.push_back(group_velocity(p, prefix_group(l, p.K())));
  auto [L1, K1] = critical_indices(p);
  out.L1 = L1;
  out.K1 = K1;
  for (int k = 1; k < p.K(); ++k) {
    const bool down = strictly_less(out.f[k], out.f[k - 1], "f unimodality");
    if (down != (k + 1 <= K1)) out.unimodal = false;
  }
  for (int l = 1; l < p.L(); ++l) {
    const bool up = strictly_less(out.g[l - 1], out.g[l], "g unimodality");
    if (up != (l + 1 <= L1)) out.unimodal = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Asymptotic boundary speed and regime.
// ---------------------------------------------------------------------------
enum class Regime { Ergodic, TransientPlusLag, TransientMinusLag };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Ergodic: return "ergodic";
    case Regime::TransientPlusLag: return "transient_plus_lag";
    case Regime::TransientMinusLag: return "transient_minus_lag";
  }
  return "?";
}

struct RegimeReport {
  Regime regime = Regime::Ergodic;
  double V = 0.0;  // full-group velocity
  double W = 0.0;  // asymptotic boundary speed
  int L1 = 1;
  int K1 = 1;
};

inline RegimeReport boundary_velocity(const ValidatedParams& p) {
  RegimeReport rep;
  rep.V = group_velocity(p, prefix_group(p.L(), p.K()));
  auto [L1, K1] = critical_indices(p);
  rep.L1 = L1;
  rep.K1 = K1;
  rep.W = group_velocity(p, prefix_group(L1, K1));

  const double vL = p.vminus(p.L() - 1);
  const double vK = p.vplus(p.K() - 1);
  const bool below = strictly_less(vK, rep.V, "v_K+ vs V");
  const bool above = strictly_less(rep.V, vL, "V vs v_L-");

  auto inconsistent = [](const std::string& what) {
    throw InternalInconsistency("regime classification failed: " + what);
  };

  if (below && above) {
    rep.regime = Regime::Ergodic;
    if (L1 != p.L() || K1 != p.K()) inconsistent("ergodic case expects L1=L, K1=K");
  } else if (!below) {
    rep.regime = Regime::TransientPlusLag;
    if (L1 != p.L() || K1 >= p.K()) inconsistent("plus-lag case expects L1=L, K1<K");
    // W must be the minimum of the f-profile and sit below V, below zero.
    double fmin = group_velocity(p, prefix_group(p.L(), 1));
    for (int k = 2; k <= p.K(); ++k)
      fmin = std::min(fmin, group_velocity(p, prefix_group(p.L(), k)));
    if (std::abs(rep.W - fmin) > 1e-12 * std::max(1.0, std::abs(fmin)))
      inconsistent("W is not the f-profile minimum");
    if (!(rep.W < rep.V && rep.V < 0.0)) inconsistent("expected W < V < 0");
  } else {
    rep.regime = Regime::TransientMinusLag;
    if (K1 != p.K() || L1 >= p.L()) inconsistent("minus-lag case expects K1=K, L1<L");
    double gmax = group_velocity(p, prefix_group(1, p.K()));
    for (int l = 2; l <= p.L(); ++l)
      gmax = std::max(gmax, group_velocity(p, prefix_group(l, p.K())));
    if (std::abs(rep.W - gmax) > 1e-12 * std::max(1.0, std::abs(gmax)))
      inconsistent("W is not the g-profile maximum");
    if (!(rep.W > rep.V && rep.V > 0.0)) inconsistent("expected W > V > 0");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Balance-equation root.
//
// Mass flux into the boundary from each side as a function of a trial speed w:
// the minus-side flux decreases in w, the plus-side flux increases, so the
// balance has a unique root.  Independent route to W, used for cross-checks.
// ---------------------------------------------------------------------------
inline double balance_residual(const ValidatedParams& p, double w) {
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < p.L(); ++i)
    if (p.vminus(i) > w) lhs += p.rho_minus(i) * (p.vminus(i) - w);
  for (int k = 0; k < p.K(); ++k)
    if (p.vplus(k) < w) rhs += p.rho_plus(k) * (w - p.vplus(k));
  return lhs - rhs;
}

inline double balance_root(const ValidatedParams& p, double tol = 1e-10) {
  if (!(tol > 0.0)) throw ToleranceNotReached("balance_root needs tol > 0");
  double lo = p.vplus(0);   // residual >= 0 here
  double hi = p.vminus(0);  // residual <= 0 here
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol) return mid;
    (balance_residual(p, mid) > 0.0 ? lo : hi) = mid;
  }
  if (hi - lo <= tol) return 0.5 * (lo + hi);
  throw ToleranceNotReached("bisection did not reach tolerance in 200 iterations");
}

// ---------------------------------------------------------------------------
// Chain of growing groups.
//
// Starting from ({1} | {1}), one type joins per step - the next plus type or
// the next minus type, decided by comparing its speed with the current group
// velocity (ties at zero group velocity take the plus-side branch).  The
// final group's shape reproduces the regime classification.
// ---------------------------------------------------------------------------
enum class ChainMove { Start, AddPlus, AddMinus };

struct ChainStep {
  int b = 1;                         // minus prefix length
  int a = 1;                         // plus prefix length
  double V = 0.0;                    // group velocity of this group
  ChainMove move = ChainMove::Start;

  Group group() const { return prefix_group(b, a); }
};

struct Chain {
  std::vector<ChainStep> steps;  // T1 ... Tfin

  const ChainStep& final_step() const { return steps.back(); }
};

inline Chain build_chain(const ValidatedParams& p) {
  Chain chain;
  int b = 1, a = 1;
  chain.steps.push_back({b, a, group_velocity(p, prefix_group(1, 1)), ChainMove::Start});
  for (;;) {
    const double V = chain.steps.back().V;
    if (a == p.K() && b == p.L()) break;  // full group reached
    ChainMove move;
    if (a == p.K()) {
      if (!strictly_less(V, p.vminus(b), "chain: v_{b+1}- vs V")) break;
      move = ChainMove::AddMinus;
    } else if (b == p.L()) {
      if (!strictly_less(p.vplus(a), V, "chain: v_{a+1}+ vs V")) break;
      move = ChainMove::AddPlus;
    } else if (V <= 0.0) {
      move = strictly_less(p.vplus(a), V, "chain: v_{a+1}+ vs V") ? ChainMove::AddPlus
                                                                  : ChainMove::AddMinus;
    } else {
      move = strictly_less(V, p.vminus(b), "chain: v_{b+1}- vs V") ? ChainMove::AddMinus
                                                                   : ChainMove::AddPlus;
    }
    if (move == ChainMove::AddPlus)
      ++a;
    else
      ++b;
    chain.steps.push_back({b, a, group_velocity(p, prefix_group(b, a)), move});
  }
  return chain;
}

}  // namespace frontflow
