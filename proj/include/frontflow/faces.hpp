#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "frontflow/analytic.hpp"
#include "frontflow/errors.hpp"
#include "frontflow/params.hpp"
#include "frontflow/types.hpp"

// Face calculus on the distance orthant: which faces the distance process can
// linger on (ergodic faces), the mean drift along each face (induced vector),
// the escape route from a non-ergodic face, the face the process ends up on,
// and the weighted-drift computation behind the stability argument.

namespace frontflow {

// Row/column closure of the zero set.  Idempotent; on the conservation
// manifold the closed zero set coincides with the original one.
inline Face canonicalize_face(const std::vector<std::pair<int, int>>& zero_pairs) {
  return Face::from_zero_pairs(zero_pairs);
}

// A face is ergodic iff the slowest blocked type on each side still beats the
// blocked group's mean velocity from its own side.  The interior face is
// tested with the full type sets by convention (the whole-process test).
inline bool is_ergodic_face(const ValidatedParams& p, const Face& f) {
  const Group g = f.is_interior() ? prefix_group(p.L(), p.K()) : f.blocked_group();
  if (g.minus == 0 || g.plus == 0)
    throw EmptyGroup("face ergodicity needs both sides of the blocked set nonempty");
  const double V = group_velocity(p, g);
  const bool minus_ok = strictly_less(V, p.vminus(slowest_index(g.minus)), "V vs v_slowest-");
  const bool plus_ok = strictly_less(p.vplus(slowest_index(g.plus)), V, "v_slowest+ vs V");
  return minus_ok && plus_ok;
}

// Whole-process ergodicity: v_K+ < V < v_L-.
inline bool is_ergodic_process(const ValidatedParams& p) {
  return is_ergodic_face(p, Face::interior());
}

// ---------------------------------------------------------------------------
// Induced vector: mean drift of the distance process along a face.
//
//   pair fully outside the blocked sets:  -vi- + vk+   (free closing)
//   minus side blocked only:               vk+ - Vbar  (boundary runs at Vbar)
//   plus side blocked only:               -vi- + Vbar
//   blocked pair:                          0
// ---------------------------------------------------------------------------
inline PairMatrix induced_vector(const ValidatedParams& p, const Face& f) {
  if (!f.is_interior() && !is_ergodic_face(p, f))
    throw NotErgodicFace("induced vector is defined on ergodic faces only");
  PairMatrix v(p.L(), p.K());
  const TypeSet jm = f.blocked_minus(), jp = f.blocked_plus();
  const double vbar = f.is_interior() ? 0.0 : group_velocity(p, f.blocked_group());
  for (int i = 0; i < p.L(); ++i)
    for (int k = 0; k < p.K(); ++k) {
      const bool bm = set_has(jm, i), bp = set_has(jp, k);
      if (bm && bp)
        v.at(i, k) = 0.0;
      else if (bm)
        v.at(i, k) = p.vplus(k) - vbar;
      else if (bp)
        v.at(i, k) = -p.vminus(i) + vbar;
      else
        v.at(i, k) = -p.vminus(i) + p.vplus(k);
    }
  return v;
}

// ---------------------------------------------------------------------------
// Minimal outgoing face of a non-ergodic face: keep the largest leading run
// of blocked types on each side that still beats the relevant group velocity;
// everything dropped gains strictly positive drift.
// ---------------------------------------------------------------------------
inline Face minimal_outgoing_face(const ValidatedParams& p, const Face& f) {
  if (f.is_interior())
    throw FaceIsErgodic("interior face has no outgoing superface");
  if (is_ergodic_face(p, f)) throw FaceIsErgodic("face is ergodic");
  const std::vector<int> im = set_indices(f.blocked_minus());
  const std::vector<int> mp = set_indices(f.blocked_plus());

  int q = 0;
  TypeSet acc = 0;
  for (size_t n = 0; n < im.size(); ++n) {
    acc |= TypeSet{1} << im[n];
    const double V = group_velocity(p, Group{acc, f.blocked_plus()});
    if (strictly_less(V, p.vminus(im[n]), "outgoing: v_in- vs V")) q = int(n) + 1;
  }
  int r = 0;
  acc = 0;
  for (size_t j = 0; j < mp.size(); ++j) {
    acc |= TypeSet{1} << mp[j];
    const double V = group_velocity(p, Group{f.blocked_minus(), acc});
    if (strictly_less(p.vplus(mp[j]), V, "outgoing: v_mj+ vs V")) r = int(j) + 1;
  }
  if (q == int(im.size()) && r == int(mp.size()))
    throw FaceIsErgodic("face passes the two-sided test");

  TypeSet jm = 0, jp = 0;
  for (int n = 0; n < q; ++n) jm |= TypeSet{1} << im[n];
  for (int j = 0; j < r; ++j) jp |= TypeSet{1} << mp[j];
  return Face::from_blocked(jm, jp);
}

// ---------------------------------------------------------------------------
// Final face: where the flow stays forever.
// ---------------------------------------------------------------------------
struct FinalFace {
  bool at_origin = false;
  Face face;  // meaningful when !at_origin
};

inline FinalFace final_face(const ValidatedParams& p) {
  const RegimeReport rep = boundary_velocity(p);
  FinalFace out;
  switch (rep.regime) {
    case Regime::Ergodic:
      out.at_origin = true;
      return out;
    case Regime::TransientPlusLag:
      out.face = Face::from_blocked(prefix_set(p.L()), prefix_set(rep.K1));
      break;
    case Regime::TransientMinusLag:
      out.face = Face::from_blocked(prefix_set(rep.L1), prefix_set(p.K()));
      break;
  }
  const PairMatrix v = induced_vector(p, out.face);
  for (int i = 0; i < p.L(); ++i)
    for (int k = 0; k < p.K(); ++k)
      if (!out.face.pair_blocked(i, k) && !(v.at(i, k) > 0.0))
        throw InternalInconsistency("final face has a non-positive drift component");
  return out;
}

// ---------------------------------------------------------------------------
// Collision rates of the full process (ergodic case): each type collides at
// rate pi with mu * pi = distance eaten per unit time = |own speed - V|.
// ---------------------------------------------------------------------------
struct CollisionRateSolution {
  double V = 0.0;
  std::vector<double> r_minus, r_plus;    // v_i- - V  and  V - v_k+
  std::vector<double> pi_minus, pi_plus;  // rho * r
};

inline CollisionRateSolution collision_rates(const ValidatedParams& p) {
  CollisionRateSolution s;
  s.V = group_velocity(p, prefix_group(p.L(), p.K()));
  s.r_minus.resize(p.L());
  s.pi_minus.resize(p.L());
  s.r_plus.resize(p.K());
  s.pi_plus.resize(p.K());
  for (int i = 0; i < p.L(); ++i) {
    s.r_minus[i] = p.vminus(i) - s.V;
    s.pi_minus[i] = p.rho_minus(i) * s.r_minus[i];
  }
  for (int k = 0; k < p.K(); ++k) {
    s.r_plus[k] = s.V - p.vplus(k);
    s.pi_plus[k] = p.rho_plus(k) * s.r_plus[k];
  }
  return s;
}

// Quadratic form of the collision-balance matrix: depends on y only through
// its row and column sums, hence nonnegative whenever all means are positive.
inline double gram_quadratic_form(const ValidatedParams& p, const PairMatrix& y) {
  double s = 0.0;
  for (int i = 0; i < p.L(); ++i) {
    const double row = y.row_sum(i);
    s += p.mu_minus(i) * row * row;
  }
  for (int k = 0; k < p.K(); ++k) {
    const double col = y.col_sum(k);
    s += p.mu_plus(k) * col * col;
  }
  return s;
}

// Weighted drift (weights, induced vector) along an ergodic face other than
// the origin.  Strictly negative whenever the whole process is ergodic; that
// uniform negativity is what certifies stability.
inline double lyapunov_drift(const ValidatedParams& p, const Face& f) {
  if (!is_ergodic_process(p))
    throw NotErgodicProcess("drift weights need an ergodic process");
  if (f.is_origin(p.L(), p.K()))
    throw NotErgodicFace("drift is not defined on the origin face");
  if (!f.is_interior() && !is_ergodic_face(p, f))
    throw NotErgodicFace("drift is defined on ergodic faces only");

  const CollisionRateSolution full = collision_rates(p);
  double C = 0.0;
  for (double x : full.pi_minus) C += x;

  const PairMatrix v = induced_vector(p, f);
  double drift = 0.0;
  for (int i = 0; i < p.L(); ++i)
    for (int k = 0; k < p.K(); ++k)
      drift += full.pi_minus[i] * full.pi_plus[k] / C * v.at(i, k);
  return drift;
}

}  // namespace frontflow
