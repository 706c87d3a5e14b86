#pragma once

// Shared helpers for the test suites: compact instance builders, randomized
// generic instances, and brute-force oracles kept independent of the library
// code paths they check.

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "frontflow/analytic.hpp"
#include "frontflow/faces.hpp"
#include "frontflow/params.hpp"
#include "frontflow/types.hpp"

namespace testsupport {

using namespace frontflow;

inline SystemParams make_raw(std::vector<double> vminus, std::vector<double> rminus,
                             std::vector<double> vplus, std::vector<double> rplus) {
  SystemParams p;
  for (size_t i = 0; i < vminus.size(); ++i)
    p.minus.push_back({vminus[i], rminus[i], {}});
  for (size_t k = 0; k < vplus.size(); ++k)
    p.plus.push_back({vplus[k], rplus[k], {}});
  return p;
}

inline ValidatedParams make_params(std::vector<double> vminus, std::vector<double> rminus,
                                   std::vector<double> vplus, std::vector<double> rplus) {
  return validate_params(make_raw(std::move(vminus), std::move(rminus), std::move(vplus),
                                  std::move(rplus)));
}

// The worked two-plus-type instance: still minus phase against plus types at
// -2 and v2, unit densities.  The boundary speed kinks at v2 = -1.
inline ValidatedParams phase_transition_params(double v2 = -0.5) {
  return make_params({0.0}, {1.0}, {-2.0, v2}, {1.0, 1.0});
}

// Random generic instance: ordered velocities bounded away from zero,
// densities in [0.2, 3], resampled until the exhaustive genericity check is
// clean (violations have probability ~0 but would poison branch decisions).
inline ValidatedParams random_generic_instance(std::mt19937_64& rng, int max_L = 5,
                                               int max_K = 5) {
  std::uniform_real_distribution<double> vm(0.1, 3.0), vp(-3.0, -0.1), rho(0.2, 3.0);
  for (;;) {
    const int L = 1 + int(rng() % std::uint64_t(max_L));
    const int K = 1 + int(rng() % std::uint64_t(max_K));
    std::vector<double> vminus(L), vplus(K), rminus(L), rplus(K);
    for (double& v : vminus) v = vm(rng);
    for (double& v : vplus) v = vp(rng);
    std::sort(vminus.begin(), vminus.end(), std::greater<>());
    std::sort(vplus.begin(), vplus.end());
    for (double& r : rminus) r = rho(rng);
    for (double& r : rplus) r = rho(rng);
    SystemParams raw = make_raw(vminus, rminus, vplus, rplus);
    try {
      ValidatedParams p = validate_params(raw);
      if (genericity_check(p).ok()) return p;
    } catch (const Error&) {
      // coincident draw; try again
    }
  }
}

inline ValidatedParams random_instance_with_regime(std::mt19937_64& rng, Regime want,
                                                   int max_L = 5, int max_K = 5) {
  for (;;) {
    ValidatedParams p = random_generic_instance(rng, max_L, max_K);
    if (boundary_velocity(p).regime == want) return p;
  }
}

// Random point of the conservation manifold: additive profile a_i + b_k.
// Half the time the profile is shifted so the smallest coordinate sits at 0.
inline PairMatrix random_x0(std::mt19937_64& rng, int L, int K) {
  std::uniform_real_distribution<double> u(0.0, 2.5);
  std::vector<double> a(L), b(K);
  for (double& v : a) v = u(rng);
  for (double& v : b) v = u(rng);
  if (rng() % 2 == 0) {
    a[int(rng() % std::uint64_t(L))] = 0.0;
    b[int(rng() % std::uint64_t(K))] = 0.0;
  }
  PairMatrix x(L, K);
  for (int i = 0; i < L; ++i)
    for (int k = 0; k < K; ++k) x.at(i, k) = a[i] + b[k];
  return x;
}

// ---------------------------------------------------------------------------
// Brute-force minimal outgoing face, by definition: enumerate every
// appropriate strict superface, keep the ergodic ones whose drift is strictly
// positive on the added pairs, and demand a subset-minimal element.
// ---------------------------------------------------------------------------
inline std::optional<Face> brute_force_minimal_outgoing(const ValidatedParams& p,
                                                        const Face& f) {
  std::vector<Face> outgoing;
  const TypeSet jm = f.blocked_minus(), jp = f.blocked_plus();
  // Subsets of the blocked sets give all appropriate superfaces.
  for (TypeSet sm = jm;; sm = (sm - 1) & jm) {
    for (TypeSet sp = jp;; sp = (sp - 1) & jp) {
      const Face cand = Face::from_blocked(sm, sp);
      if (!(cand == f) && !cand.is_interior() && is_ergodic_face(p, cand)) {
        const PairMatrix v = induced_vector(p, cand);
        bool positive = true;
        for (int i = 0; positive && i < p.L(); ++i)
          for (int k = 0; positive && k < p.K(); ++k)
            if (f.pair_blocked(i, k) && !cand.pair_blocked(i, k) && !(v.at(i, k) > 0.0))
              positive = false;
        if (positive) outgoing.push_back(cand);
      }
      if (sp == 0) break;
    }
    if (sm == 0) break;
  }
  for (const Face& cand : outgoing) {
    bool minimal = true;
    for (const Face& other : outgoing)
      if (!other.contains(cand)) minimal = false;
    if (minimal) return cand;
  }
  return std::nullopt;
}

}  // namespace testsupport
