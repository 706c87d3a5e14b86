#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "frontflow/analytic.hpp"
#include "frontflow/errors.hpp"
#include "frontflow/faces.hpp"
#include "frontflow/params.hpp"
#include "frontflow/sim.hpp"

// Estimators over simulation output and the theory-vs-simulation report.

namespace frontflow {

struct SpeedEstimate {
  double w_hat = 0.0;
  double stderr_w = 0.0;
  int batches = 0;
};

// Slope of the boundary path after a burn-in fraction, with a batch-means
// standard error over up to 20 batches.
inline SpeedEstimate estimate_boundary_speed(const SimOutput& out, double burn_in = 0.1) {
  const auto& s = out.boundary;
  if (s.empty()) throw InsufficientData("no boundary samples");
  const double t0 = burn_in * s.back().t;
  size_t first = 0;
  while (first < s.size() && s[first].t < t0) ++first;
  const size_t n = s.size() - first;
  if (n < 10) throw InsufficientData("need at least 10 post-burn-in samples");

  SpeedEstimate est;
  const double dt = s.back().t - s[first].t;
  est.w_hat = dt > 0.0 ? (s.back().beta - s[first].beta) / dt : 0.0;

  const int B = int(std::min<size_t>(20, n - 1));
  std::vector<double> slopes;
  for (int b = 0; b < B; ++b) {
    const size_t lo = first + (n - 1) * b / B;
    const size_t hi = first + (n - 1) * (b + 1) / B;
    const double span = s[hi].t - s[lo].t;
    if (span > 0.0) slopes.push_back((s[hi].beta - s[lo].beta) / span);
  }
  est.batches = int(slopes.size());
  if (slopes.size() >= 2) {
    double mean = 0.0;
    for (double v : slopes) mean += v;
    mean /= double(slopes.size());
    double var = 0.0;
    for (double v : slopes) var += (v - mean) * (v - mean);
    var /= double(slopes.size() - 1);
    est.stderr_w = std::sqrt(var / double(slopes.size()));
  }
  return est;
}

struct RateTable {
  PairMatrix per_pair;            // collisions per unit time
  std::vector<double> per_minus;  // row aggregates
  std::vector<double> per_plus;   // column aggregates
  double horizon = 0.0;
};

inline RateTable estimate_collision_rates(const SimOutput& out) {
  if (out.total_collisions == 0 || !(out.final_time > 0.0))
    throw InsufficientData("no collisions recorded");
  RateTable r;
  r.horizon = out.final_time;
  r.per_pair = out.nu;
  r.per_pair *= 1.0 / out.final_time;
  r.per_minus.resize(out.nu.L());
  r.per_plus.resize(out.nu.K());
  // aggregate the exact counts first, divide once
  for (int i = 0; i < out.nu.L(); ++i) r.per_minus[i] = out.nu.row_sum(i) / out.final_time;
  for (int k = 0; k < out.nu.K(); ++k) r.per_plus[k] = out.nu.col_sum(k) / out.final_time;
  return r;
}

// ---------------------------------------------------------------------------
// Theory comparison
// ---------------------------------------------------------------------------
struct Tolerances {
  double w_abs = 0.02;        // |W_hat - W|
  double rate_rel = 0.02;     // ergodic per-type rate identities
  double lag_fraction = 0.01; // lagging pair rate vs busiest pair rate
};

struct RateCheck {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ComparisonReport {
  double W_theory = 0.0;
  double W_hat = 0.0;
  double W_stderr = 0.0;
  Regime regime = Regime::Ergodic;
  std::vector<RateCheck> rate_checks;
  bool pass = false;
};

inline ComparisonReport compare_to_theory(const ValidatedParams& p, const SimOutput& out,
                                          const Tolerances& tol = {}) {
  const RegimeReport rep = boundary_velocity(p);
  const SpeedEstimate est = estimate_boundary_speed(out);
  const RateTable rates = estimate_collision_rates(out);

  ComparisonReport cmp;
  cmp.W_theory = rep.W;
  cmp.W_hat = est.w_hat;
  cmp.W_stderr = est.stderr_w;
  cmp.regime = rep.regime;

  cmp.rate_checks.push_back({"boundary_speed", est.w_hat, rep.W, tol.w_abs,
                             std::abs(est.w_hat - rep.W) <= tol.w_abs});

  if (rep.regime == Regime::Ergodic) {
    // mu * pi must reproduce the distance each type loses to the boundary.
    for (int i = 0; i < p.L(); ++i) {
      const double expect = p.vminus(i) - rep.V;
      const double obs = p.mu_minus(i) * rates.per_minus[i];
      const double band = tol.rate_rel * expect;
      cmp.rate_checks.push_back({"rate_minus_" + std::to_string(i + 1), obs, expect, band,
                                 std::abs(obs - expect) <= band});
    }
    for (int k = 0; k < p.K(); ++k) {
      const double expect = rep.V - p.vplus(k);
      const double obs = p.mu_plus(k) * rates.per_plus[k];
      const double band = tol.rate_rel * expect;
      cmp.rate_checks.push_back({"rate_plus_" + std::to_string(k + 1), obs, expect, band,
                                 std::abs(obs - expect) <= band});
    }
  } else {
    double busiest = 0.0;
    for (int i = 0; i < p.L(); ++i)
      for (int k = 0; k < p.K(); ++k) busiest = std::max(busiest, rates.per_pair.at(i, k));
    const double threshold = tol.lag_fraction * busiest;
    if (rep.regime == Regime::TransientPlusLag) {
      for (int k = rep.K1; k < p.K(); ++k) {
        double worst = 0.0;
        for (int i = 0; i < p.L(); ++i) worst = std::max(worst, rates.per_pair.at(i, k));
        cmp.rate_checks.push_back({"lag_plus_" + std::to_string(k + 1), worst, 0.0,
                                   threshold, worst < threshold});
      }
    } else {
      for (int i = rep.L1; i < p.L(); ++i) {
        double worst = 0.0;
        for (int k = 0; k < p.K(); ++k) worst = std::max(worst, rates.per_pair.at(i, k));
        cmp.rate_checks.push_back({"lag_minus_" + std::to_string(i + 1), worst, 0.0,
                                   threshold, worst < threshold});
      }
    }
  }

  cmp.pass = true;
  for (const RateCheck& c : cmp.rate_checks) cmp.pass = cmp.pass && c.pass;
  return cmp;
}

}  // namespace frontflow
