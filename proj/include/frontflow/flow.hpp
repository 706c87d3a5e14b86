#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "frontflow/analytic.hpp"
#include "frontflow/errors.hpp"
#include "frontflow/faces.hpp"
#include "frontflow/params.hpp"
#include "frontflow/types.hpp"

// Piecewise-linear dynamical system on the distance orthant.  The vector
// field is constant on each face (the face's induced vector, or the minimal
// outgoing face's vector where the face is non-ergodic), so trajectories are
// integrated exactly from event to event: a segment ends when some positive
// coordinate with negative velocity reaches zero.

namespace frontflow {

// Conservation residual max |x11 + xnm - x1m - xn1|.
inline double manifold_residual(const PairMatrix& x) {
  double worst = 0.0;
  for (int n = 1; n < x.L(); ++n)
    for (int m = 1; m < x.K(); ++m)
      worst = std::max(worst,
                       std::abs(x.at(0, 0) + x.at(n, m) - x.at(0, m) - x.at(n, 0)));
  return worst;
}

inline bool on_manifold(const PairMatrix& x, double tol = 1e-9) {
  return manifold_residual(x) <= tol * (1.0 + x.max_abs());
}

namespace detail {

inline Face face_of(const PairMatrix& x, double ztol) {
  std::vector<std::pair<int, int>> zeros;
  for (int i = 0; i < x.L(); ++i)
    for (int k = 0; k < x.K(); ++k)
      if (x.at(i, k) <= ztol) zeros.push_back({i, k});
  return Face::from_zero_pairs(zeros);
}

// Face of x plus the vector field governing the motion there.
inline std::pair<Face, PairMatrix> field_on(const ValidatedParams& p, const Face& fx) {
  if (fx.is_interior() || is_ergodic_face(p, fx)) return {fx, induced_vector(p, fx)};
  const Face out = minimal_outgoing_face(p, fx);
  return {out, induced_vector(p, out)};
}

}  // namespace detail

// Identifies the face of x (coordinates within the zero tolerance count as
// zero) and returns it with the vector field in force there.
inline std::pair<Face, PairMatrix> field_at(const ValidatedParams& p, const PairMatrix& x) {
  if (!on_manifold(x)) throw NotOnManifold("state violates the conservation laws");
  const double ztol = 1e-9 * (1.0 + x.max_abs());
  const Face fx = detail::face_of(x, ztol);
  auto [gov, v] = detail::field_on(p, fx);
  return {fx, std::move(v)};
}

// ---------------------------------------------------------------------------
// Trajectory integration
// ---------------------------------------------------------------------------
enum class FlowStatus { AtOrigin, OnFinalFace, BudgetExhausted };

inline const char* flow_status_name(FlowStatus s) {
  switch (s) {
    case FlowStatus::AtOrigin: return "at_origin";
    case FlowStatus::OnFinalFace: return "on_final_face";
    case FlowStatus::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

struct FlowSegment {
  double t_start = 0.0;
  double duration = 0.0;  // +inf on the terminal final-face segment
  Face face;              // face the segment travels along
  PairMatrix velocity;
  PairMatrix start;
};

struct FlowLimits {
  double max_time = std::numeric_limits<double>::infinity();
  int max_segments = 0;  // 0 -> default 16*K*L
};

struct Trajectory {
  std::vector<FlowSegment> segments;
  FlowStatus status = FlowStatus::BudgetExhausted;
  PairMatrix final_point;
  double final_time = 0.0;
  // First entry times into the closures of the chain's faces (one per chain
  // step, NaN while unreached).  Entries never leave those closures again.
  std::vector<double> chain_hit_times;
  std::string diagnostics;
};

// Point of the integrated trajectory at time t (t past the terminal status
// extrapolates along the final segment, or stays put at the origin).
inline PairMatrix flow_point_at(const Trajectory& traj, double t) {
  for (const FlowSegment& seg : traj.segments) {
    if (t >= seg.t_start && (t < seg.t_start + seg.duration ||
                             &seg == &traj.segments.back())) {
      PairMatrix x = seg.start;
      const double dt = std::isfinite(seg.duration)
                            ? std::min(t - seg.t_start, seg.duration)
                            : t - seg.t_start;
      for (int j = 0; j < x.size(); ++j) x.data()[j] += seg.velocity.data()[j] * dt;
      return x;
    }
  }
  return traj.final_point;
}

inline Trajectory integrate_flow(const ValidatedParams& p, const PairMatrix& x0,
                                 FlowLimits limits = {}) {
  if (x0.L() != p.L() || x0.K() != p.K())
    throw NotOnManifold("initial state has wrong dimensions");
  if (!on_manifold(x0)) throw NotOnManifold("initial state violates the conservation laws");
  const int budget = limits.max_segments > 0 ? limits.max_segments : 16 * p.K() * p.L();
  const double ztol = 1e-9 * (1.0 + x0.max_abs());

  const FinalFace fin = final_face(p);
  const Chain chain = build_chain(p);

  Trajectory traj;
  traj.chain_hit_times.assign(chain.steps.size(),
                              std::numeric_limits<double>::quiet_NaN());

  PairMatrix x = x0;
  for (int i = 0; i < p.L(); ++i)
    for (int k = 0; k < p.K(); ++k)
      if (x.at(i, k) <= ztol) x.at(i, k) = 0.0;
  double t = 0.0;

  auto record_hits = [&](double now) {
    for (size_t r = 0; r < chain.steps.size(); ++r) {
      bool inside = true;
      for (int i = 0; inside && i < chain.steps[r].b; ++i)
        for (int k = 0; inside && k < chain.steps[r].a; ++k)
          if (x.at(i, k) != 0.0) inside = false;
      if (inside) {
        if (std::isnan(traj.chain_hit_times[r])) traj.chain_hit_times[r] = now;
      } else if (!std::isnan(traj.chain_hit_times[r])) {
        throw InternalInconsistency("trajectory left the closure of a chain face");
      }
    }
  };
  record_hits(0.0);

  for (;;) {
    bool all_zero = true;
    for (int j = 0; all_zero && j < x.size(); ++j)
      if (x.data()[j] != 0.0) all_zero = false;
    if (all_zero && fin.at_origin) {
      traj.status = FlowStatus::AtOrigin;
      break;
    }

    const Face fx = detail::face_of(x, ztol);
    auto [gov, v] = detail::field_on(p, fx);

    if (!fin.at_origin && gov == fin.face) {
      traj.segments.push_back(
          {t, std::numeric_limits<double>::infinity(), gov, v, x});
      traj.status = FlowStatus::OnFinalFace;
      break;
    }

    double dt = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p.L(); ++i)
      for (int k = 0; k < p.K(); ++k)
        if (x.at(i, k) > 0.0 && v.at(i, k) < 0.0)
          dt = std::min(dt, x.at(i, k) / -v.at(i, k));
    if (!std::isfinite(dt)) {
      traj.status = FlowStatus::BudgetExhausted;
      traj.diagnostics = "no shrinking coordinate away from the final face";
      break;
    }
    if (t + dt > limits.max_time) {
      const double step = limits.max_time - t;
      traj.segments.push_back({t, step, gov, v, x});
      for (int j = 0; j < x.size(); ++j) x.data()[j] += v.data()[j] * step;
      t = limits.max_time;
      record_hits(t);
      traj.status = FlowStatus::BudgetExhausted;
      traj.diagnostics = "time budget exhausted";
      break;
    }

    traj.segments.push_back({t, dt, gov, v, x});
    for (int j = 0; j < x.size(); ++j) {
      double nx = x.data()[j] + v.data()[j] * dt;
      x.data()[j] = (nx <= ztol) ? 0.0 : nx;
    }
    t += dt;
    record_hits(t);

    if (int(traj.segments.size()) >= budget) {
      traj.status = FlowStatus::BudgetExhausted;
      traj.diagnostics = "segment budget exhausted";
      break;
    }
  }

  traj.final_point = std::move(x);
  traj.final_time = t;
  return traj;
}

}  // namespace frontflow
