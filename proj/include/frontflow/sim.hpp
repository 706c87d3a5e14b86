#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "frontflow/errors.hpp"
#include "frontflow/flow.hpp"
#include "frontflow/params.hpp"
#include "frontflow/types.hpp"

// Event-driven simulation of the infinite-particle annihilation process.
//
// Only the frontier particle of each type is materialized: its coordinate in
// the initial frame (position = coordinate + v * t) plus a lazy stream of
// spacings behind it.  The next collision is the argmin of gap / closing
// speed over all K*L frontier pairs; a collision records the boundary
// position, bumps the pair count and retreats both frontiers by fresh
// spacings.

namespace frontflow {

// ---------------------------------------------------------------------------
// Spacing streams
// ---------------------------------------------------------------------------
class SpacingSampler {
 public:
  SpacingSampler(const SpacingSpec& spec, double mean, std::uint64_t seed)
      : spec_(spec), engine_(seed) {
    if (!(mean > 0.0) || !std::isfinite(mean))
      throw BadFamilyParams("spacing mean must be positive and finite");
    switch (spec.family) {
      case SpacingFamily::Exponential:
        exp_ = std::exponential_distribution<double>(1.0 / mean);
        break;
      case SpacingFamily::Uniform:
        uni_ = std::uniform_real_distribution<double>(0.0, 2.0 * mean);
        break;
      case SpacingFamily::Gamma:
        if (!(spec.shape > 0.0) || !std::isfinite(spec.shape))
          throw BadFamilyParams("gamma spacing needs shape > 0");
        gam_ = std::gamma_distribution<double>(spec.shape, mean / spec.shape);
        break;
    }
  }

  double next() {
    switch (spec_.family) {
      case SpacingFamily::Exponential: return exp_(engine_);
      case SpacingFamily::Uniform: return uni_(engine_);
      case SpacingFamily::Gamma: return gam_(engine_);
    }
    return 0.0;
  }

 private:
  SpacingSpec spec_;
  std::mt19937_64 engine_;
  std::exponential_distribution<double> exp_;
  std::uniform_real_distribution<double> uni_;
  std::gamma_distribution<double> gam_;
};

inline SpacingSampler make_spacing_sampler(const SpacingSpec& spec, double mean,
                                           std::uint64_t seed) {
  return SpacingSampler(spec, mean, seed);
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Stream seed for one type.  Each type owns an isolated stream, so adding a
// type leaves the draws of every other type untouched.
inline std::uint64_t type_stream_seed(std::uint64_t master, bool is_minus, int index) {
  const std::uint64_t tag = is_minus ? 0x6D696E75730000ull : 0x706C75730000ull;
  return detail::splitmix64(master ^ (tag + std::uint64_t(index) + 1));
}

// ---------------------------------------------------------------------------
// Simulation driver
// ---------------------------------------------------------------------------
struct StopRule {
  enum class Kind { Collisions, Time };
  Kind kind = Kind::Collisions;
  double value = 0.0;

  static StopRule collisions(std::uint64_t n) {
    return {Kind::Collisions, double(n)};
  }
  static StopRule time(double t) { return {Kind::Time, t}; }
};

struct SimOptions {
  std::uint64_t seed = 1;
  StopRule stop = StopRule::collisions(100000);
  int checkpoints = 200;
  // Absolute initial gap matrix (already scaled); frontier coordinates are
  // solved from it instead of being drawn.  Must satisfy the conservation laws.
  std::optional<PairMatrix> initial_gaps;
  // Additional exact times at which to sample D(t) and beta(t).
  std::vector<double> sample_times;
  // Coordinate-frame rebase interval, in events.
  std::uint64_t rebase_interval = 1'000'000'000ull;
};

struct BoundarySample {
  double t = 0.0;
  double beta = 0.0;
};

struct DistanceSample {
  double t = 0.0;
  PairMatrix d;
};

struct SimOutput {
  std::vector<BoundarySample> boundary;
  std::vector<DistanceSample> distances;
  PairMatrix nu;  // collision counts per pair (exact integers)
  std::uint64_t total_collisions = 0;
  std::uint64_t seed = 0;
  double final_time = 0.0;
  double final_beta = 0.0;
  std::uint64_t ties_resolved = 0;
  double wall_time_sec = 0.0;  // informational; never written to artifacts
};

inline SimOutput simulate(const ValidatedParams& p, const SimOptions& opt) {
  const auto t_wall0 = std::chrono::steady_clock::now();
  const int L = p.L(), K = p.K();

  if (opt.stop.kind == StopRule::Kind::Collisions && !(opt.stop.value >= 1.0))
    throw StopTooSmall("collision stop must request at least one event");
  if (opt.stop.kind == StopRule::Kind::Time && !(opt.stop.value > 0.0))
    throw StopTooSmall("time stop must be positive");

  std::vector<SpacingSampler> minus_stream, plus_stream;
  minus_stream.reserve(L);
  plus_stream.reserve(K);
  for (int i = 0; i < L; ++i)
    minus_stream.push_back(SpacingSampler(p.spacing_minus(i), p.mu_minus(i),
                                          type_stream_seed(opt.seed, true, i)));
  for (int k = 0; k < K; ++k)
    plus_stream.push_back(SpacingSampler(p.spacing_plus(k), p.mu_plus(k),
                                         type_stream_seed(opt.seed, false, k)));

  // Frontier coordinates in the current frame.
  std::vector<double> Y(L), X(K);
  if (opt.initial_gaps) {
    const PairMatrix& g = *opt.initial_gaps;
    if (g.L() != L || g.K() != K)
      throw NotOnManifold("initial gap matrix has wrong dimensions");
    if (!on_manifold(g)) throw NotOnManifold("initial gaps violate the conservation laws");
    Y[0] = -0.5 * g.at(0, 0);
    for (int k = 0; k < K; ++k) X[k] = g.at(0, k) + Y[0];
    for (int i = 1; i < L; ++i) Y[i] = X[0] - g.at(i, 0);
  } else {
    for (int i = 0; i < L; ++i) Y[i] = -minus_stream[i].next();
    for (int k = 0; k < K; ++k) X[k] = plus_stream[k].next();
  }

  std::vector<double> closing(size_t(L) * K);
  for (int i = 0; i < L; ++i)
    for (int k = 0; k < K; ++k) closing[size_t(i) * K + k] = p.vminus(i) - p.vplus(k);

  SimOutput out;
  out.seed = opt.seed;
  out.nu = PairMatrix(L, K, 0.0);

  double t_frame = 0.0, beta_frame = 0.0;
  double time_offset = 0.0, pos_offset = 0.0;
  std::uint64_t events = 0;

  // Pending exact sample times (absolute), ascending.
  std::vector<double> wanted = opt.sample_times;
  if (opt.stop.kind == StopRule::Kind::Time && opt.checkpoints > 0)
    for (int j = 1; j <= opt.checkpoints; ++j)
      wanted.push_back(opt.stop.value * j / opt.checkpoints);
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  size_t next_wanted = 0;

  const std::uint64_t count_stride =
      opt.stop.kind == StopRule::Kind::Collisions && opt.checkpoints > 0
          ? std::max<std::uint64_t>(1, std::uint64_t(opt.stop.value) / opt.checkpoints)
          : 0;

  auto gap_at = [&](int i, int k, double tf) {
    return (X[k] - Y[i]) - closing[size_t(i) * K + k] * tf;
  };
  auto snapshot = [&](double t_abs) {
    const double tf = t_abs - time_offset;
    PairMatrix d(L, K);
    for (int i = 0; i < L; ++i)
      for (int k = 0; k < K; ++k) d.at(i, k) = gap_at(i, k, tf);
    out.distances.push_back({t_abs, std::move(d)});
    out.boundary.push_back({t_abs, beta_frame + pos_offset});
  };
  // Samples strictly before t_abs see the pre-jump state (left continuity).
  auto flush_samples_through = [&](double t_abs) {
    while (next_wanted < wanted.size() && wanted[next_wanted] <= t_abs)
      snapshot(wanted[next_wanted++]);
  };

  snapshot(0.0);
  while (next_wanted < wanted.size() && wanted[next_wanted] <= 0.0) ++next_wanted;

  for (;;) {
    // Next collision: argmin of gap / closing speed, lexicographic on ties.
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bk = -1;
    for (int i = 0; i < L; ++i)
      for (int k = 0; k < K; ++k) {
        const double tev = (X[k] - Y[i]) / closing[size_t(i) * K + k];
        if (tev < best) {
          if (bi >= 0 && best - tev <= 1e-12 * std::max(1.0, best)) ++out.ties_resolved;
          best = tev;
          bi = i;
          bk = k;
        } else if (tev - best <= 1e-12 * std::max(1.0, best)) {
          ++out.ties_resolved;
        }
      }

    if (best < t_frame - 1e-9 * (1.0 + std::abs(t_frame)))
      throw InternalInconsistency("negative frontier gap: event time went backwards");

    const double t_abs = best + time_offset;
    if (opt.stop.kind == StopRule::Kind::Time && t_abs >= opt.stop.value) {
      flush_samples_through(opt.stop.value);
      t_frame = opt.stop.value - time_offset;
      break;
    }
    flush_samples_through(t_abs);  // pre-jump values at the event instant

    // Collision of (bi, bk): boundary moves there, both frontiers retreat.
    t_frame = std::max(best, t_frame);
    const double pos =
        0.5 * ((Y[bi] + p.vminus(bi) * t_frame) + (X[bk] + p.vplus(bk) * t_frame));
    beta_frame = pos;
    out.nu.at(bi, bk) += 1.0;
    ++events;
    Y[bi] -= minus_stream[bi].next();
    X[bk] += plus_stream[bk].next();

    if (count_stride > 0 && events % count_stride == 0) snapshot(t_abs);

    if (opt.stop.kind == StopRule::Kind::Collisions &&
        events >= std::uint64_t(opt.stop.value)) {
      if (count_stride == 0 || events % count_stride != 0) snapshot(t_abs);
      break;
    }

    if (events % opt.rebase_interval == 0) {
      for (int i = 0; i < L; ++i) Y[i] += p.vminus(i) * t_frame - beta_frame;
      for (int k = 0; k < K; ++k) X[k] += p.vplus(k) * t_frame - beta_frame;
      time_offset += t_frame;
      pos_offset += beta_frame;
      t_frame = 0.0;
      beta_frame = 0.0;
    }
  }

  if (events == 0) throw StopTooSmall("stop rule produced no collision events");

  out.total_collisions = events;
  out.final_time = t_frame + time_offset;
  out.final_beta = beta_frame + pos_offset;
  out.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_wall0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Scaled distance path: start from gaps M*x0, sample D(tM)/M on a time grid.
// ---------------------------------------------------------------------------
struct ScaledPathPoint {
  double t = 0.0;  // flow time (already divided by M)
  PairMatrix d;    // D(tM)/M
};

inline std::vector<ScaledPathPoint> scaled_distance_path(const ValidatedParams& p,
                                                         const PairMatrix& x0, double M,
                                                         const std::vector<double>& t_grid,
                                                         std::uint64_t seed) {
  if (!(M >= 1.0)) throw BadFamilyParams("scale M must be >= 1");
  if (!on_manifold(x0)) throw NotOnManifold("x0 violates the conservation laws");
  PairMatrix gaps = x0;
  gaps *= M;

  double tmax = 0.0;
  SimOptions opt;
  opt.seed = seed;
  opt.checkpoints = 0;
  opt.initial_gaps = std::move(gaps);
  for (double t : t_grid) {
    opt.sample_times.push_back(t * M);
    tmax = std::max(tmax, t * M);
  }
  opt.stop = StopRule::time(tmax > 0.0 ? tmax : 1.0);

  const SimOutput out = simulate(p, opt);
  std::vector<ScaledPathPoint> path;
  path.reserve(out.distances.size());
  for (const DistanceSample& s : out.distances) {
    ScaledPathPoint pt;
    pt.t = s.t / M;
    pt.d = s.d;
    pt.d *= 1.0 / M;
    path.push_back(std::move(pt));
  }
  return path;
}

}  // namespace frontflow
