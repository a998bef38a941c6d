#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "interlace_slt/errors.hpp"
#include "interlace_slt/lattice.hpp"
#include "interlace_slt/rng.hpp"

namespace risim {

// Finite surrogate for transience: a walk "escapes to infinity" when it
// leaves B(anchor, R_inf). R_inf is escape_radius_factor times the l-inf
// extent of the target configuration around the anchor, unless an absolute
// radius is given. The O((diam/R_inf)^(d-2)) bias this introduces is
// controlled in the oracles by R-sweep extrapolation.
struct WalkConfig {
  int dim = 3;
  double escape_radius_factor = 4.0;
  double escape_radius_abs = 0.0;  // > 0 overrides the factor rule
  std::uint64_t max_steps = 10'000'000;
  std::uint64_t rejection_budget = 10'000;
  RngStream seed_stream;

  void validate() const {
    if (dim < 1 || dim > kMaxDim) throw DomainError("WalkConfig: bad dimension");
    if (escape_radius_factor < 4.0)
      throw DomainError("WalkConfig: escape_radius_factor must be >= 4");
    if (max_steps < 1) throw DomainError("WalkConfig: max_steps must be >= 1");
  }
  double resolve_escape_radius(double extent) const {
    if (escape_radius_abs > 0.0) return escape_radius_abs;
    return escape_radius_factor * std::max(extent, 1.0);
  }
};

struct HitRecord {
  std::int64_t entrance = -1;  // H_K: first index k >= 0 with X_k in K
  std::int64_t hitting = -1;   // tilde-H_K: first index k >= 1 with X_k in K
  bool entered() const { return entrance >= 0; }
  bool returned() const { return hitting >= 0; }
};

// Nearest-neighbor path with hitting-time annotations per target.
struct Trajectory {
  std::vector<Point> points;
  std::vector<HitRecord> hit_records;  // one per target, in input order
  bool escaped = false;                // left B(anchor, R_inf)
  Point anchor;
  double escape_radius = 0.0;
};

struct WalkTruncationError : TruncationError {
  Trajectory partial;
  explicit WalkTruncationError(Trajectory t)
      : TruncationError("run_walk: max_steps exhausted before resolution"),
        partial(std::move(t)) {}
};

// Simple random walk from `start` until every target is resolved (returned-to
// or escape) or escape, recording H and tilde-H per target.
Trajectory run_walk(const Point& start, const std::vector<const LatticeSet*>& targets,
                    const WalkConfig& cfg, RngStream rng, const Point& anchor);

// Convenience overload anchored at the start point.
Trajectory run_walk(const Point& start, const std::vector<const LatticeSet*>& targets,
                    const WalkConfig& cfg, RngStream rng);

// One trial of the escape event from x: true iff the walk reaches
// B(anchor, radius)^c before tilde-H_K. Walks are bit-reproducible per stream.
bool escape_trial(const LatticeSet& K, const Point& x, double radius, const Point& anchor,
                  RngStream& rng, std::uint64_t max_steps);

// Walk from `start` until it either enters `absorb` (returns the entry point)
// or escapes (returns nullopt). Appends the path to `path_out` when non-null.
std::optional<Point> walk_until_set_or_escape(const Point& start, const LatticeSet& absorb,
                                              double radius, const Point& anchor, RngStream& rng,
                                              std::uint64_t max_steps,
                                              std::vector<Point>* path_out);

// P_start[. | tilde-H_K = infinity] by rejection: rerun until the walk reaches
// the escape sphere without revisiting K.
Trajectory conditioned_escape_walk(const LatticeSet& K, const Point& start, const WalkConfig& cfg,
                                   RngStream rng);

// Monte Carlo estimate of the probability that the walk started at x leaves
// B(center, outer_mult*s) before hitting B(center, s).
struct AnnulusEstimate {
  double p = 0.0;
  double stderr_p = 0.0;
  std::uint64_t replicas = 0;
};
AnnulusEstimate annulus_escape_probability(const Point& center, double s, const Point& x,
                                           int outer_mult, const WalkConfig& cfg,
                                           std::uint64_t replicas);

inline constexpr double kAnnulusMinScale = 5.0;  // s_1 default; engineering choice

}  // namespace risim
