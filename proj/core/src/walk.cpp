#include "interlace_slt/walk.hpp"

#include <algorithm>
#include <cmath>

namespace risim {

namespace {

struct Stepper {
  Point pos;
  std::int64_t r2 = 0;  // squared Euclidean distance to the anchor
  const Point* anchor;
  int dim;

  Stepper(const Point& start, const Point& a) : pos(start), anchor(&a), dim(start.dim) {
    r2 = start.dist2_sq(a);
  }
  void step(RngStream& rng) {
    const auto move = rng.next_below(static_cast<std::uint64_t>(2 * dim));
    const int axis = static_cast<int>(move >> 1);
    const int dir = (move & 1) ? 1 : -1;
    const std::int64_t rel = pos[axis] - (*anchor)[axis];
    r2 += 2 * rel * dir + 1;
    pos[axis] += dir;
  }
};

double targets_extent(const Point& start, const std::vector<const LatticeSet*>& targets,
                      const Point& anchor) {
  double extent = static_cast<double>(start.dist_linf(anchor));
  for (const auto* t : targets)
    if (t && !t->empty()) extent = std::max(extent, static_cast<double>(t->extent_linf(anchor)));
  return extent;
}

}  // namespace

Trajectory run_walk(const Point& start, const std::vector<const LatticeSet*>& targets,
                    const WalkConfig& cfg, RngStream rng, const Point& anchor) {
  cfg.validate();
  if (start.dim != cfg.dim || anchor.dim != cfg.dim)
    throw DomainError("run_walk: dimension mismatch");
  const double radius = cfg.resolve_escape_radius(targets_extent(start, targets, anchor));
  const double r2_escape = radius * radius;
  if (static_cast<double>(start.dist2_sq(anchor)) > r2_escape)
    throw DomainError("run_walk: start outside the escape ball");

  Trajectory traj;
  traj.anchor = anchor;
  traj.escape_radius = radius;
  traj.hit_records.resize(targets.size());
  traj.points.push_back(start);

  std::size_t unresolved = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t]->contains(start)) traj.hit_records[t].entrance = 0;
    ++unresolved;
  }

  Stepper st(start, anchor);
  for (std::uint64_t k = 1; k <= cfg.max_steps; ++k) {
    st.step(rng);
    traj.points.push_back(st.pos);
    if (static_cast<double>(st.r2) > r2_escape) {
      traj.escaped = true;
      return traj;
    }
    if (unresolved > 0) {
      unresolved = 0;
      for (std::size_t t = 0; t < targets.size(); ++t) {
        auto& rec = traj.hit_records[t];
        if (!rec.returned() && targets[t]->contains(st.pos)) {
          if (!rec.entered()) rec.entrance = static_cast<std::int64_t>(k);
          rec.hitting = static_cast<std::int64_t>(k);
        }
        if (!rec.returned()) ++unresolved;
      }
      if (unresolved == 0 && !targets.empty()) return traj;
    }
  }
  throw WalkTruncationError(std::move(traj));
}

Trajectory run_walk(const Point& start, const std::vector<const LatticeSet*>& targets,
                    const WalkConfig& cfg, RngStream rng) {
  return run_walk(start, targets, cfg, rng, start);
}

bool escape_trial(const LatticeSet& K, const Point& x, double radius, const Point& anchor,
                  RngStream& rng, std::uint64_t max_steps) {
  const double r2_escape = radius * radius;
  Stepper st(x, anchor);
  for (std::uint64_t k = 0; k < max_steps; ++k) {
    st.step(rng);
    if (static_cast<double>(st.r2) > r2_escape) return true;
    if (K.contains(st.pos)) return false;
  }
  throw TruncationError("escape_trial: max_steps exhausted");
}

std::optional<Point> walk_until_set_or_escape(const Point& start, const LatticeSet& absorb,
                                              double radius, const Point& anchor, RngStream& rng,
                                              std::uint64_t max_steps,
                                              std::vector<Point>* path_out) {
  const double r2_escape = radius * radius;
  if (path_out) path_out->push_back(start);
  if (absorb.contains(start)) return start;
  Stepper st(start, anchor);
  for (std::uint64_t k = 0; k < max_steps; ++k) {
    st.step(rng);
    if (path_out) path_out->push_back(st.pos);
    if (absorb.contains(st.pos)) return st.pos;
    if (static_cast<double>(st.r2) > r2_escape) return std::nullopt;
  }
  throw TruncationError("walk_until_set_or_escape: max_steps exhausted");
}

Trajectory conditioned_escape_walk(const LatticeSet& K, const Point& start, const WalkConfig& cfg,
                                   RngStream rng) {
  cfg.validate();
  if (!K.contains(start)) throw DomainError("conditioned_escape_walk: start must lie in K");
  const Point anchor = K.centroid_floor();
  const double radius =
      cfg.resolve_escape_radius(static_cast<double>(K.extent_linf(anchor)));
  const double r2_escape = radius * radius;

  for (std::uint64_t attempt = 0; attempt < cfg.rejection_budget; ++attempt) {
    RngStream attempt_rng = rng.split(attempt);
    Trajectory traj;
    traj.anchor = anchor;
    traj.escape_radius = radius;
    traj.points.push_back(start);
    Stepper st(start, anchor);
    bool rejected = false;
    for (std::uint64_t k = 0; k < cfg.max_steps; ++k) {
      st.step(attempt_rng);
      traj.points.push_back(st.pos);
      if (K.contains(st.pos)) {
        rejected = true;
        break;
      }
      if (static_cast<double>(st.r2) > r2_escape) {
        traj.escaped = true;
        return traj;
      }
    }
    if (!rejected) throw TruncationError("conditioned_escape_walk: max_steps exhausted");
  }
  throw SamplingError("conditioned_escape_walk: rejection budget exhausted");
}

AnnulusEstimate annulus_escape_probability(const Point& center, double s, const Point& x,
                                           int outer_mult, const WalkConfig& cfg,
                                           std::uint64_t replicas) {
  cfg.validate();
  if (outer_mult != 2 && outer_mult != 3)
    throw DomainError("annulus_escape_probability: outer_mult must be 2 or 3");
  if (s < kAnnulusMinScale) throw DomainError("annulus_escape_probability: s below s_1");
  const double rho = x.dist2(center);
  const double outer = outer_mult * s;
  if (rho <= s || rho >= outer)
    throw DomainError("annulus_escape_probability: x outside the open annulus");

  const double s2 = s * s, outer2 = outer * outer;
  std::uint64_t exits = 0;
  for (std::uint64_t r = 0; r < replicas; ++r) {
    RngStream rng = cfg.seed_stream.split("annulus", r);
    Stepper st(x, center);
    for (std::uint64_t k = 0;; ++k) {
      if (k >= cfg.max_steps) throw TruncationError("annulus_escape_probability: max_steps");
      st.step(rng);
      const auto d2 = static_cast<double>(st.r2);
      if (d2 > outer2) {
        ++exits;
        break;
      }
      if (d2 <= s2) break;
    }
  }
  AnnulusEstimate est;
  est.replicas = replicas;
  est.p = static_cast<double>(exits) / static_cast<double>(replicas);
  est.stderr_p = std::sqrt(est.p * (1.0 - est.p) / static_cast<double>(replicas));
  return est;
}

}  // namespace risim
