#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "interlace_slt/lattice.hpp"
#include "interlace_slt/walk.hpp"

namespace risim {

// Discrete Dirichlet problems on the Euclidean ball B(anchor, radius):
// the absorbing set sits inside, the internal boundary of the ball acts as
// the escape surface. One grid is reused across many right-hand sides.
class DirichletGrid {
 public:
  DirichletGrid(const LatticeSet& absorbing, double radius, const Point& anchor);
  ~DirichletGrid();
  DirichletGrid(DirichletGrid&&) noexcept;
  DirichletGrid& operator=(DirichletGrid&&) noexcept;

  // h = 1 on the escape shell, h = 0 on the absorbing set, harmonic elsewhere.
  std::vector<double> escape_field() const;
  // h = 1 at `target` (a site of the absorbing set), h = 0 on the rest of the
  // absorbing set and on the shell, harmonic elsewhere: the probability of
  // entering the absorbing set exactly at `target` before escaping.
  std::vector<double> entrance_field(const Point& target) const;
  // expected visits to each free site before absorption, started at `start`
  std::vector<double> green_from(const Point& start) const;

  double value_at(const std::vector<double>& field, const Point& p) const;
  void set_value(std::vector<double>& field, const Point& p, double v) const;
  bool in_ball(const Point& p) const;
  bool is_free(const Point& p) const;

  double last_residual() const;
  int dim() const;
  const Point& anchor() const;
  double radius() const;

  double tol = 1e-10;
  std::uint64_t max_sweeps = 1'000'000;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// h(x) = P_x[H_shell < tilde-H_K] for every site of B(anchor, outer_radius);
// sites of K carry the one-step escape value. Residual <= 1e-10 in max norm.
struct HarmonicField {
  std::shared_ptr<DirichletGrid> grid;
  std::vector<double> values;   // indexed by the grid; use at()
  double residual = 0.0;

  double at(const Point& p) const;
  bool contains(const Point& p) const { return grid->in_ball(p); }
};
HarmonicField harmonic_solve(const LatticeSet& K, double outer_radius, const Point& anchor);

enum class EstimationMethod { monte_carlo, linear_solve };

struct EquilibriumData {
  std::vector<Point> sites;          // internal boundary of K, sorted
  std::vector<double> escape_prob;   // e_K restricted to the sites
  std::vector<double> stderr_site;   // zero for linear_solve
  double capacity = 0.0;
  double capacity_stderr = 0.0;
  EstimationMethod method = EstimationMethod::linear_solve;

  std::vector<double> normalized() const;  // e-bar_K, sums to 1
};

struct EquilibriumOptions {
  // linear_solve: solve at these radii and extrapolate R -> infinity with the
  // known R^-(d-2) leading error; empty means {R0, 2 R0, 4 R0} with
  // R0 = max(25, 2*extent + 5).
  std::vector<double> radii;
  // monte_carlo: total number of walks split evenly over boundary sites
  std::uint64_t samples = 1'000'000;
};

EquilibriumData equilibrium_and_capacity(const LatticeSet& K, EstimationMethod method,
                                         const WalkConfig& cfg,
                                         const EquilibriumOptions& opts = {});

// Single-radius equilibrium measure: consistent with walks truncated at the
// same radius (no extrapolation). Used by the samplers.
EquilibriumData equilibrium_at_radius(const LatticeSet& K, double radius, const Point& anchor);

struct EntranceDistribution {
  std::vector<Point> sites;        // internal boundary of K, sorted
  std::vector<double> prob;        // P_start[X_{H_K} = site, H_K < escape]
  std::vector<double> stderr_site; // zero for linear_solve
  double escape_mass = 0.0;        // deficit: P_start[escape before H_K]
};

struct EntranceOptions {
  double radius = 0.0;  // 0: derive from cfg
  std::uint64_t samples = 100'000;
};

EntranceDistribution entrance_distribution(const LatticeSet& K, const Point& start,
                                           EstimationMethod method, const WalkConfig& cfg,
                                           const EntranceOptions& opts = {});

}  // namespace risim
