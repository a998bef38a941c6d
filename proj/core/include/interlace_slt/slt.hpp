#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "interlace_slt/errors.hpp"
#include "interlace_slt/rng.hpp"

namespace risim {

// Finite state space with a strictly positive reference measure and an
// optional absorbing cemetery state of weight one.
struct DiscreteSpace {
  std::vector<std::string> names;
  std::vector<double> weight;
  int cemetery = -1;

  int size() const { return static_cast<int>(weight.size()); }
  void validate() const;
  int index_of(const std::string& name) const;
};

// Markov transition densities with respect to the space's reference measure:
// P[Z_{k+1} = z | Z_k = y] = density(y, z) * weight(z). Start rows implement
// the Z_0 convention: a tag selects the density of Z_1.
class DenseKernel {
 public:
  DenseKernel(DiscreteSpace space, std::vector<std::vector<double>> rows,
              std::map<std::string, std::vector<double>> start_rows);

  const DiscreteSpace& space() const { return space_; }
  double density(int from, int to) const { return rows_[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)]; }
  std::span<const double> row(int from) const { return rows_[static_cast<std::size_t>(from)]; }
  std::span<const double> start_row(const std::string& tag) const;
  const std::map<std::string, std::vector<double>>& start_rows() const { return start_rows_; }

  // transition probability matrix entry: density * weight
  double prob(int from, int to) const { return density(from, to) * space_.weight[static_cast<std::size_t>(to)]; }

 private:
  DiscreteSpace space_;
  std::vector<std::vector<double>> rows_;
  std::map<std::string, std::vector<double>> start_rows_;
};

void validate_density_row(const DiscreteSpace& space, std::span<const double> row,
                          double tol = 1e-12);

// Lazy realization of a Poisson process on (state space) x R_+ with intensity
// mu (x) dv: one ascending height stream per state, extended on demand.
// Copying a field yields independent cursors over the same realization.
class PoissonField {
 public:
  PoissonField(const DiscreteSpace& space, RngStream seed);

  double next_height(int state);              // lowest unconsumed; does not consume
  double height(int state, std::size_t i);    // i-th height of the state's stream
  void consume(int state);                    // advance past the lowest unconsumed
  std::size_t consumed_count(int state) const;
  int size() const { return static_cast<int>(cursor_.size()); }

 private:
  struct Table;
  std::shared_ptr<Table> table_;
  std::vector<std::size_t> cursor_;
};

double field_next_height(PoissonField& field, int state);

// Greedy xi-selection state: accumulated soft local time, chain history and
// the Exp(1) multipliers.
struct SLTState {
  std::vector<double> G;
  std::vector<int> history;
  std::vector<double> xi;

  explicit SLTState(int n_states) : G(static_cast<std::size_t>(n_states), 0.0) {}
};

struct StepResult {
  double xi = 0.0;
  int chosen = -1;
  double height = 0.0;
};

// One selection step: xi is the smallest multiplier t such that the curve
// G + t*row touches an unconsumed field point; only the lowest unconsumed
// point per state can be the touch point. Ties break by state order.
StepResult slt_step(std::vector<double>& G, PoissonField& field, std::span<const double> row);
StepResult slt_step(SLTState& state, PoissonField& field, std::span<const double> row);

struct StopRule {
  enum Kind { kFixedN, kCemetery } kind = kFixedN;
  std::uint64_t n = 1;
  static StopRule fixed(std::uint64_t n) { return {kFixedN, n}; }
  static StopRule cemetery() { return {kCemetery, 0}; }
};

inline constexpr std::uint64_t kDefaultStepBudget = 10'000'000;

SLTState slt_simulate_chain(const DenseKernel& kernel, const std::string& start_tag,
                            StopRule stop, PoissonField& field,
                            std::uint64_t step_budget = kDefaultStepBudget);

struct SequenceResult {
  std::vector<SLTState> chains;
  std::vector<double> accumulated_G;
};

// Simulates one chain per start tag, in order, against the same field; each
// chain runs until the cemetery on top of the accumulated soft local time of
// its predecessors.
SequenceResult slt_simulate_sequence(const DenseKernel& kernel,
                                     const std::vector<std::string>& start_tags,
                                     PoissonField& field,
                                     std::uint64_t step_budget = kDefaultStepBudget);

struct DominationOutcome {
  bool g_below = false;
  bool included = false;
};

// g_below: the final curve lies below the threshold everywhere.
// included: every visited state has a field point under the threshold.
// g_below implies included.
DominationOutcome domination_check(const SLTState& state, PoissonField& field,
                                   std::span<const double> threshold);

// E[sum_{k <= horizon} 1{Z_k = z}] / mu(z), exactly: repeated application of
// the transition operator for fixed n, a linear solve for the cemetery
// horizon.
std::vector<double> expected_local_time_oracle(const DenseKernel& kernel,
                                               const std::string& start_tag, StopRule horizon);

// Chain file: states, weights, kernel rows as a dense matrix, one start row.
DenseKernel parse_chain_file(std::istream& in);
DenseKernel load_chain_file(const std::string& path);

}  // namespace risim
