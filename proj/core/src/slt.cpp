#include "interlace_slt/slt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace risim {

void DiscreteSpace::validate() const {
  if (weight.empty()) throw DomainError("DiscreteSpace: empty");
  if (!names.empty() && names.size() != weight.size())
    throw DomainError("DiscreteSpace: names/weights size mismatch");
  for (double w : weight)
    if (!(w > 0.0)) throw DomainError("DiscreteSpace: weights must be strictly positive");
  if (cemetery >= 0) {
    if (cemetery >= size()) throw DomainError("DiscreteSpace: cemetery out of range");
    if (std::fabs(weight[static_cast<std::size_t>(cemetery)] - 1.0) > 1e-12)
      throw DomainError("DiscreteSpace: cemetery weight must be 1");
  }
}

int DiscreteSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw DomainError("DiscreteSpace: unknown state " + name);
}

void validate_density_row(const DiscreteSpace& space, std::span<const double> row, double tol) {
  if (static_cast<int>(row.size()) != space.size())
    throw DomainError("density row: size mismatch");
  double mass = 0.0;
  for (int j = 0; j < space.size(); ++j) {
    if (row[static_cast<std::size_t>(j)] < 0.0) throw DomainError("density row: negative entry");
    mass += row[static_cast<std::size_t>(j)] * space.weight[static_cast<std::size_t>(j)];
  }
  if (std::fabs(mass - 1.0) > tol)
    throw DomainError("density row: does not integrate to 1 (mass " + std::to_string(mass) + ")");
}

DenseKernel::DenseKernel(DiscreteSpace space, std::vector<std::vector<double>> rows,
                         std::map<std::string, std::vector<double>> start_rows)
    : space_(std::move(space)), rows_(std::move(rows)), start_rows_(std::move(start_rows)) {
  space_.validate();
  if (static_cast<int>(rows_.size()) != space_.size())
    throw DomainError("DenseKernel: row count mismatch");
  for (const auto& r : rows_) validate_density_row(space_, r);
  for (const auto& [tag, r] : start_rows_) {
    (void)tag;
    validate_density_row(space_, r);
  }
  if (space_.cemetery >= 0) {
    const auto& crow = rows_[static_cast<std::size_t>(space_.cemetery)];
    for (int j = 0; j < space_.size(); ++j) {
      const double expect = (j == space_.cemetery) ? 1.0 : 0.0;
      if (std::fabs(crow[static_cast<std::size_t>(j)] - expect) > 1e-12)
        throw DomainError("DenseKernel: cemetery row must be the indicator of the cemetery");
    }
  }
}

std::span<const double> DenseKernel::start_row(const std::string& tag) const {
  const auto it = start_rows_.find(tag);
  if (it == start_rows_.end()) throw DomainError("DenseKernel: unknown start tag " + tag);
  return it->second;
}

struct PoissonField::Table {
  std::vector<double> weight;
  RngStream seed;
  std::vector<std::vector<double>> heights;
  std::vector<RngStream> streams;

  void extend(int state, std::size_t need) {
    auto& h = heights[static_cast<std::size_t>(state)];
    auto& rng = streams[static_cast<std::size_t>(state)];
    const double rate = weight[static_cast<std::size_t>(state)];
    while (h.size() < need) {
      const double prev = h.empty() ? 0.0 : h.back();
      h.push_back(prev + rng.exponential(rate));
    }
  }
};

PoissonField::PoissonField(const DiscreteSpace& space, RngStream seed) {
  space.validate();
  table_ = std::make_shared<Table>();
  table_->weight = space.weight;
  table_->seed = seed;
  const auto n = static_cast<std::size_t>(space.size());
  table_->heights.resize(n);
  table_->streams.reserve(n);
  for (std::size_t z = 0; z < n; ++z) table_->streams.push_back(seed.split("field-state", z));
  cursor_.assign(n, 0);
}

double PoissonField::height(int state, std::size_t i) {
  table_->extend(state, i + 1);
  return table_->heights[static_cast<std::size_t>(state)][i];
}

double PoissonField::next_height(int state) { return height(state, cursor_[static_cast<std::size_t>(state)]); }

void PoissonField::consume(int state) { ++cursor_[static_cast<std::size_t>(state)]; }

std::size_t PoissonField::consumed_count(int state) const { return cursor_[static_cast<std::size_t>(state)]; }

double field_next_height(PoissonField& field, int state) { return field.next_height(state); }

StepResult slt_step(std::vector<double>& G, PoissonField& field, std::span<const double> row) {
  const int n = static_cast<int>(G.size());
  if (static_cast<int>(row.size()) != n) throw DomainError("slt_step: row size mismatch");
  int chosen = -1;
  long double best = 0.0L;
  for (int z = 0; z < n; ++z) {
    const double r = row[static_cast<std::size_t>(z)];
    if (r <= 0.0) continue;
    // only the lowest unconsumed point matters: higher points of the same
    // state share the denominator and have a larger numerator
    const long double gap =
        static_cast<long double>(field.next_height(z)) - static_cast<long double>(G[static_cast<std::size_t>(z)]);
    const long double cand = gap / static_cast<long double>(r);
    if (chosen < 0 || cand < best) {
      best = cand;
      chosen = z;
    }
  }
  if (chosen < 0) throw DomainError("slt_step: row is identically zero");
  if (best < 0.0L) {
    if (best < -1e-12L)
      throw NumericError("slt_step: negative xi beyond tolerance");
    best = 0.0L;
  }
  StepResult res;
  res.xi = static_cast<double>(best);
  res.chosen = chosen;
  res.height = field.next_height(chosen);
  for (int z = 0; z < n; ++z) G[static_cast<std::size_t>(z)] += res.xi * row[static_cast<std::size_t>(z)];
  // the touched point satisfies G = v exactly; snap to kill rounding drift
  G[static_cast<std::size_t>(chosen)] = res.height;
  field.consume(chosen);
  return res;
}

StepResult slt_step(SLTState& state, PoissonField& field, std::span<const double> row) {
  const StepResult res = slt_step(state.G, field, row);
  state.history.push_back(res.chosen);
  state.xi.push_back(res.xi);
  return res;
}

namespace {

void check_cemetery_reachable(const DenseKernel& kernel) {
  const auto& sp = kernel.space();
  if (sp.cemetery < 0) throw DomainError("cemetery stop rule without a cemetery state");
  const int n = sp.size();
  // reverse reachability from the cemetery over positive transitions
  std::vector<char> reach(static_cast<std::size_t>(n), 0);
  reach[static_cast<std::size_t>(sp.cemetery)] = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int i = 0; i < n; ++i) {
      if (reach[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < n; ++j) {
        if (kernel.density(i, j) > 0.0 && reach[static_cast<std::size_t>(j)]) {
          reach[static_cast<std::size_t>(i)] = 1;
          grew = true;
          break;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (!reach[static_cast<std::size_t>(i)])
      throw DomainError("cemetery unreachable from state " + std::to_string(i));
}

// dense LU solve with partial pivoting; a is row-major n x n, overwritten
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
  std::vector<int> piv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) piv[static_cast<std::size_t>(i)] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::fabs(a[static_cast<std::size_t>(k * n + k)]);
    for (int i = k + 1; i < n; ++i) {
      const double v = std::fabs(a[static_cast<std::size_t>(i * n + k)]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best < 1e-14) throw NumericError("solve_dense: singular system (non-absorbing chain?)");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a[static_cast<std::size_t>(k * n + j)], a[static_cast<std::size_t>(p * n + j)]);
      std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(p)]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a[static_cast<std::size_t>(i * n + k)] / a[static_cast<std::size_t>(k * n + k)];
      a[static_cast<std::size_t>(i * n + k)] = 0.0;
      for (int j = k + 1; j < n; ++j) a[static_cast<std::size_t>(i * n + j)] -= f * a[static_cast<std::size_t>(k * n + j)];
      b[static_cast<std::size_t>(i)] -= f * b[static_cast<std::size_t>(k)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) acc -= a[static_cast<std::size_t>(i * n + j)] * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = acc / a[static_cast<std::size_t>(i * n + i)];
  }
  return x;
}

}  // namespace

SLTState slt_simulate_chain(const DenseKernel& kernel, const std::string& start_tag, StopRule stop,
                            PoissonField& field, std::uint64_t step_budget) {
  const auto& sp = kernel.space();
  if (stop.kind == StopRule::kCemetery) check_cemetery_reachable(kernel);
  SLTState st(sp.size());
  std::span<const double> row = kernel.start_row(start_tag);
  for (std::uint64_t k = 0; k < step_budget; ++k) {
    if (stop.kind == StopRule::kFixedN && st.history.size() >= stop.n) return st;
    const StepResult res = slt_step(st, field, row);
    if (stop.kind == StopRule::kCemetery && res.chosen == sp.cemetery) return st;
    row = kernel.row(res.chosen);
  }
  if (stop.kind == StopRule::kFixedN && st.history.size() >= stop.n) return st;
  throw TruncationError("slt_simulate_chain: step budget exhausted before the cemetery");
}

SequenceResult slt_simulate_sequence(const DenseKernel& kernel,
                                     const std::vector<std::string>& start_tags,
                                     PoissonField& field, std::uint64_t step_budget) {
  const auto& sp = kernel.space();
  check_cemetery_reachable(kernel);
  SequenceResult out;
  out.accumulated_G.assign(static_cast<std::size_t>(sp.size()), 0.0);
  std::uint64_t steps = 0;
  for (const auto& tag : start_tags) {
    SLTState chain(sp.size());
    std::span<const double> row = kernel.start_row(tag);
    for (;;) {
      if (steps++ >= step_budget)
        throw TruncationError("slt_simulate_sequence: step budget exhausted");
      const StepResult res = slt_step(out.accumulated_G, field, row);
      chain.history.push_back(res.chosen);
      chain.xi.push_back(res.xi);
      for (int z = 0; z < sp.size(); ++z)
        chain.G[static_cast<std::size_t>(z)] += res.xi * row[static_cast<std::size_t>(z)];
      if (res.chosen == sp.cemetery) break;
      row = kernel.row(res.chosen);
    }
    out.chains.push_back(std::move(chain));
  }
  return out;
}

DominationOutcome domination_check(const SLTState& state, PoissonField& field,
                                   std::span<const double> threshold) {
  DominationOutcome out;
  if (threshold.size() != state.G.size()) throw DomainError("domination_check: size mismatch");
  out.g_below = true;
  for (std::size_t z = 0; z < state.G.size(); ++z) {
    if (state.G[z] > threshold[z]) {
      out.g_below = false;
      break;
    }
  }
  out.included = true;
  for (int z : state.history) {
    if (field.height(z, 0) > threshold[static_cast<std::size_t>(z)]) {
      out.included = false;
      break;
    }
  }
  return out;
}

std::vector<double> expected_local_time_oracle(const DenseKernel& kernel,
                                               const std::string& start_tag, StopRule horizon) {
  const auto& sp = kernel.space();
  const int n = sp.size();
  // nu_1[z] = P[Z_1 = z]
  std::vector<double> nu(static_cast<std::size_t>(n), 0.0);
  const auto srow = kernel.start_row(start_tag);
  for (int z = 0; z < n; ++z)
    nu[static_cast<std::size_t>(z)] = srow[static_cast<std::size_t>(z)] * sp.weight[static_cast<std::size_t>(z)];

  std::vector<double> visits(static_cast<std::size_t>(n), 0.0);
  if (horizon.kind == StopRule::kFixedN) {
    for (std::uint64_t k = 0; k < horizon.n; ++k) {
      for (int z = 0; z < n; ++z) visits[static_cast<std::size_t>(z)] += nu[static_cast<std::size_t>(z)];
      std::vector<double> next(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < n; ++i) {
        const double m = nu[static_cast<std::size_t>(i)];
        if (m == 0.0) continue;
        for (int j = 0; j < n; ++j) next[static_cast<std::size_t>(j)] += m * kernel.prob(i, j);
      }
      nu = std::move(next);
    }
  } else {
    check_cemetery_reachable(kernel);
    // visits(z) = sum_{k>=1} P[Z_k = z, k <= T_Delta]: solve x = nu1 + Q^T x
    // over the transient states; the cemetery is visited exactly once.
    std::vector<int> transient;
    for (int i = 0; i < n; ++i)
      if (i != sp.cemetery) transient.push_back(i);
    const int m = static_cast<int>(transient.size());
    std::vector<double> a(static_cast<std::size_t>(m * m), 0.0);
    std::vector<double> b(static_cast<std::size_t>(m), 0.0);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const double q = kernel.prob(transient[static_cast<std::size_t>(c)], transient[static_cast<std::size_t>(r)]);
        a[static_cast<std::size_t>(r * m + c)] = (r == c ? 1.0 : 0.0) - q;
      }
      b[static_cast<std::size_t>(r)] = nu[static_cast<std::size_t>(transient[static_cast<std::size_t>(r)])];
    }
    const auto x = solve_dense(std::move(a), std::move(b), m);
    for (int r = 0; r < m; ++r) visits[static_cast<std::size_t>(transient[static_cast<std::size_t>(r)])] = x[static_cast<std::size_t>(r)];
    visits[static_cast<std::size_t>(sp.cemetery)] = 1.0;
  }
  for (int z = 0; z < n; ++z) visits[static_cast<std::size_t>(z)] /= sp.weight[static_cast<std::size_t>(z)];
  return visits;
}

DenseKernel parse_chain_file(std::istream& in) {
  DiscreteSpace sp;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::vector<double>> start_rows;
  std::string cemetery_name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto fail = [&](const std::string& what) {
      throw ConfigError("chain file line " + std::to_string(lineno) + ": " + what);
    };
    if (key == "states") {
      std::string s;
      while (ls >> s) sp.names.push_back(s);
      if (sp.names.empty()) fail("no states listed");
    } else if (key == "weights") {
      double w;
      while (ls >> w) sp.weight.push_back(w);
    } else if (key == "cemetery") {
      if (!(ls >> cemetery_name)) fail("missing cemetery name");
    } else if (key == "row") {
      std::string from;
      if (!(ls >> from)) fail("missing row state");
      std::vector<double> r;
      double v;
      while (ls >> v) r.push_back(v);
      rows.push_back(std::move(r));
      if (sp.names.empty() || sp.names[rows.size() - 1] != from)
        fail("rows must appear in state order");
    } else if (key == "start") {
      std::vector<double> r;
      double v;
      while (ls >> v) r.push_back(v);
      start_rows["start"] = std::move(r);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (sp.names.empty()) throw ConfigError("chain file: no states");
  if (sp.weight.size() != sp.names.size()) throw ConfigError("chain file: weights mismatch");
  if (!cemetery_name.empty()) sp.cemetery = sp.index_of(cemetery_name);
  if (rows.size() != sp.names.size()) throw ConfigError("chain file: need one row per state");
  for (const auto& r : rows)
    if (r.size() != sp.names.size()) throw ConfigError("chain file: row length mismatch");
  if (start_rows.empty()) throw ConfigError("chain file: missing start row");
  try {
    return DenseKernel(std::move(sp), std::move(rows), std::move(start_rows));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("chain file: ") + e.what());
  }
}

DenseKernel load_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open chain file " + path);
  return parse_chain_file(in);
}

}  // namespace risim
