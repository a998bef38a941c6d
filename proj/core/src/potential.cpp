#include "interlace_slt/potential.hpp"

#include <algorithm>
#include <cmath>

#include "interlace_slt/parallel.hpp"

namespace risim {

namespace {
enum CellFlag : std::uint8_t { kOut = 0, kFree = 1, kShell = 2, kAbsorb = 3 };
}

struct DirichletGrid::Impl {
  int d;
  Point anchor;
  double radius;
  Point lo;                                 // cube corner
  std::array<std::int32_t, kMaxDim> n{};    // cells per axis
  std::array<std::int64_t, kMaxDim> stride{};
  std::int64_t total = 0;
  std::vector<std::uint8_t> flag;
  std::vector<std::int32_t> free_cells[2];  // by parity (red-black)
  std::vector<std::int64_t> nbr_offsets;    // 2d signed strides
  const LatticeSet* absorbing = nullptr;    // not owned; only used during build
  std::vector<std::int64_t> absorb_cells;   // sorted cell indices of the absorbing set
  mutable double last_residual = 0.0;

  std::int64_t index_of(const Point& p) const {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) {
      const std::int64_t rel = p[i] - lo[i];
      if (rel < 0 || rel >= n[static_cast<std::size_t>(i)]) return -1;
      idx += rel * stride[static_cast<std::size_t>(i)];
    }
    return idx;
  }
  Point point_of(std::int64_t idx) const {
    Point p = Point::zero(d);
    for (int i = 0; i < d; ++i) {
      const auto q = idx / stride[static_cast<std::size_t>(i)];
      p[i] = static_cast<std::int32_t>(q) + lo[i];
      idx -= q * stride[static_cast<std::size_t>(i)];
    }
    return p;
  }

  void solve(std::vector<double>& v, const std::vector<double>* source, double tol,
             std::uint64_t max_sweeps) const;
};

DirichletGrid::DirichletGrid(const LatticeSet& absorbing, double radius, const Point& anchor) {
  impl_ = std::make_unique<Impl>();
  Impl& g = *impl_;
  g.d = anchor.dim;
  g.anchor = anchor;
  g.radius = radius;
  if (radius < 2.0) throw DomainError("DirichletGrid: radius too small");
  const auto r = static_cast<std::int32_t>(std::floor(radius));
  g.lo = Point::zero(g.d);
  std::int64_t total = 1;
  for (int i = 0; i < g.d; ++i) {
    g.lo[i] = anchor[i] - r;
    g.n[static_cast<std::size_t>(i)] = 2 * r + 1;
    total *= g.n[static_cast<std::size_t>(i)];
  }
  for (int i = g.d - 1; i >= 0; --i) {
    g.stride[static_cast<std::size_t>(i)] =
        (i == g.d - 1) ? 1 : g.stride[static_cast<std::size_t>(i + 1)] * g.n[static_cast<std::size_t>(i + 1)];
  }
  g.total = total;
  for (int i = 0; i < g.d; ++i) {
    g.nbr_offsets.push_back(+g.stride[static_cast<std::size_t>(i)]);
    g.nbr_offsets.push_back(-g.stride[static_cast<std::size_t>(i)]);
  }

  g.flag.assign(static_cast<std::size_t>(total), kOut);
  const double r2 = radius * radius;

  // classify cells: inside-ball, then shell = inside with an outside neighbor
  Point p = g.lo;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    if (static_cast<double>(p.dist2_sq(anchor)) <= r2) g.flag[static_cast<std::size_t>(idx)] = kFree;
    // odometer increment over the cube
    for (int i = g.d - 1; i >= 0; --i) {
      if (++p[i] < g.lo[i] + g.n[static_cast<std::size_t>(i)]) break;
      p[i] = g.lo[i];
    }
  }
  p = g.lo;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    if (g.flag[static_cast<std::size_t>(idx)] == kFree) {
      bool shell = false;
      for (int i = 0; i < g.d && !shell; ++i) {
        const std::int64_t rel = p[i] - g.lo[i];
        if (rel == 0 || rel == g.n[static_cast<std::size_t>(i)] - 1) {
          shell = true;
          break;
        }
        for (int s : {-1, 1}) {
          if (g.flag[static_cast<std::size_t>(idx + s * g.stride[static_cast<std::size_t>(i)])] == kOut) {
            shell = true;
            break;
          }
        }
      }
      if (shell) g.flag[static_cast<std::size_t>(idx)] = kShell;
    }
    for (int i = g.d - 1; i >= 0; --i) {
      if (++p[i] < g.lo[i] + g.n[static_cast<std::size_t>(i)]) break;
      p[i] = g.lo[i];
    }
  }
  for (const auto& q : absorbing.sorted_points()) {
    const std::int64_t idx = g.index_of(q);
    if (idx < 0 || g.flag[static_cast<std::size_t>(idx)] == kOut)
      throw DomainError("DirichletGrid: absorbing set not contained in the ball");
    g.flag[static_cast<std::size_t>(idx)] = kAbsorb;
    g.absorb_cells.push_back(idx);
  }
  std::sort(g.absorb_cells.begin(), g.absorb_cells.end());

  p = g.lo;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    if (g.flag[static_cast<std::size_t>(idx)] == kFree) {
      std::int32_t parity = 0;
      for (int i = 0; i < g.d; ++i) parity += p[i];
      g.free_cells[parity & 1].push_back(static_cast<std::int32_t>(idx));
    }
    for (int i = g.d - 1; i >= 0; --i) {
      if (++p[i] < g.lo[i] + g.n[static_cast<std::size_t>(i)]) break;
      p[i] = g.lo[i];
    }
  }
}

DirichletGrid::~DirichletGrid() = default;
DirichletGrid::DirichletGrid(DirichletGrid&&) noexcept = default;
DirichletGrid& DirichletGrid::operator=(DirichletGrid&&) noexcept = default;

void DirichletGrid::Impl::solve(std::vector<double>& v, const std::vector<double>* source,
                                double tol, std::uint64_t max_sweeps) const {
  const double inv2d = 1.0 / static_cast<double>(2 * d);
  // SOR with the model-problem optimal relaxation for the enclosing cube
  const std::int32_t n_max = *std::max_element(n.begin(), n.begin() + d);
  const double rho_j = std::cos(3.141592653589793 / (n_max + 1));
  const double omega = 2.0 / (1.0 + std::sqrt(1.0 - rho_j * rho_j));

  const bool d3 = (d == 3);
  const std::int64_t s0 = stride[0], s1 = stride[1], s2 = d3 ? stride[2] : 0;

  auto sweep_color = [&](int color) {
    for (const std::int32_t ci : free_cells[color]) {
      const auto i = static_cast<std::size_t>(ci);
      double sum;
      if (d3) {
        sum = v[i + 1] + v[i - 1] + v[i + static_cast<std::size_t>(s1)] +
              v[i - static_cast<std::size_t>(s1)] + v[i + static_cast<std::size_t>(s0)] +
              v[i - static_cast<std::size_t>(s0)];
      } else {
        sum = 0.0;
        for (const auto off : nbr_offsets) sum += v[static_cast<std::size_t>(ci + off)];
      }
      const double b = source ? (*source)[i] : 0.0;
      v[i] += omega * (b + sum * inv2d - v[i]);
    }
  };
  auto residual = [&]() {
    double rmax = 0.0;
    for (int color = 0; color < 2; ++color) {
      for (const std::int32_t ci : free_cells[color]) {
        const auto i = static_cast<std::size_t>(ci);
        double sum;
        if (d3) {
          sum = v[i + 1] + v[i - 1] + v[i + static_cast<std::size_t>(s1)] +
                v[i - static_cast<std::size_t>(s1)] + v[i + static_cast<std::size_t>(s0)] +
                v[i - static_cast<std::size_t>(s0)];
        } else {
          sum = 0.0;
          for (const auto off : nbr_offsets) sum += v[static_cast<std::size_t>(ci + off)];
        }
        const double b = source ? (*source)[i] : 0.0;
        rmax = std::max(rmax, std::fabs(b + sum * inv2d - v[i]));
      }
    }
    return rmax;
  };
  (void)s2;

  const std::uint64_t check_every = 24;
  for (std::uint64_t sweep = 0; sweep < max_sweeps; ++sweep) {
    sweep_color(0);
    sweep_color(1);
    if ((sweep + 1) % check_every == 0 || sweep + 1 == max_sweeps) {
      const double r = residual();
      if (r <= tol) {
        last_residual = r;
        return;
      }
    }
  }
  throw NumericError("DirichletGrid: SOR did not converge within the sweep cap");
}

std::vector<double> DirichletGrid::escape_field() const {
  const Impl& g = *impl_;
  std::vector<double> v(static_cast<std::size_t>(g.total), 0.0);
  for (std::int64_t idx = 0; idx < g.total; ++idx)
    if (g.flag[static_cast<std::size_t>(idx)] == kShell) v[static_cast<std::size_t>(idx)] = 1.0;
  g.solve(v, nullptr, tol, max_sweeps);
  return v;
}

std::vector<double> DirichletGrid::entrance_field(const Point& target) const {
  const Impl& g = *impl_;
  const std::int64_t t = g.index_of(target);
  if (t < 0 || g.flag[static_cast<std::size_t>(t)] != kAbsorb)
    throw DomainError("entrance_field: target is not an absorbing site");
  std::vector<double> v(static_cast<std::size_t>(g.total), 0.0);
  v[static_cast<std::size_t>(t)] = 1.0;
  g.solve(v, nullptr, tol, max_sweeps);
  return v;
}

std::vector<double> DirichletGrid::green_from(const Point& start) const {
  const Impl& g = *impl_;
  const std::int64_t s = g.index_of(start);
  if (s < 0 || g.flag[static_cast<std::size_t>(s)] != kFree)
    throw DomainError("green_from: start must be a free site of the ball");
  std::vector<double> v(static_cast<std::size_t>(g.total), 0.0);
  std::vector<double> src(static_cast<std::size_t>(g.total), 0.0);
  src[static_cast<std::size_t>(s)] = 1.0;
  g.solve(v, &src, tol, max_sweeps);
  return v;
}

double DirichletGrid::value_at(const std::vector<double>& field, const Point& p) const {
  const std::int64_t idx = impl_->index_of(p);
  if (idx < 0) throw DomainError("value_at: point outside the grid");
  return field[static_cast<std::size_t>(idx)];
}

bool DirichletGrid::in_ball(const Point& p) const {
  const std::int64_t idx = impl_->index_of(p);
  return idx >= 0 && impl_->flag[static_cast<std::size_t>(idx)] != kOut;
}

bool DirichletGrid::is_free(const Point& p) const {
  const std::int64_t idx = impl_->index_of(p);
  return idx >= 0 && impl_->flag[static_cast<std::size_t>(idx)] == kFree;
}

double DirichletGrid::last_residual() const { return impl_->last_residual; }
int DirichletGrid::dim() const { return impl_->d; }
const Point& DirichletGrid::anchor() const { return impl_->anchor; }
double DirichletGrid::radius() const { return impl_->radius; }

double HarmonicField::at(const Point& p) const { return grid->value_at(values, p); }

void DirichletGrid::set_value(std::vector<double>& field, const Point& p, double v) const {
  const std::int64_t idx = impl_->index_of(p);
  if (idx < 0) throw DomainError("set_value: point outside the grid");
  field[static_cast<std::size_t>(idx)] = v;
}

HarmonicField harmonic_solve(const LatticeSet& K, double outer_radius, const Point& anchor) {
  HarmonicField out;
  out.grid = std::make_shared<DirichletGrid>(K, outer_radius, anchor);
  out.values = out.grid->escape_field();
  out.residual = out.grid->last_residual();
  // K sites carry zero from the solve; replace with the one-step escape value,
  // which is the h extension the contract asks for (absorption from step one).
  const int d = out.grid->dim();
  const double inv2d = 1.0 / static_cast<double>(2 * d);
  std::vector<std::pair<Point, double>> updates;
  for (const auto& x : K.sorted_points()) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      for (int s : {-1, 1}) {
        const Point y = x.neighbor(a, s);
        if (!K.contains(y) && out.grid->in_ball(y)) acc += out.grid->value_at(out.values, y);
      }
    }
    updates.emplace_back(x, acc * inv2d);
  }
  for (const auto& [x, v] : updates) out.grid->set_value(out.values, x, v);
  return out;
}

namespace {

std::vector<double> extrapolate_sites(const std::vector<std::vector<double>>& per_radius,
                                      const std::vector<double>& radii, int d) {
  // least-squares fit of a + b * R^-(d-2) per site; returns the a's
  const std::size_t n_sites = per_radius.front().size();
  const std::size_t m = radii.size();
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) t[j] = std::pow(radii[j], -(d - 2));
  double st = 0.0, stt = 0.0;
  for (auto v : t) {
    st += v;
    stt += v * v;
  }
  const double md = static_cast<double>(m);
  const double det = md * stt - st * st;
  std::vector<double> out(n_sites);
  for (std::size_t i = 0; i < n_sites; ++i) {
    double sy = 0.0, sty = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      sy += per_radius[j][i];
      sty += t[j] * per_radius[j][i];
    }
    const double a = (stt * sy - st * sty) / det;
    out[i] = std::clamp(a, 0.0, 1.0);
  }
  return out;
}

}  // namespace

std::vector<double> EquilibriumData::normalized() const {
  std::vector<double> out(escape_prob);
  if (capacity <= 0.0) return out;
  for (auto& v : out) v /= capacity;
  return out;
}

EquilibriumData equilibrium_at_radius(const LatticeSet& K, double radius, const Point& anchor) {
  EquilibriumData eq;
  eq.method = EstimationMethod::linear_solve;
  if (K.empty()) return eq;
  const int d = K.dim();
  DirichletGrid grid(K, radius, anchor);
  const auto field = grid.escape_field();
  eq.sites = K.internal_boundary().sorted_points();
  eq.escape_prob.reserve(eq.sites.size());
  const double inv2d = 1.0 / static_cast<double>(2 * d);
  for (const auto& x : eq.sites) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      for (int s : {-1, 1}) {
        const Point y = x.neighbor(a, s);
        if (!K.contains(y) && grid.in_ball(y)) acc += grid.value_at(field, y);
      }
    }
    eq.escape_prob.push_back(acc * inv2d);
  }
  eq.stderr_site.assign(eq.sites.size(), 0.0);
  for (auto v : eq.escape_prob) eq.capacity += v;
  return eq;
}

EquilibriumData equilibrium_and_capacity(const LatticeSet& K, EstimationMethod method,
                                         const WalkConfig& cfg, const EquilibriumOptions& opts) {
  cfg.validate();
  EquilibriumData eq;
  eq.method = method;
  if (K.empty()) return eq;
  if (K.dim() != cfg.dim) throw DomainError("equilibrium_and_capacity: dimension mismatch");
  const Point anchor = K.centroid_floor();
  const double extent = static_cast<double>(K.extent_linf(anchor));

  if (method == EstimationMethod::linear_solve) {
    std::vector<double> radii = opts.radii;
    if (radii.empty()) {
      const double r0 = std::max(25.0, 2.0 * extent + 5.0);
      radii = {r0, 2.0 * r0, 4.0 * r0};
    }
    if (radii.size() < 2) throw DomainError("equilibrium_and_capacity: need >= 2 radii");
    std::sort(radii.begin(), radii.end());
    for (double r : radii)
      if (r < 2.0 * extent) throw DomainError("equilibrium_and_capacity: radius < 2*extent");

    std::vector<std::vector<double>> per_radius(radii.size());
    parallel_jobs(radii.size(), [&](std::size_t j) {
      per_radius[j] = equilibrium_at_radius(K, radii[j], anchor).escape_prob;
    });
    eq.sites = K.internal_boundary().sorted_points();
    eq.escape_prob = extrapolate_sites(per_radius, radii, K.dim());
    eq.stderr_site.assign(eq.sites.size(), 0.0);
    for (auto v : eq.escape_prob) eq.capacity += v;
    return eq;
  }

  // Monte Carlo: escape frequency per boundary site
  eq.sites = K.internal_boundary().sorted_points();
  const std::size_t n_sites = eq.sites.size();
  const std::uint64_t per_site = std::max<std::uint64_t>(1, opts.samples / n_sites);
  const double radius = cfg.resolve_escape_radius(extent);
  eq.escape_prob.assign(n_sites, 0.0);
  eq.stderr_site.assign(n_sites, 0.0);

  std::vector<std::uint64_t> hits(n_sites, 0);
  parallel_jobs(n_sites, [&](std::size_t s) {
    std::uint64_t h = 0;
    for (std::uint64_t r = 0; r < per_site; ++r) {
      RngStream rng = cfg.seed_stream.split("equilibrium-mc", s * per_site + r);
      if (escape_trial(K, eq.sites[s], radius, anchor, rng, cfg.max_steps)) ++h;
    }
    hits[s] = h;
  });
  double var_sum = 0.0;
  for (std::size_t s = 0; s < n_sites; ++s) {
    const double p = static_cast<double>(hits[s]) / static_cast<double>(per_site);
    eq.escape_prob[s] = p;
    eq.stderr_site[s] = std::sqrt(p * (1.0 - p) / static_cast<double>(per_site));
    eq.capacity += p;
    var_sum += p * (1.0 - p) / static_cast<double>(per_site);
  }
  eq.capacity_stderr = std::sqrt(var_sum);
  return eq;
}

EntranceDistribution entrance_distribution(const LatticeSet& K, const Point& start,
                                           EstimationMethod method, const WalkConfig& cfg,
                                           const EntranceOptions& opts) {
  cfg.validate();
  if (K.empty()) throw DomainError("entrance_distribution: empty target");
  if (K.contains(start)) throw DomainError("entrance_distribution: start inside K");
  const Point anchor = K.centroid_floor();
  const double extent = std::max(static_cast<double>(K.extent_linf(anchor)),
                                 static_cast<double>(start.dist_linf(anchor)));
  const double radius = opts.radius > 0.0 ? opts.radius : cfg.resolve_escape_radius(extent);

  EntranceDistribution out;
  out.sites = K.internal_boundary().sorted_points();
  out.prob.assign(out.sites.size(), 0.0);
  out.stderr_site.assign(out.sites.size(), 0.0);

  if (method == EstimationMethod::linear_solve) {
    DirichletGrid grid(K, radius, anchor);
    const auto green = grid.green_from(start);
    const int d = K.dim();
    const double inv2d = 1.0 / static_cast<double>(2 * d);
    double mass = 0.0;
    for (std::size_t s = 0; s < out.sites.size(); ++s) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a) {
        for (int sg : {-1, 1}) {
          const Point y = out.sites[s].neighbor(a, sg);
          if (grid.is_free(y)) acc += grid.value_at(green, y);
        }
      }
      out.prob[s] = acc * inv2d;
      mass += out.prob[s];
    }
    out.escape_mass = std::max(0.0, 1.0 - mass);
    return out;
  }

  std::vector<std::uint64_t> hits(out.sites.size(), 0);
  std::uint64_t escapes = 0;
  LatticeSet boundary_index(K.dim());
  for (const auto& p : out.sites) boundary_index.insert(p);
  for (std::uint64_t r = 0; r < opts.samples; ++r) {
    RngStream rng = cfg.seed_stream.split("entrance-mc", r);
    const auto entry = walk_until_set_or_escape(start, K, radius, anchor, rng, cfg.max_steps, nullptr);
    if (!entry) {
      ++escapes;
      continue;
    }
    const auto it = std::lower_bound(out.sites.begin(), out.sites.end(), *entry);
    if (it == out.sites.end() || !(*it == *entry))
      throw NumericError("entrance_distribution: entry off the boundary");
    ++hits[static_cast<std::size_t>(it - out.sites.begin())];
  }
  const double n = static_cast<double>(opts.samples);
  for (std::size_t s = 0; s < out.sites.size(); ++s) {
    out.prob[s] = static_cast<double>(hits[s]) / n;
    out.stderr_site[s] = std::sqrt(out.prob[s] * (1.0 - out.prob[s]) / n);
  }
  out.escape_mass = static_cast<double>(escapes) / n;
  return out;
}

}  // namespace risim
