#include "interlace_slt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace risim {

Point::Point(std::initializer_list<std::int32_t> coords) {
  if (coords.size() == 0 || coords.size() > kMaxDim)
    throw std::domain_error("Point: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  dim = static_cast<std::int32_t>(coords.size());
  int i = 0;
  for (auto v : coords) c[static_cast<std::size_t>(i++)] = v;
}

Point Point::zero(int d) {
  Point p;
  if (d < 1 || d > kMaxDim) throw std::domain_error("Point::zero: bad dimension");
  p.dim = d;
  return p;
}

Point Point::unit(int d, int axis, std::int32_t value) {
  Point p = zero(d);
  p[axis] = value;
  return p;
}

bool Point::operator==(const Point& o) const {
  if (dim != o.dim) return false;
  for (int i = 0; i < dim; ++i)
    if (c[static_cast<std::size_t>(i)] != o.c[static_cast<std::size_t>(i)]) return false;
  return true;
}

bool Point::operator<(const Point& o) const {
  for (int i = 0; i < dim; ++i) {
    if (c[static_cast<std::size_t>(i)] != o.c[static_cast<std::size_t>(i)])
      return c[static_cast<std::size_t>(i)] < o.c[static_cast<std::size_t>(i)];
  }
  return false;
}

Point Point::neighbor(int axis, int step) const {
  Point p = *this;
  p[axis] += step;
  return p;
}

double Point::norm2() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim; ++i) {
    const std::int64_t v = c[static_cast<std::size_t>(i)];
    s += v * v;
  }
  return std::sqrt(static_cast<double>(s));
}

std::int64_t Point::dist2_sq(const Point& o) const {
  std::int64_t s = 0;
  for (int i = 0; i < dim; ++i) {
    const std::int64_t v = c[static_cast<std::size_t>(i)] - o.c[static_cast<std::size_t>(i)];
    s += v * v;
  }
  return s;
}

double Point::dist2(const Point& o) const { return std::sqrt(static_cast<double>(dist2_sq(o))); }

std::int32_t Point::dist_linf(const Point& o) const {
  std::int32_t m = 0;
  for (int i = 0; i < dim; ++i)
    m = std::max(m, std::abs(c[static_cast<std::size_t>(i)] - o.c[static_cast<std::size_t>(i)]));
  return m;
}

Point Point::operator+(const Point& o) const {
  Point p = *this;
  for (int i = 0; i < dim; ++i) p[i] += o[i];
  return p;
}

Point Point::operator-(const Point& o) const {
  Point p = *this;
  for (int i = 0; i < dim; ++i) p[i] -= o[i];
  return p;
}

std::string Point::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << c[static_cast<std::size_t>(i)];
  os << ')';
  return os.str();
}

PointCodec::PointCodec(int d) : dim(d) {
  if (d < 1 || d > kMaxDim) throw std::domain_error("PointCodec: bad dimension");
  bits = std::min(32, 64 / d);
  bound = static_cast<std::int32_t>(1U << (bits - 1));
}

bool PointCodec::in_range(const Point& p) const {
  for (int i = 0; i < dim; ++i)
    if (p[i] <= -bound || p[i] >= bound) return false;
  return true;
}

std::uint64_t PointCodec::pack(const Point& p) const {
  std::uint64_t key = 0;
  for (int i = 0; i < dim; ++i) {
    const auto enc = static_cast<std::uint64_t>(static_cast<std::int64_t>(p[i]) + bound);
    key = (key << bits) | enc;
  }
  return key;
}

Point PointCodec::unpack(std::uint64_t key) const {
  Point p = Point::zero(dim);
  const std::uint64_t mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
  for (int i = dim - 1; i >= 0; --i) {
    p[i] = static_cast<std::int32_t>(static_cast<std::int64_t>(key & mask) - bound);
    key >>= bits;
  }
  return p;
}

LatticeSet::LatticeSet(int dim) : codec_(dim) {}

LatticeSet::LatticeSet(int dim, const std::vector<Point>& points) : codec_(dim) {
  keys_.reserve(points.size() * 2);
  for (const auto& p : points) insert(p);
}

LatticeSet::LatticeSet(const LatticeSet& o) : codec_(o.codec_), keys_(o.keys_) {
  std::lock_guard<std::mutex> lock(o.cache_mutex_);
  boundary_cache_ = o.boundary_cache_;
}

LatticeSet::LatticeSet(LatticeSet&& o) noexcept
    : codec_(o.codec_), keys_(std::move(o.keys_)), boundary_cache_(std::move(o.boundary_cache_)) {}

LatticeSet& LatticeSet::operator=(const LatticeSet& o) {
  if (this != &o) {
    codec_ = o.codec_;
    keys_ = o.keys_;
    std::lock_guard<std::mutex> lock(o.cache_mutex_);
    boundary_cache_ = o.boundary_cache_;
  }
  return *this;
}

LatticeSet& LatticeSet::operator=(LatticeSet&& o) noexcept {
  if (this != &o) {
    codec_ = o.codec_;
    keys_ = std::move(o.keys_);
    boundary_cache_ = std::move(o.boundary_cache_);
  }
  return *this;
}

bool LatticeSet::contains(const Point& p) const {
  if (p.dim != dim() || !codec_.in_range(p)) return false;
  return keys_.count(codec_.pack(p)) != 0;
}

void LatticeSet::insert(const Point& p) {
  if (p.dim != dim()) throw std::domain_error("LatticeSet::insert: dimension mismatch");
  if (!codec_.in_range(p))
    throw std::domain_error("LatticeSet::insert: coordinate out of packable range");
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (boundary_cache_)
      throw std::logic_error("LatticeSet::insert: set is frozen after boundary query");
  }
  keys_.insert(codec_.pack(p));
}

std::vector<Point> LatticeSet::sorted_points() const {
  std::vector<std::uint64_t> ks(keys_.begin(), keys_.end());
  std::sort(ks.begin(), ks.end());
  std::vector<Point> out;
  out.reserve(ks.size());
  for (auto k : ks) out.push_back(codec_.unpack(k));
  return out;
}

const LatticeSet& LatticeSet::internal_boundary() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!boundary_cache_) {
    auto b = std::make_shared<LatticeSet>(dim());
    for (auto k : keys_) {
      const Point p = codec_.unpack(k);
      bool on_boundary = false;
      for (int a = 0; a < dim() && !on_boundary; ++a) {
        for (int s : {-1, +1}) {
          const Point q = p.neighbor(a, s);
          if (!codec_.in_range(q) || keys_.count(codec_.pack(q)) == 0) {
            on_boundary = true;
            break;
          }
        }
      }
      if (on_boundary) b->keys_.insert(k);
    }
    boundary_cache_ = std::move(b);
  }
  return *boundary_cache_;
}

std::int32_t LatticeSet::extent_linf(const Point& anchor) const {
  std::int32_t m = 0;
  for (auto k : keys_) m = std::max(m, codec_.unpack(k).dist_linf(anchor));
  return m;
}

Point LatticeSet::centroid_floor() const {
  if (empty()) throw std::domain_error("centroid_floor: empty set");
  std::array<std::int64_t, kMaxDim> acc{};
  for (auto k : keys_) {
    const Point p = codec_.unpack(k);
    for (int i = 0; i < dim(); ++i) acc[static_cast<std::size_t>(i)] += p[i];
  }
  Point c = Point::zero(dim());
  const auto n = static_cast<std::int64_t>(size());
  for (int i = 0; i < dim(); ++i) {
    std::int64_t v = acc[static_cast<std::size_t>(i)];
    c[i] = static_cast<std::int32_t>(v >= 0 ? v / n : -((-v + n - 1) / n));
  }
  return c;
}

void LatticeSet::bounding_box(Point& lo, Point& hi) const {
  if (empty()) throw std::domain_error("bounding_box: empty set");
  lo = Point::zero(dim());
  hi = Point::zero(dim());
  bool first = true;
  for (auto k : keys_) {
    const Point p = codec_.unpack(k);
    for (int i = 0; i < dim(); ++i) {
      if (first) {
        lo[i] = hi[i] = p[i];
      } else {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    }
    first = false;
  }
}

LatticeSet LatticeSet::translated(const Point& shift) const {
  LatticeSet out(dim());
  for (auto k : keys_) out.insert(codec_.unpack(k) + shift);
  return out;
}

LatticeSet ball_set(const Point& center, double radius) {
  if (radius < 0.0) throw std::domain_error("ball_set: negative radius");
  const int d = center.dim;
  LatticeSet out(d);
  const auto r = static_cast<std::int32_t>(std::floor(radius));
  const double r2 = radius * radius;
  Point p = Point::zero(d);
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      if (p.dist2_sq(center) <= r2 + 1e-9) out.insert(p);
      return;
    }
    for (std::int32_t v = center[axis] - r; v <= center[axis] + r; ++v) {
      p[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return out;
}

LatticeSet shell_set(const Point& center, double r_in, double r_out) {
  if (r_in < 0.0 || r_out < r_in) throw std::domain_error("shell_set: bad radii");
  const int d = center.dim;
  LatticeSet out(d);
  const auto r = static_cast<std::int32_t>(std::floor(r_out));
  const double lo2 = r_in * r_in, hi2 = r_out * r_out;
  Point p = Point::zero(d);
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      const auto s = static_cast<double>(p.dist2_sq(center));
      if (s >= lo2 - 1e-9 && s <= hi2 + 1e-9) out.insert(p);
      return;
    }
    for (std::int32_t v = center[axis] - r; v <= center[axis] + r; ++v) {
      p[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return out;
}

LatticeSet box_set(const Point& lo, const Point& hi) {
  if (lo.dim != hi.dim) throw std::domain_error("box_set: dimension mismatch");
  const int d = lo.dim;
  LatticeSet out(d);
  Point p = Point::zero(d);
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      out.insert(p);
      return;
    }
    for (std::int32_t v = lo[axis]; v < hi[axis]; ++v) {
      p[axis] = v;
      rec(axis + 1);
    }
  };
  for (int i = 0; i < d; ++i)
    if (lo[i] >= hi[i]) return out;
  rec(0);
  return out;
}

LatticeSet distance_shell(const LatticeSet& base, double d_lo, double d_hi) {
  if (base.empty()) throw std::domain_error("distance_shell: empty base");
  const int d = base.dim();
  Point lo, hi;
  base.bounding_box(lo, hi);
  const auto margin = static_cast<std::int32_t>(std::ceil(d_hi)) + 1;
  LatticeSet out(d);
  const auto pts = base.sorted_points();
  Point p = Point::zero(d);
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      double best = 1e300;
      for (const auto& q : pts) best = std::min(best, static_cast<double>(p.dist2_sq(q)));
      best = std::sqrt(best);
      if (best >= d_lo && best <= d_hi) out.insert(p);
      return;
    }
    for (std::int32_t v = lo[axis] - margin; v <= hi[axis] + margin; ++v) {
      p[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return out;
}

LatticeSet set_union(const LatticeSet& a, const LatticeSet& b) {
  if (a.dim() != b.dim()) throw std::domain_error("set_union: dimension mismatch");
  LatticeSet out(a.dim());
  for (const auto& p : a.sorted_points()) out.insert(p);
  for (const auto& p : b.sorted_points())
    if (!out.contains(p)) out.insert(p);
  return out;
}

double linf_diameter(const LatticeSet& s) {
  if (s.empty()) throw std::domain_error("linf_diameter: empty set");
  Point lo, hi;
  s.bounding_box(lo, hi);
  std::int32_t m = 0;
  for (int i = 0; i < s.dim(); ++i) m = std::max(m, hi[i] - lo[i]);
  return static_cast<double>(m);
}

SetMetrics set_metrics(const LatticeSet& a, const LatticeSet& b) {
  if (a.empty() || b.empty()) throw std::domain_error("set_metrics: empty set");
  if (a.dim() != b.dim()) throw std::domain_error("set_metrics: dimension mismatch");
  SetMetrics m;
  m.diam_a = linf_diameter(a);
  m.diam_b = linf_diameter(b);

  const LatticeSet& small = a.size() <= b.size() ? a : b;
  const LatticeSet& large = a.size() <= b.size() ? b : a;
  for (auto k : small.keys()) {
    if (large.contains_key(k)) {
      m.dist = 0.0;
      return m;
    }
  }
  // disjoint sets: the minimum is attained on the internal boundaries
  const auto pa = a.internal_boundary().sorted_points();
  const auto pb = b.internal_boundary().sorted_points();
  std::int64_t best = -1;
  for (const auto& x : pa) {
    for (const auto& y : pb) {
      const std::int64_t d2 = x.dist2_sq(y);
      if (best < 0 || d2 < best) best = d2;
    }
  }
  m.dist = std::sqrt(static_cast<double>(best));
  return m;
}

LatticeSet parse_points(std::istream& in) {
  std::vector<Point> pts;
  int dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<std::int64_t> vals;
    std::int64_t v;
    while (ls >> v) vals.push_back(v);
    if (vals.empty()) continue;
    if (dim == 0) {
      dim = static_cast<int>(vals.size());
      if (dim < 1 || dim > kMaxDim)
        throw std::runtime_error("parse_points: unsupported dimension at line " +
                                 std::to_string(lineno));
    } else if (static_cast<int>(vals.size()) != dim) {
      throw std::runtime_error("parse_points: inconsistent dimension at line " +
                               std::to_string(lineno));
    }
    Point p = Point::zero(dim);
    for (int i = 0; i < dim; ++i) p[i] = static_cast<std::int32_t>(vals[static_cast<std::size_t>(i)]);
    pts.push_back(p);
  }
  if (dim == 0) throw std::runtime_error("parse_points: no points found");
  return LatticeSet(dim, pts);
}

LatticeSet load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_points: cannot open " + path);
  return parse_points(in);
}

void write_points(std::ostream& out, const LatticeSet& s) {
  for (const auto& p : s.sorted_points()) {
    for (int i = 0; i < s.dim(); ++i) out << (i ? " " : "") << p[i];
    out << "\n";
  }
}

}  // namespace risim
