#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include "interlace_slt/rng.hpp"

namespace risim {

inline constexpr int kMaxDim = 8;

// Site of Z^d. The workspace dimension d is fixed per object at construction;
// containers never bake in a particular d.
struct Point {
  std::array<std::int32_t, kMaxDim> c{};
  std::int32_t dim = 0;

  Point() = default;
  Point(std::initializer_list<std::int32_t> coords);
  static Point zero(int d);
  static Point unit(int d, int axis, std::int32_t value = 1);

  std::int32_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  std::int32_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  bool operator==(const Point& o) const;
  // lexicographic; used for all deterministic tie-breaking
  bool operator<(const Point& o) const;

  Point neighbor(int axis, int step) const;
  double norm2() const;
  double dist2(const Point& o) const;       // Euclidean
  std::int64_t dist2_sq(const Point& o) const;
  std::int32_t dist_linf(const Point& o) const;
  Point operator+(const Point& o) const;
  Point operator-(const Point& o) const;
  std::string str() const;
};

// Coordinate packing into a single 64-bit key. Keys order the same way as
// lexicographic point order, so sorting keys sorts points.
struct PointCodec {
  int dim;
  int bits;            // bits per coordinate
  std::int32_t bound;  // |coordinate| must be < bound

  explicit PointCodec(int d);
  std::uint64_t pack(const Point& p) const;
  Point unpack(std::uint64_t key) const;
  bool in_range(const Point& p) const;
};

struct KeyHash {
  std::size_t operator()(std::uint64_t k) const { return rngmix::mix64(k); }
};

// Finite subset of Z^d with a lazily cached internal boundary.
class LatticeSet {
 public:
  explicit LatticeSet(int dim);
  LatticeSet(int dim, const std::vector<Point>& points);
  LatticeSet(const LatticeSet& o);
  LatticeSet(LatticeSet&& o) noexcept;
  LatticeSet& operator=(const LatticeSet& o);
  LatticeSet& operator=(LatticeSet&& o) noexcept;

  int dim() const { return codec_.dim; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

  bool contains(const Point& p) const;
  bool contains_key(std::uint64_t k) const { return keys_.count(k) != 0; }
  const PointCodec& codec() const { return codec_; }

  // insertion is only allowed before the first boundary query
  void insert(const Point& p);

  std::vector<Point> sorted_points() const;
  const std::unordered_set<std::uint64_t, KeyHash>& keys() const { return keys_; }

  // {x in set : some lattice neighbor of x is outside the set}
  const LatticeSet& internal_boundary() const;

  // max over members of the l-inf distance to `anchor`
  std::int32_t extent_linf(const Point& anchor) const;
  Point centroid_floor() const;
  void bounding_box(Point& lo, Point& hi) const;

  LatticeSet translated(const Point& shift) const;

 private:
  PointCodec codec_;
  std::unordered_set<std::uint64_t, KeyHash> keys_;
  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const LatticeSet> boundary_cache_;
};

LatticeSet ball_set(const Point& center, double radius);
// sites with r_in <= ||x - center||_2 <= r_out
LatticeSet shell_set(const Point& center, double r_in, double r_out);
// sites x with lo[i] <= x[i] < hi[i]
LatticeSet box_set(const Point& lo, const Point& hi);
// sites at Euclidean distance in [d_lo, d_hi] from the set
LatticeSet distance_shell(const LatticeSet& base, double d_lo, double d_hi);
LatticeSet set_union(const LatticeSet& a, const LatticeSet& b);

struct SetMetrics {
  double dist = 0.0;
  double diam_a = 0.0;
  double diam_b = 0.0;
};
SetMetrics set_metrics(const LatticeSet& a, const LatticeSet& b);
double linf_diameter(const LatticeSet& s);

// One point per line, space-separated integers, '#' starts a comment;
// the dimension is inferred from the first point line.
LatticeSet parse_points(std::istream& in);
LatticeSet load_points(const std::string& path);
void write_points(std::ostream& out, const LatticeSet& s);

}  // namespace risim
