#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace risim {

// Counter-based pseudorandom generator. A stream is a (key, counter) pair;
// output i of a stream is a pure function of (key, i), so any stream can be
// replayed or split without touching the others. Keys are derived from
// (master seed, purpose tag, replica index), which makes replica fan-out
// reproducible regardless of scheduling.
namespace rngmix {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + kGolden + (a << 6) + (a >> 2)));
}

constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rngmix

class RngStream {
 public:
  RngStream() : key_(0) {}
  explicit RngStream(std::uint64_t key) : key_(key) {}
  RngStream(std::uint64_t master_seed, std::string_view tag, std::uint64_t replica)
      : key_(rngmix::combine(rngmix::combine(master_seed, rngmix::hash_tag(tag)), replica)) {}

  // Independent child stream; does not advance this stream.
  RngStream split(std::string_view tag, std::uint64_t index = 0) const {
    return RngStream(rngmix::combine(rngmix::combine(key_, rngmix::hash_tag(tag)), index));
  }
  RngStream split(std::uint64_t index) const {
    return RngStream(rngmix::combine(key_, index ^ 0x5851f42d4c957f2dULL));
  }

  std::uint64_t next_u64() { return rngmix::mix64(key_ ^ rngmix::mix64(counter_++ + key_)); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as an argument of log().
  double next_double_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  double exponential(double rate = 1.0) { return -std::log(next_double_open()) / rate; }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    // rejection from the top to avoid modulo bias
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Box-Muller, one value per call; second value discarded for simplicity
    const double u = next_double_open();
    const double v = next_double();
    return mean + sd * std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }

  std::uint64_t poisson(double mean);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Knuth product method below 30, PTRS transformed rejection above.
inline std::uint64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    const double limit = std::exp(-mean);
    std::uint64_t n = 0;
    double prod = next_double_open();
    while (prod > limit) {
      ++n;
      prod *= next_double_open();
    }
    return n;
  }
  // Hormann's PTRS
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = next_double() - 0.5;
    double v = next_double_open();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace risim
