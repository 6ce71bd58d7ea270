#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace qeii {

/// splitmix64 finalizer; used to derive decorrelated seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic sampling helpers over mt19937_64. std::uniform_*_distribution
// is implementation-defined, so every draw in the project goes through this
// class and reruns reproduce outputs bit-exactly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Unbiased integer in [0, bound) via rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) {
      throw std::invalid_argument("RngStream::below: bound must be positive");
    }
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % bound;
    }
  }

  std::size_t index(std::size_t size) { return static_cast<std::size_t>(below(size)); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform01_open_closed() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (engine_() & 1u) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    if (v.empty()) throw std::invalid_argument("RngStream::pick: empty vector");
    return v[index(v.size())];
  }

  /// Derived stream; does not advance this stream.
  RngStream fork(std::uint64_t stream_id) const {
    return RngStream(mix64(seed_ ^ mix64(stream_id)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qeii
