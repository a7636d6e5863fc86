#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace fedcost {

// 64-bit FNV-1a, used to fold string ids into stream seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {
constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic splitmix64 stream. Every random quantity in the simulator is
// drawn from a substream keyed by what the draw is for, never by when it
// happens, so reruns and cross-policy runs see identical values.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  static RandomStream derive(std::uint64_t seed, std::string_view tag,
                             std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = detail::splitmix_finalize(seed ^ fnv1a64(tag));
    h = detail::splitmix_finalize(h ^ (a + 0x9e3779b97f4a7c15ull));
    h = detail::splitmix_finalize(h ^ (b + 0x6a09e667f3bcc909ull));
    return RandomStream(h);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return detail::splitmix_finalize(state_);
  }

  // [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  double normal(double mean = 0.0, double stddev = 1.0) {
    // Box-Muller; 1-u keeps the log argument away from zero.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * kPi * u2);
  }

  double exponential(double rate) {
    double u = 1.0 - next_double();
    return -std::log(u) / rate;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::uint64_t state_;
};

}  // namespace fedcost
