#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace evgrad {

// SplitMix64 finalizer; used to derive independent seeds from (seed, tags...).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(seed);
  for (auto t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags for derive_seed, so training, probe and init streams never collide.
enum class StreamTag : std::uint64_t { policy_init = 1, baseline_init = 2, rollout = 3, probe = 4 };

// A seeded random stream with platform-independent real draws.
//
// std::uniform_real_distribution is implementation defined, so reals are built
// directly from the top 53 bits of the engine output.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t epoch, std::uint64_t index)
      : engine_(derive_seed(seed, {static_cast<std::uint64_t>(tag), epoch, index})) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace evgrad
