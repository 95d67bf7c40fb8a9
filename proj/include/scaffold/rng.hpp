#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace scaffold {

// SplitMix64 finalizer. Used to derive independent stream seeds from a master
// seed, so checkpoint-resume replays the exact RNG draws without storing
// mid-stream engine state.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ mix64(a ^ 0x243f6a8885a308d3ull));
  h = mix64(h ^ mix64(b ^ 0x13198a2e03707344ull));
  h = mix64(h ^ mix64(c ^ 0xa4093822299f31d0ull));
  return h;
}

// mt19937_64 with portable uniform draws. The standard distributions are
// implementation-defined, which would break bit-exact replay across stdlibs,
// so the few samplers we need are spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1}, unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  int uniform_index(int n) { return static_cast<int>(uniform_int(static_cast<std::uint64_t>(n))); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace scaffold
