#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace repulse::rng {

// SplitMix64 finalizer. All randomness in this project flows through this one
// mixing function so that every draw is a pure function of (master seed,
// purpose tag, stream index, position in stream).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;  // SplitMix64 increment
constexpr std::uint64_t kChildSalt = 0xD1B54A32D192ED03ULL;

// Counter-based stream: value i is mix64(key + i*golden), i.e. classic
// SplitMix64 with the key as initial state. Splitting derives a child key from
// the parent key and the child index only, never from the counter, so a node's
// stream depends on its tree label and nothing else (traversal order, thread
// count and sibling workloads cannot perturb it).
class Stream {
 public:
  constexpr explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ + (++ctr_) * kGolden); }

  // Uniform on the open interval (0,1); never returns 0 or 1, so logs are safe.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double exponential() noexcept { return -std::log(uniform()); }

  // Box-Muller with the usual spare-value cache.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  constexpr Stream child(std::uint64_t index) const noexcept {
    return Stream(mix64(key_ + (index + 1) * kChildSalt));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// FNV-1a, used only to fold a purpose tag into a stream key.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Documented stream-key derivation: mix the master seed with the tag hash,
// then advance by the stream index. Independent estimators must use distinct
// tags; parallel samples within one estimator use consecutive indices.
constexpr Stream derive(std::uint64_t master_seed, std::string_view purpose,
                        std::uint64_t index) noexcept {
  return Stream(mix64(mix64(master_seed ^ fnv1a(purpose)) + index * kGolden));
}

}  // namespace repulse::rng
