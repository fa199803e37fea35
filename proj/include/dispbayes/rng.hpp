#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dispbayes {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
  const std::uint64_t p0 = 0xD2511F53ULL * ctr[0];
  const std::uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t out[4] = {hi1 ^ ctr[1] ^ key[0], lo1,
                                hi0 ^ ctr[3] ^ key[1], lo0};
  ctr[0] = out[0];
  ctr[1] = out[1];
  ctr[2] = out[2];
  ctr[3] = out[3];
}

}  // namespace detail

// Identifies the stream an Observations record (or experiment replicate) was
// drawn from; (base, stream) fully determines the sample.
struct SeedRecord {
  std::uint64_t base = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const SeedRecord&, const SeedRecord&) = default;
};

// Derives a child stream id; used to hand each (n, replicate, purpose) its
// own independent stream regardless of scheduling order.
inline std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t id) {
  return detail::splitmix64(parent ^ detail::splitmix64(id + 0xD1B54A32D192ED03ULL));
}

// Counter-based Philox4x32-10 generator. A stream is a 64-bit key; drawing
// advances only a local 64-bit block counter, so substreams never share
// state and replicated runs are reproducible under any thread schedule.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) {
    const std::uint64_t k =
        detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(stream + 0xA0761D6478BD642FULL));
    key_[0] = static_cast<std::uint32_t>(k);
    key_[1] = static_cast<std::uint32_t>(k >> 32);
  }

  explicit CounterRng(const SeedRecord& s) : CounterRng(s.base, s.stream) {}

  // Independent child stream; does not disturb this generator.
  CounterRng substream(std::uint64_t id) const {
    const std::uint64_t k = (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
    CounterRng child(0, 0);
    const std::uint64_t ck = derive_stream(k, id);
    child.key_[0] = static_cast<std::uint32_t>(ck);
    child.key_[1] = static_cast<std::uint32_t>(ck >> 32);
    return child;
  }

  std::uint64_t next_u64() {
    if (pos_ >= 4) refill();
    const std::uint64_t lo = block_[pos_];
    const std::uint64_t hi = block_[pos_ + 1];
    pos_ += 2;
    return (hi << 32) | lo;
  }

  // Uniform strictly inside (0,1) with 53 significant bits.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; second member of each pair is cached.
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }
  result_type operator()() { return next_u64(); }

 private:
  void refill() {
    std::uint32_t ctr[4] = {static_cast<std::uint32_t>(counter_),
                            static_cast<std::uint32_t>(counter_ >> 32), 0, 0};
    std::uint32_t key[2] = {key_[0], key_[1]};
    for (int round = 0; round < 10; ++round) {
      detail::philox_round(ctr, key);
      key[0] += 0x9E3779B9U;
      key[1] += 0xBB67AE85U;
    }
    block_[0] = ctr[0];
    block_[1] = ctr[1];
    block_[2] = ctr[2];
    block_[3] = ctr[3];
    ++counter_;
    pos_ = 0;
  }

  std::uint32_t key_[2] = {0, 0};
  std::uint64_t counter_ = 0;
  std::uint32_t block_[4] = {0, 0, 0, 0};
  int pos_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace dispbayes
