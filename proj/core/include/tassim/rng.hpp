#pragma once

#include <cstdint>
#include <vector>

namespace tassim {

// Deterministic generator with explicit state. std::mt19937 plus the standard
// distributions would tie trace bytes to the standard library implementation,
// which breaks the byte-identical-trace contract across toolchains, so both
// the generator and the bounded/weighted draws are spelled out here.
struct Rng {
  std::uint64_t state = 0x853c49e6748fea9bull;

  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    state = seed + 0x9e3779b97f4a7c15ull;
    next();
    next();
  }

  // splitmix64 step
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased bounded draw in [0, n) (Lemire's method).
  std::uint64_t bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Inclusive [lo, hi].
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Derive an independent substream (used to give each traffic source its own
  // deterministic stream regardless of event interleaving).
  Rng fork(std::uint64_t stream_id) {
    Rng r;
    r.state = next() ^ (stream_id * 0xd6e8feb86659fd93ull);
    r.next();
    return r;
  }
};

// Integer-weighted discrete sampler over arbitrary values.
struct WeightedTable {
  std::vector<std::int64_t> values;
  std::vector<std::uint64_t> cumulative;  // running weight sums
  std::uint64_t total = 0;

  void add(std::int64_t value, std::uint64_t weight) {
    values.push_back(value);
    total += weight;
    cumulative.push_back(total);
  }

  std::int64_t sample(Rng& rng) const {
    const std::uint64_t r = const_cast<Rng&>(rng).bounded(total);
    // binary search for the first cumulative > r
    std::size_t lo = 0, hi = cumulative.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cumulative[mid] > r) hi = mid; else lo = mid + 1;
    }
    return values[lo];
  }

  bool empty() const { return values.empty(); }
};

}  // namespace tassim
