#pragma once

#include <cstdint>
#include <random>

namespace rsc {

// splitmix64; used only to spread (seed, index...) tuples into engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic substream: every (seed, a, b, c) tuple gets an independent
// engine, so trials, generation stages and bootstrap replicates can be
// reordered or parallelized without changing any draw.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b + 0x7f4a7c159e3779b9ULL));
  h = mix64(h ^ (c + 0x2545f4914f6cdd1dULL));
  return std::mt19937_64(h);
}

// Stage tags for the per-trial generation substreams.
enum : std::uint64_t {
  kStageRatios = 0,
  kStageEigvecs = 1,
  kStageBody = 2,
  kStageOutliers = 3,
  kStageAlphaBoot = 4,
  kStageAxis = 5,
};

// Child seed for a derived component: one draw from the tagged substream.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  return substream(seed, a, b, c)();
}

}  // namespace rsc
