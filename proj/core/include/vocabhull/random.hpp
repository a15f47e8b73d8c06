#pragma once

#include <cstdint>
#include <random>

namespace vocabhull {

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent child seed for `stream` (row index, epoch, direction...).
constexpr Seed derive(Seed seed, std::uint64_t stream) noexcept {
  return Seed{mix64(mix64(seed.value) ^ mix64(stream + 0x632be59bd9b4e019ULL))};
}

using Engine = std::mt19937_64;

inline Engine make_engine(Seed seed, std::uint64_t stream) {
  return Engine(derive(seed, stream).value);
}

// Counter-based standard normals: value k depends only on (key, k).
// Cheaper than seeding an Engine when only a handful of draws are needed.
double counter_normal(std::uint64_t key, std::uint64_t k) noexcept;

}  // namespace vocabhull
