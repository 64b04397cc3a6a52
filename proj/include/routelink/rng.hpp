#ifndef ROUTELINK_RNG_HPP
#define ROUTELINK_RNG_HPP

#include <cstdint>

namespace routelink {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed for (stream, entity) under one master seed.
/// Distinct streams never share draws, so adding entities to one stream
/// leaves every other stream's output unchanged.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t entity) {
  return splitmix64(splitmix64(master ^ (stream << 32)) ^ entity);
}

} // namespace routelink

#endif
