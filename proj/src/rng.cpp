#include "htm/rng.hpp"

namespace htm {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t hash64(std::uint64_t master_seed, std::uint64_t replicate_index,
                     std::uint64_t stream_role) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ replicate_index);
  h = splitmix64(h ^ (stream_role * 0xd1b54a32d192ed03ULL));
  return h;
}

}  // namespace htm
