#include "lowrank/rng.hpp"

#include <array>

namespace lowrank {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream RngStream::child(std::uint64_t index) const {
  const std::uint64_t family = splitmix64(master_seed_ ^ splitmix64(stream_index_ + 0x51ed27ULL));
  return RngStream(family, index);
}

std::mt19937_64 RngStream::engine() const {
  const std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(master_seed_), static_cast<std::uint32_t>(master_seed_ >> 32),
      static_cast<std::uint32_t>(stream_index_), static_cast<std::uint32_t>(stream_index_ >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace lowrank
