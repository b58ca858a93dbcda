#include <cstdint>
#include <random>

#include "vlx/mc.hpp"

namespace vlx::mc {

PathRng::PathRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                    static_cast<std::uint32_t>(stream)};
  eng_.seed(seq);
}

}  // namespace vlx::mc
