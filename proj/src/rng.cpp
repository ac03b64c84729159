#include "airfed/rng.hpp"

#include <array>

namespace airfed {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, Stream stream) {
  const auto tag = static_cast<std::uint64_t>(stream);
  std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, Stream stream) : engine_(seeded_engine(seed, stream)) {}

std::size_t Rng::below(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace airfed
