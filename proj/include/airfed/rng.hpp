#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace airfed {

/// Independent stream identifiers. Two generators built from the same seed but
/// different streams produce unrelated sequences.
enum class Stream : std::uint64_t {
  generic = 0,
  problem = 1,
  channel = 2,
  validation = 3,
};

/// Seeded generator handle. Every random draw in the library goes through one
/// of these; there is no global generator state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, Stream stream = Stream::generic);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double exponential() { return exponential_(engine_); }
  /// Uniform index in [0, n).
  std::size_t below(std::size_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::exponential_distribution<double> exponential_{1.0};
};

}  // namespace airfed
