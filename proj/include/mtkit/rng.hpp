#pragma once

#include <array>
#include <cstdint>

namespace mtkit {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
/// Pure: the output depends only on (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* kName = "philox4x32-10";

  static Counter generate(Counter counter, Key key) noexcept;
};

/// Random variates addressed by (stream, index) under a fixed 64-bit seed.
/// Every address yields one 128-bit Philox block, i.e. two uniforms, so draws
/// can be produced in any order or in parallel with identical results.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept;

  /// Two independent uniforms strictly inside (0,1), 53-bit resolution.
  [[nodiscard]] std::array<double, 2> uniforms(std::uint64_t stream,
                                               std::uint64_t index) const noexcept;

  /// Standard normal by inversion of the first uniform at this address.
  [[nodiscard]] double normal(std::uint64_t stream, std::uint64_t index) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  Philox4x32::Key key_;
};

}  // namespace mtkit
