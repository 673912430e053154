#include "mtkit/rng.hpp"

#include "mtkit/normal.hpp"

namespace mtkit {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& c, const Philox4x32::Key& k) noexcept {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kM0, c[0], hi0, lo0);
  mulhilo(kM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter counter, Key key) noexcept {
  counter = round(counter, key);
  for (int i = 1; i < 10; ++i) {
    key[0] += kW0;
    key[1] += kW1;
    counter = round(counter, key);
  }
  return counter;
}

CounterRng::CounterRng(std::uint64_t seed) noexcept
    : seed_(seed),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

std::array<double, 2> CounterRng::uniforms(std::uint64_t stream,
                                           std::uint64_t index) const noexcept {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(stream),
                                static_cast<std::uint32_t>(stream >> 32),
                                static_cast<std::uint32_t>(index),
                                static_cast<std::uint32_t>(index >> 32)};
  const auto out = Philox4x32::generate(ctr, key_);
  return {to_open_unit(out[0], out[1]), to_open_unit(out[2], out[3])};
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t index) const noexcept {
  return normal::quantile(uniforms(stream, index)[0]);
}

}  // namespace mtkit
