#include "adaptrial/rng.hpp"

namespace adaptrial::sim {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Stream::Stream(std::uint64_t master_seed, std::uint64_t replication) {
  std::uint64_t s = master_seed;
  std::uint64_t base = splitmix64(s);
  std::uint64_t t = base ^ (replication * 0xD1B54A32D192ED03ull);
  const std::uint64_t k = splitmix64(t);
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::uint64_t Stream::bits(std::uint32_t patient, Purpose purpose, std::uint32_t draw) const {
  const auto out = philox4x32_10({patient, draw / 2, static_cast<std::uint32_t>(purpose), 0u}, key_);
  const std::size_t off = (draw % 2) * 2;
  return (static_cast<std::uint64_t>(out[off]) << 32) | out[off + 1];
}

double Stream::uniform(std::uint32_t patient, Purpose purpose, std::uint32_t draw) const {
  return static_cast<double>(bits(patient, purpose, draw) >> 11) * 0x1.0p-53;
}

double Stream::uniform_open(std::uint32_t patient, Purpose purpose, std::uint32_t draw) const {
  return (static_cast<double>(bits(patient, purpose, draw) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace adaptrial::sim
