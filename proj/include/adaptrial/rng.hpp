#pragma once

#include <array>
#include <cstdint>

namespace adaptrial::sim {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t& state);

enum class Purpose : std::uint32_t { Arrival = 0, Covariate = 1, Arm = 2, ShortTerm = 3, Primary = 4 };

// Counter-based stream for one replication. Each (patient, purpose, draw) maps to a
// fixed position, so patient i's data never depends on how many patients are drawn.
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t replication);

  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint32_t patient, Purpose purpose, std::uint32_t draw = 0) const;
  // Uniform on (0, 1), safe for quantile transforms.
  double uniform_open(std::uint32_t patient, Purpose purpose, std::uint32_t draw = 0) const;

  PhiloxKey key() const { return key_; }

 private:
  std::uint64_t bits(std::uint32_t patient, Purpose purpose, std::uint32_t draw) const;
  PhiloxKey key_{};
};

}  // namespace adaptrial::sim
