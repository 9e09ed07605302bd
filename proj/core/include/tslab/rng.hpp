#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tslab {

// Deterministic random stream keyed by (master_seed, stream_id).
//
// The engine is std::mt19937_64 seeded with a splitmix64 mix of both keys.
// Uniforms take the top 53 bits; normals use the Box-Muller transform and
// cache the second variate of each pair.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+splitmix64/box-muller";

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Uniform on [0, 1).
  double uniform();
  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tslab
