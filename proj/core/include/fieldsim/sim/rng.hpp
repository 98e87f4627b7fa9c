#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fieldsim::sim {

// SplitMix64 finalizer; used to derive well-separated seeds.
std::uint64_t mix64(std::uint64_t x);

// Stable 64-bit FNV-1a hash of a node id, used as its stream id.
std::uint64_t stream_id_for(std::string_view node_id);

// Seed for replication `rep` of a scenario run with `master_seed`.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t rep);

// Deterministic random stream keyed by (seed, stream_id). Backed by
// std::mt19937_64, whose output sequence is fixed by the standard; the
// conversion to reals is done here rather than through <random>
// distributions, which are implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of precision.
  double next_uniform();
  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

inline double rng_next_uniform(RngStream& stream) { return stream.next_uniform(); }

}  // namespace fieldsim::sim
