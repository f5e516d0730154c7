#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace rcg {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A `Stream` is identified by a 64-bit key; its output is the Philox image of
// an incrementing 64-bit block counter, so a stream is a pure function of its
// key. Child streams are derived with `split`, which never consumes output
// from the parent.
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter block(Counter ctr, Key key);

}  // namespace philox

std::uint64_t splitmix64(std::uint64_t x);

// Documented splitting function: child key = splitmix64(key ^ splitmix64(id)).
std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id);
std::uint64_t hash_label(std::string_view label);

class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  std::uint64_t key() const { return key_; }
  Stream split(std::uint64_t id) const { return Stream(derive_key(key_, id)); }
  Stream split(std::string_view label) const { return split(hash_label(label)); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  double normal();
  double exponential();
  // Poisson(mean) by counting unit-rate exponential arrivals in [0, mean].
  std::uint64_t poisson(double mean);

 private:
  std::uint32_t next32();

  std::uint64_t key_;
  std::uint64_t block_ = 0;
  philox::Counter buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace rcg
