#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace aprox {

// Philox4x32-10 block function (Salmon et al., Random123).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter counter, Key key);
};

// Counter-based stream keyed by (seed, purpose, indices). Two streams with
// the same key produce the same sequence on every platform; the draw
// algorithms below do not depend on the standard library's distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::string_view purpose,
            std::initializer_list<std::uint64_t> indices = {});

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal via Box-Muller.
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  bool bernoulli(double p);
  // Inversion for mean <= 30, PTRS rejection (Hormann 1993) above.
  std::uint64_t poisson(double mean);

  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  Philox4x32::Key key_{};
  std::uint64_t stream_id_ = 0;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Derives a 64-bit seed from a parent seed and a path of indices; used to key
// per-trial datasets so they can be regenerated independently.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                          std::initializer_list<std::uint64_t> indices);

}  // namespace aprox
