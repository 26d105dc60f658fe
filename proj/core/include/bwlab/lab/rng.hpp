#pragma once

#include <array>
#include <cstdint>

namespace bwlab::lab {

// One step of SplitMix64 (Steele, Lea, Flood 2014). Advances `state` by the
// golden-ratio increment and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Reproducible random stream.
///
/// Derivation (kept stable so other implementations reproduce it word for
/// word): `x = seed_base ^ stream_index`; the four xoshiro256++ state words are
/// the first four outputs of SplitMix64 started at `x`. Words are produced by
/// xoshiro256++ (Blackman, Vigna 2019).
///
/// Because of the xor, bases that differ only in low bits share streams
/// (base 1 stream 0 is base 0 stream 1). Independent sub-studies take their
/// bases from sub_base(), which keeps tags above the stream-index bits.
///
/// Derived variates:
///  - uniform():   ((w >> 11) + 0.5) * 2^-53, strictly inside (0, 1)
///  - normal():    Box-Muller on two uniforms, second value cached
///  - gamma(k,s):  Marsaglia-Tsang; k < 1 via gamma(k+1) * U^(1/k)
///  - geometric(p): 1 + floor(log U / log(1-p)), support {1, 2, ...}
class RngStream;

// seed_base ^ (tag << 32): distinct tags never share a stream while stream
// indices stay below 2^32.
constexpr std::uint64_t sub_base(std::uint64_t seed_base, std::uint64_t tag) {
  return seed_base ^ (tag << 32);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed_base, std::uint64_t stream_index);

  std::uint64_t next();

  double uniform();
  double normal();
  double exponential(double mean);
  double gamma(double shape, double scale);
  double chi_square(double dof);
  std::uint64_t geometric(double p);

  std::uint64_t seed_base() const { return seed_base_; }
  std::uint64_t stream_index() const { return stream_index_; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_base_;
  std::uint64_t stream_index_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

inline RngStream rng_stream(std::uint64_t seed_base, std::uint64_t stream_index) {
  return RngStream(seed_base, stream_index);
}

}  // namespace bwlab::lab
