#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace spdegen {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Pure
/// function of (counter, key); no state is carried between calls.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Order-dependent hash of a list of words onto a 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> words);

/// FNV-1a of a tag string, for use as a derive_seed word.
std::uint64_t tag_hash(std::string_view tag);

struct NormalPair {
  double first;
  double second;
};

/// Two independent standard normals addressed by (seed, c0..c3).
NormalPair normal_pair(std::uint64_t seed, std::uint32_t c0, std::uint32_t c1,
                       std::uint32_t c2, std::uint32_t c3);

/// Sequential standard-normal stream over a counter-based generator.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed, std::uint32_t stream = 0)
      : seed_(seed), stream_(stream) {}

  double next();

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Uniform in [0, 1) from a counter-based stream.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : seed_(seed) {}
  double next();

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace spdegen
