#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace per {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Separates the random streams used by different parts of the pipeline.
enum class StreamDomain : std::uint64_t {
  Init = 1,
  Shuffle = 2,
  TrainNoise = 3,
  ConfusionNoise = 4,
  CertifyNoise = 5,
  MuSim = 6,
  Data = 7,
  Test = 8,
  EvalConfusion = 9,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Position in a counter-based random sequence.
///
/// Element k of stream (seed, stream_id) is a pure function of
/// (seed, stream_id, k): uniforms 2b and 2b+1 come from Philox block b, and
/// Gaussian k is the cos/sin half of the Box-Muller pair built from the
/// same two uniforms. `counter` is the index of the next element to draw.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;

  static RngStream make(std::uint64_t seed, StreamDomain domain, std::uint64_t index = 0);

  /// Independent child stream keyed by `index`, counter reset to 0.
  RngStream substream(std::uint64_t index) const;

  /// Same stream positioned at `position`.
  RngStream at(std::uint64_t position) const { return {seed, stream_id, position}; }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Uniform in [0, 1) with 53 random bits.
double uniform_at(const RngStream& s, std::uint64_t index);
/// Standard normal.
double gaussian_at(const RngStream& s, std::uint64_t index);

/// n uniforms in [0,1). Advances the counter by n.
std::vector<double> uniform(RngStream& stream, std::size_t n);
/// i.i.d. N(0, sigma²) entries. Advances the counter by dim.
std::vector<double> gaussian_vector(RngStream& stream, std::size_t dim, double sigma);
void fill_gaussian(RngStream& stream, std::span<double> out, double sigma);

/// Uniform integer in [0, bound). Consumes one uniform.
std::uint64_t uniform_index(RngStream& stream, std::uint64_t bound);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(RngStream& stream, std::size_t n);

}  // namespace per
