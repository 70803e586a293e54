#include "per/rng.hpp"

#include <cmath>
#include <numbers>
#include <algorithm>
#include <numeric>

namespace per {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

struct Block {
  double u0;
  double u1;
};

Block uniform_block(const RngStream& s, std::uint64_t block) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
      static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(s.seed),
                                            static_cast<std::uint32_t>(s.seed >> 32)};
  const auto w = philox4x32(ctr, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(w[3]) << 32) | w[2];
  constexpr double kScale = 0x1.0p-53;
  return {static_cast<double>(a >> 11) * kScale, static_cast<double>(b >> 11) * kScale};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RngStream RngStream::make(std::uint64_t seed, StreamDomain domain, std::uint64_t index) {
  const std::uint64_t id = splitmix64(splitmix64(static_cast<std::uint64_t>(domain)) ^ index);
  return {seed, id, 0};
}

RngStream RngStream::substream(std::uint64_t index) const {
  return {seed, splitmix64(stream_id ^ splitmix64(index + 0x632BE59BD9B4E019ull)), 0};
}

double uniform_at(const RngStream& s, std::uint64_t index) {
  const Block b = uniform_block(s, index >> 1);
  return (index & 1u) ? b.u1 : b.u0;
}

double gaussian_at(const RngStream& s, std::uint64_t index) {
  const Block b = uniform_block(s, index >> 1);
  const double r = std::sqrt(-2.0 * std::log1p(-b.u0));  // 1 - u0 in (0, 1]
  const double theta = 2.0 * std::numbers::pi * b.u1;
  return (index & 1u) ? r * std::sin(theta) : r * std::cos(theta);
}

std::vector<double> uniform(RngStream& stream, std::size_t n) {
  std::vector<double> out(n);
  std::size_t i = 0;
  std::uint64_t k = stream.counter;
  if (n > 0 && (k & 1u)) {
    out[i++] = uniform_at(stream, k++);
  }
  for (; i + 1 < n; i += 2, k += 2) {
    const Block b = uniform_block(stream, k >> 1);
    out[i] = b.u0;
    out[i + 1] = b.u1;
  }
  if (i < n) out[i] = uniform_at(stream, k++);
  stream.counter += n;
  return out;
}

void fill_gaussian(RngStream& stream, std::span<double> out, double sigma) {
  if (sigma == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    stream.counter += out.size();
    return;
  }
  std::size_t i = 0;
  std::uint64_t k = stream.counter;
  if (!out.empty() && (k & 1u)) out[i++] = sigma * gaussian_at(stream, k++);
  for (; i + 1 < out.size(); i += 2, k += 2) {
    const Block b = uniform_block(stream, k >> 1);
    const double r = std::sqrt(-2.0 * std::log1p(-b.u0));
    const double theta = 2.0 * std::numbers::pi * b.u1;
    out[i] = sigma * (r * std::cos(theta));
    out[i + 1] = sigma * (r * std::sin(theta));
  }
  if (i < out.size()) out[i] = sigma * gaussian_at(stream, k++);
  stream.counter += out.size();
}

std::vector<double> gaussian_vector(RngStream& stream, std::size_t dim, double sigma) {
  std::vector<double> out(dim);
  fill_gaussian(stream, out, sigma);
  return out;
}

std::uint64_t uniform_index(RngStream& stream, std::uint64_t bound) {
  const double u = uniform_at(stream, stream.counter++);
  auto j = static_cast<std::uint64_t>(u * static_cast<double>(bound));
  return j < bound ? j : bound - 1;
}

std::vector<std::size_t> permutation(RngStream& stream, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(stream, i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace per
