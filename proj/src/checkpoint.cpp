#include "per/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "per/errors.hpp"

namespace per {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint is truncated");
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(net.depth()));
  for (const auto& w : net.layers()) {
    put_u32(out, static_cast<std::uint32_t>(w.rows()));
    put_u32(out, static_cast<std::uint32_t>(w.cols()));
  }
  for (const auto& w : net.layers())
    for (double v : w.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Network decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw DataError("not a checkpoint (bad magic)");
  std::vector<std::uint8_t> body(bytes.begin() + 4, bytes.end());
  Reader r(body);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t n = r.u32();
  if (n == 0) throw DataError("checkpoint has no layers");
  r.need(static_cast<std::size_t>(n) * 8);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(n);
  std::size_t total = 0;
  for (auto& [rows, cols] : shapes) {
    rows = r.u32();
    cols = r.u32();
    total += static_cast<std::size_t>(rows) * cols;
  }
  if (r.remaining() != total * 4)
    throw DataError(r.remaining() < total * 4 ? "checkpoint is truncated" : "checkpoint has trailing bytes");
  std::vector<Matrix> layers;
  for (const auto& [rows, cols] : shapes) {
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    for (double& v : data) v = static_cast<double>(r.f32());
    layers.emplace_back(rows, cols, std::move(data));
  }
  try {
    return Network(std::move(layers));
  } catch (const InputError& e) {
    throw DataError(std::string("checkpoint layers are inconsistent: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::string& path) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Network round_to_float(const Network& net) {
  auto layers = net.layers();
  for (auto& w : layers)
    for (double& v : w.data()) v = static_cast<double>(static_cast<float>(v));
  return Network(std::move(layers));
}

}  // namespace per
