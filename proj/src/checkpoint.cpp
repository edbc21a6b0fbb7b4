#include "asv/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "asv/errors.hpp"
#include "asv/io.hpp"

namespace asv {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'V', 'P', 'P', 'O', 'C', 'K'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::string& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  void need(std::size_t n, const char* field) const {
    if (pos_ + n > bytes_.size())
      throw ParseError(source_ + ": truncated checkpoint while reading " + field);
  }
  std::uint64_t u(int width, const char* field) {
    need(static_cast<std::size_t>(width), field);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  double f64(const char* field) { return std::bit_cast<double>(u(8, field)); }
  std::string raw(std::size_t n, const char* field) {
    need(n, field);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  const std::string& source() const { return source_; }

 private:
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const std::size_t n = PolicyValueNet::kNumParams;
  std::string out;
  out.reserve(64 + 8 * (3 * n + kObservationSize));
  out.append(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, kObservationSize);
  put_u32(out, kHidden);
  put_u32(out, kActionSize);
  for (double s : ckpt.net.scaling()) put_f64(out, s);
  put_u64(out, ckpt.iteration);
  put_u64(out, ckpt.total_steps);
  put_u64(out, ckpt.adam.t);
  put_u64(out, n);
  for (std::size_t i = 0; i < n; ++i) put_f64(out, ckpt.net.params()[static_cast<Eigen::Index>(i)]);
  for (std::size_t i = 0; i < n; ++i) put_f64(out, ckpt.adam.m[static_cast<Eigen::Index>(i)]);
  for (std::size_t i = 0; i < n; ++i) put_f64(out, ckpt.adam.v[static_cast<Eigen::Index>(i)]);
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes, const std::string& source) {
  Reader rd(bytes, source);
  if (rd.raw(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic))
    throw ParseError(source + ": not a checkpoint file (bad magic)");
  const auto version = rd.u(4, "version");
  if (version != kCheckpointVersion)
    throw UnsupportedVersionError(source + ": unsupported checkpoint version " +
                                  std::to_string(version));
  const auto obs = rd.u(4, "observation size");
  const auto hidden = rd.u(4, "hidden width");
  const auto act = rd.u(4, "action size");
  if (obs != kObservationSize || hidden != kHidden || act != kActionSize)
    throw ParseError(source + ": architecture mismatch (" + std::to_string(obs) + "/" +
                     std::to_string(hidden) + "/" + std::to_string(act) + ")");
  FeatureScaling scaling;
  for (double& s : scaling) {
    s = rd.f64("feature scaling");
    if (!(std::isfinite(s) && s != 0.0)) throw ParseError(source + ": invalid feature scaling");
  }
  Checkpoint ckpt{PolicyValueNet(scaling)};
  ckpt.iteration = rd.u(8, "iteration");
  ckpt.total_steps = rd.u(8, "total steps");
  ckpt.adam.t = rd.u(8, "adam step");
  const auto n = rd.u(8, "parameter count");
  if (n != PolicyValueNet::kNumParams)
    throw ParseError(source + ": parameter count mismatch");
  for (std::size_t i = 0; i < n; ++i) ckpt.net.params()[static_cast<Eigen::Index>(i)] = rd.f64("parameters");
  for (std::size_t i = 0; i < n; ++i) ckpt.adam.m[static_cast<Eigen::Index>(i)] = rd.f64("adam m");
  for (std::size_t i = 0; i < n; ++i) ckpt.adam.v[static_cast<Eigen::Index>(i)] = rd.f64("adam v");
  if (!rd.at_end()) throw ParseError(source + ": trailing bytes after checkpoint");
  if (!ckpt.net.params().allFinite()) throw ParseError(source + ": non-finite parameters");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
  write_file_atomic(file, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file))
    throw ParseError("checkpoint not found: " + file.string());
  return parse_checkpoint(read_file(file), file.string());
}

}  // namespace asv
