#include "bhavnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "bhavnet/error.hpp"

namespace bhavnet {
namespace {

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

void put_bytes(std::string& out, std::string_view s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class U>
  U le() {
    need(sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string_view counted() { return take(le<std::uint32_t>()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelParams& params, const HyperParams& hp) {
  std::string out(kCheckpointMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_bytes(out, to_json(hp));
  std::uint32_t count = 0;
  params.for_each([&](const std::string&, const Tensor&) { ++count; });
  put_le<std::uint32_t>(out, count);
  params.for_each([&](const std::string& name, const Tensor& t) {
    put_bytes(out, name);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) put_le<std::uint64_t>(out, e);
    for (double v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  });
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kCheckpointMagic.size()) != kCheckpointMagic) throw CheckpointError("not a checkpoint (bad magic)");
  const auto version = in.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  try {
    ck.hp = hyperparams_from_json(in.counted());
    ck.params = zero_params(ck.hp);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint hyperparameters are invalid: ") + e.what());
  }

  std::uint32_t expected = 0;
  ck.params.for_each([&](const std::string&, const Tensor&) { ++expected; });
  const auto count = in.le<std::uint32_t>();
  if (count != expected) {
    throw CheckpointError("checkpoint holds " + std::to_string(count) + " arrays, hyperparameters imply " +
                          std::to_string(expected));
  }
  ck.params.for_each([&](const std::string& name, Tensor& t) {
    const auto stored = in.counted();
    if (stored != name) throw CheckpointError("expected array '" + name + "', found '" + std::string(stored) + "'");
    const auto rank = in.le<std::uint32_t>();
    Tensor::Shape shape(rank);
    for (auto& e : shape) e = static_cast<std::size_t>(in.le<std::uint64_t>());
    if (shape != t.shape()) {
      throw CheckpointError("array '" + name + "' has shape " + shape_string(shape) + ", expected " +
                            shape_string(t.shape()));
    }
    for (double& v : t.data()) v = static_cast<double>(std::bit_cast<float>(in.le<std::uint32_t>()));
    if (!t.all_finite()) throw CheckpointError("array '" + name + "' contains non-finite values");
  });
  if (!in.done()) throw CheckpointError("trailing bytes after the last array");
  return ck;
}

void save_checkpoint(const ModelParams& params, const HyperParams& hp, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(params, hp);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace bhavnet
