#include "tscmrar/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "tscmrar/error.hpp"

namespace tscmrar {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'C', 'M', 'R', 'A', 'R', '\0'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

  void bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{u8()} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw DataError("checkpoint '" + source_ + "' is truncated");
    }
  }

  std::string_view data_;
  std::string source_;
  std::size_t pos_ = 0;
};

struct RawTensor {
  std::string name;
  ParamRole role;
  Shape shape;
  std::vector<double> values;
};

struct RawCheckpoint {
  std::uint32_t k = 0;
  std::uint32_t vocab = 0;
  LabelSpace labels;
  ChannelPlan plan;
  std::vector<RawTensor> tensors;
};

RawCheckpoint decode(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + source + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  if (data.size() < sizeof(kMagic) + 4 + 8 ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("'" + source + "' is not a checkpoint (bad magic or truncated)");
  }
  const std::string_view body(data.data(), data.size() - 8);
  Reader trailer(std::string_view(data).substr(data.size() - 8), source);
  if (trailer.u64() != fnv1a(body)) {
    throw DataError("checkpoint '" + source + "' is corrupt or truncated (hash mismatch)");
  }

  Reader r(body, source);
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(magic));
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint '" + source + "' has format version " +
                    std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  RawCheckpoint raw;
  raw.k = r.u32();
  raw.vocab = r.u32();
  raw.labels.residents = r.u32();
  raw.labels.activities = r.u32();
  const std::uint32_t modules = r.u32();
  for (std::uint32_t i = 0; i < modules; ++i) raw.plan.out_channels.push_back(r.u32());
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    RawTensor t;
    t.name.resize(r.u32());
    r.bytes(t.name.data(), t.name.size());
    const std::uint8_t role = r.u8();
    if (role > 1) throw DataError("checkpoint tensor '" + t.name + "' has bad role");
    t.role = role == 0 ? ParamRole::kWeight : ParamRole::kBias;
    const std::uint32_t rank = r.u32();
    if (rank < 1 || rank > 3) {
      throw DataError("checkpoint tensor '" + t.name + "' has rank " + std::to_string(rank));
    }
    std::vector<std::size_t> extents(rank);
    for (auto& e : extents) e = static_cast<std::size_t>(r.u64());
    t.shape = Shape(extents);
    t.values.resize(t.shape.numel());
    for (double& v : t.values) v = r.f64();
    raw.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw DataError("checkpoint '" + source + "' has trailing bytes");
  return raw;
}

ModelParams materialize(const RawCheckpoint& raw, const std::string& source) {
  ModelParams params(raw.k, raw.vocab, raw.labels);
  if (params.plan() != raw.plan) {
    throw ShapeError("checkpoint '" + source + "' channel plan does not match k=" +
                     std::to_string(raw.k));
  }
  auto& tensors = params.tensors();
  if (tensors.size() != raw.tensors.size()) {
    throw ShapeError("checkpoint '" + source + "' holds " +
                     std::to_string(raw.tensors.size()) + " tensors, layout for k=" +
                     std::to_string(raw.k) + " needs " + std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const RawTensor& t = raw.tensors[i];
    if (t.name != tensors[i].name || t.shape != tensors[i].value.shape() ||
        t.role != tensors[i].role) {
      throw ShapeError("checkpoint tensor '" + t.name + "' " + t.shape.str() +
                       " does not match layout tensor '" + tensors[i].name + "' " +
                       tensors[i].value.shape().str());
    }
    tensors[i].value = Tensor(t.shape, t.values);
  }
  return params;
}

}  // namespace

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(params.window_size()));
  w.u32(static_cast<std::uint32_t>(params.vocab_size()));
  w.u32(static_cast<std::uint32_t>(params.labels().residents));
  w.u32(static_cast<std::uint32_t>(params.labels().activities));
  w.u32(static_cast<std::uint32_t>(params.module_count()));
  for (std::size_t c : params.plan().out_channels) w.u32(static_cast<std::uint32_t>(c));
  w.u32(static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& t : params.tensors()) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(t.role == ParamRole::kWeight ? 0 : 1);
    const auto extents = t.value.shape().extents();
    w.u32(static_cast<std::uint32_t>(extents.size()));
    for (std::size_t e : extents) w.u64(e);
    for (double v : t.value.data()) w.f64(v);
  }
  const std::uint64_t hash = fnv1a(w.str());
  w.u64(hash);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + tmp.string() + "'");
    out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
    if (!out) throw DataError("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

ModelParams load_params(const std::filesystem::path& path) {
  return materialize(decode(path), path.string());
}

ModelParams load_params(const std::filesystem::path& path, const ModelParams& expected) {
  const RawCheckpoint raw = decode(path);
  const std::string context = " (checkpoint k=" + std::to_string(raw.k) +
                              ", expected k=" + std::to_string(expected.window_size()) + ")";
  for (const auto& want : expected.tensors()) {
    const RawTensor* have = nullptr;
    for (const auto& t : raw.tensors) {
      if (t.name == want.name) have = &t;
    }
    if (!have) {
      throw ShapeError("checkpoint is missing tensor '" + want.name + "' " +
                       want.value.shape().str() + context);
    }
    if (have->shape != want.value.shape()) {
      throw ShapeError("checkpoint tensor '" + want.name + "' has shape " +
                       have->shape.str() + ", expected " + want.value.shape().str() +
                       context);
    }
  }
  for (const auto& t : raw.tensors) {
    if (!expected.find(t.name)) {
      throw ShapeError("checkpoint has unexpected tensor '" + t.name + "'" + context);
    }
  }
  if (raw.vocab != expected.vocab_size() || !(raw.labels == expected.labels())) {
    throw ShapeError("checkpoint vocabulary/label sizes differ from the run" + context);
  }
  return materialize(raw, path.string());
}

}  // namespace tscmrar
