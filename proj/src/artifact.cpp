#include "rigcast/artifact.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "rigcast/error.hpp"

namespace rigcast {

namespace {

constexpr std::string_view kMagic{"RIGCAST\0", 8};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  void doubles(std::span<const double> v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t count(std::size_t element_size) {
    const auto n = u64();
    if (element_size && n > (in_.size() - pos_) / element_size) throw CorruptArtifactError("length field runs past the end");
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    const auto n = count(1);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    std::vector<double> v(count(8));
    for (auto& x : v) x = f64();
    return v;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CorruptArtifactError("artifact is truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_matrix(Writer& w, const Matrix& m) {
  w.u64(m.rows());
  w.u64(m.cols());
  w.doubles(m.data());
}

Matrix read_matrix(Reader& r) {
  const auto rows = r.u64();
  const auto cols = r.u64();
  const auto data = r.doubles();
  if (rows * cols != data.size()) throw CorruptArtifactError("matrix shape does not match its data");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data().begin());
  return m;
}

void write_codebook(Writer& w, const Codebook& cb) {
  w.u8(static_cast<std::uint8_t>(cb.channel));
  w.i64(cb.tau_length.count());
  w.i64(cb.tau_step.count());
  w.i64(cb.sample_period.count());
  w.u8(static_cast<std::uint8_t>(cb.wavelet.family));
  w.i64(cb.wavelet.level);
  write_matrix(w, cb.quantizer.centroids);
  w.f64(cb.quantizer.inertia);
  w.u64(cb.quantizer.seed);
  w.doubles(cb.quantizer.inertia_history);
}

template <typename E>
E read_enum(Reader& r, std::size_t count, const char* what) {
  const auto v = r.u8();
  if (v >= count) throw CorruptArtifactError(std::string("bad ") + what + " code " + std::to_string(v));
  return static_cast<E>(v);
}

Codebook read_codebook(Reader& r) {
  Codebook cb;
  cb.channel = read_enum<Channel>(r, kChannelCount, "channel");
  cb.tau_length = Duration{r.i64()};
  cb.tau_step = Duration{r.i64()};
  cb.sample_period = Duration{r.i64()};
  cb.wavelet.family = read_enum<dwt::Family>(r, 3, "wavelet family");
  cb.wavelet.level = static_cast<int>(r.i64());
  cb.quantizer.centroids = read_matrix(r);
  cb.quantizer.inertia = r.f64();
  cb.quantizer.seed = r.u64();
  cb.quantizer.inertia_history = r.doubles();
  return cb;
}

void write_params(Writer& w, const BoostingParams& p) {
  w.i64(p.n_estimators);
  w.f64(p.learning_rate);
  w.i64(p.max_depth);
  w.f64(p.subsample);
  w.f64(p.colsample_bytree);
  w.f64(p.positive_class_weight);
  w.u64(p.seed);
  w.f64(p.reg_lambda);
  w.f64(p.min_child_weight);
}

BoostingParams read_params(Reader& r) {
  BoostingParams p;
  p.n_estimators = static_cast<int>(r.i64());
  p.learning_rate = r.f64();
  p.max_depth = static_cast<int>(r.i64());
  p.subsample = r.f64();
  p.colsample_bytree = r.f64();
  p.positive_class_weight = r.f64();
  p.seed = r.u64();
  p.reg_lambda = r.f64();
  p.min_child_weight = r.f64();
  return p;
}

void write_model(Writer& w, const ForecastModel& m) {
  w.u8(static_cast<std::uint8_t>(m.kind));
  w.u64(m.feature_dim);
  w.i64(m.window.t_length.count());
  w.i64(m.window.t_step.count());
  w.i64(m.window.tau_length.count());
  w.i64(m.window.tau_step.count());
  write_params(w, m.params);
  w.u64(m.codebooks.size());
  for (const auto& cb : m.codebooks) write_codebook(w, cb);
  for (const auto& e : m.ensembles) {
    w.f64(e.base_score);
    w.f64(e.learning_rate);
    w.u64(e.trees.size());
    for (const auto& tree : e.trees) {
      w.u64(tree.nodes.size());
      for (const auto& n : tree.nodes) {
        w.u32(static_cast<std::uint32_t>(n.feature));
        w.f64(n.threshold);
        w.u32(static_cast<std::uint32_t>(n.left));
        w.u32(static_cast<std::uint32_t>(n.right));
        w.f64(n.value);
      }
    }
  }
}

ForecastModel read_model(Reader& r) {
  ForecastModel m;
  m.kind = read_enum<FeatureKind>(r, 2, "feature kind");
  m.feature_dim = r.u64();
  m.window.t_length = Duration{r.i64()};
  m.window.t_step = Duration{r.i64()};
  m.window.tau_length = Duration{r.i64()};
  m.window.tau_step = Duration{r.i64()};
  m.params = read_params(r);
  m.codebooks.resize(r.count(1));
  for (auto& cb : m.codebooks) cb = read_codebook(r);
  for (auto& e : m.ensembles) {
    e.base_score = r.f64();
    e.learning_rate = r.f64();
    e.trees.resize(r.count(8));
    for (auto& tree : e.trees) {
      tree.nodes.resize(r.count(28));
      for (auto& n : tree.nodes) {
        n.feature = static_cast<std::int32_t>(r.u32());
        n.threshold = r.f64();
        n.left = static_cast<std::int32_t>(r.u32());
        n.right = static_cast<std::int32_t>(r.u32());
        n.value = r.f64();
        const auto size = static_cast<std::int32_t>(tree.nodes.size());
        if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size ||
                               static_cast<std::size_t>(n.feature) >= m.feature_dim)) {
          throw CorruptArtifactError("tree node points outside its tree");
        }
      }
    }
  }
  return m;
}

std::uint32_t checksum(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // crc32 takes a uInt length; feed large buffers in pieces.
  constexpr std::size_t kPiece = 1u << 30;
  for (std::size_t pos = 0; pos < bytes.size(); pos += kPiece) {
    const auto n = std::min(kPiece, bytes.size() - pos);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string serialize_artifact(const ModelArtifact& artifact) {
  Writer w;
  w.raw(kMagic);
  w.u32(kArtifactVersion);
  w.str(artifact.config.to_text());
  Writer model;
  write_model(model, artifact.model);
  w.str(model.bytes());
  w.u32(checksum(w.bytes()));
  return std::move(w.bytes());
}

ModelArtifact deserialize_artifact(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CorruptArtifactError("not a model artifact");
  }
  const auto body = bytes.substr(0, bytes.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  if (tail.u32() != checksum(body)) throw CorruptArtifactError("artifact checksum mismatch");

  Reader r(body.substr(kMagic.size()));
  const auto version = r.u32();
  if (version != kArtifactVersion) {
    throw CorruptArtifactError("artifact format version " + std::to_string(version) + ", expected " +
                               std::to_string(kArtifactVersion));
  }
  ModelArtifact a;
  try {
    a.config = parse_config(r.str());
  } catch (const ConfigurationError& e) {
    throw CorruptArtifactError(std::string("artifact manifest: ") + e.what());
  }
  const auto model_bytes = r.str();
  Reader mr(model_bytes);
  a.model = read_model(mr);
  if (!mr.done() || !r.done()) throw CorruptArtifactError("trailing bytes in artifact");
  return a;
}

void save_artifact(const ModelArtifact& artifact, const std::filesystem::path& path) {
  const auto bytes = serialize_artifact(artifact);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  return deserialize_artifact(bytes);
}

}  // namespace rigcast
