#include "smash/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "smash/error.hpp"

namespace smash {

namespace fs = std::filesystem;

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteReader::require(std::size_t n) const {
  if (remaining() < n)
    throw Error(Errc::truncation, context_ + ": expected at least " + std::to_string(pos_ + n) + " bytes, found " +
                                      std::to_string(data_.size()));
}

std::uint8_t ByteReader::u8() {
  require(1);
  return data_[pos_++];
}
std::uint32_t ByteReader::u32() {
  require(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
  return v;
}
std::uint64_t ByteReader::u64() {
  require(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
  return v;
}
float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str(std::size_t n) {
  require(n);
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
  pos_ += n;
  return s;
}

void ByteReader::magic(std::string_view expected) {
  if (remaining() < expected.size() ||
      std::memcmp(data_.data() + pos_, expected.data(), expected.size()) != 0)
    throw Error(Errc::format, context_ + ": bad magic, expected '" + std::string(expected) + "'");
  pos_ += expected.size();
}

void ByteReader::expect_end() const {
  if (remaining() != 0)
    throw Error(Errc::format, context_ + ": " + std::to_string(remaining()) + " unexpected trailing bytes");
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "' for reading");
  Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return b;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

namespace {

std::uint32_t to_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    throw Error(Errc::sizing, std::string(what) + " does not fit the 32-bit header field");
  return static_cast<std::uint32_t>(v);
}

// Multiplies header extents, rejecting products that overflow or exceed the
// remaining payload.
std::size_t payload_count(ByteReader& r, std::initializer_list<std::uint64_t> dims, std::size_t element_bytes) {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d)
      throw Error(Errc::sizing, r.context() + ": header dimensions overflow");
    n *= d;
  }
  if (n > std::numeric_limits<std::uint64_t>::max() / element_bytes)
    throw Error(Errc::sizing, r.context() + ": header dimensions overflow");
  r.require(static_cast<std::size_t>(n * element_bytes));
  return static_cast<std::size_t>(n);
}

void write_volume_f32(ByteWriter& w, const VideoVolume& v) {
  for (double x : v.data()) w.f32(static_cast<float>(x));
}

VideoVolume read_volume_f32(ByteReader& r, Dims3 dims) {
  const std::size_t n = payload_count(r, {dims.rows, dims.cols, dims.frames}, 4);
  std::vector<double> data(n);
  for (double& x : data) x = r.f32();
  return VideoVolume(dims, std::move(data));
}

}  // namespace

Bytes encode_rvf(const VideoVolume& v) {
  ByteWriter w;
  w.raw("RVF1");
  w.u32(to_u32(v.rows(), "P"));
  w.u32(to_u32(v.cols(), "Q"));
  w.u32(to_u32(v.frames(), "R"));
  write_volume_f32(w, v);
  return w.take();
}

VideoVolume decode_rvf(std::span<const std::uint8_t> bytes, const std::string& context) {
  ByteReader r(bytes, context);
  r.magic("RVF1");
  Dims3 d;
  d.rows = r.u32();
  d.cols = r.u32();
  d.frames = r.u32();
  if (d.rows == 0 || d.cols == 0 || d.frames == 0) throw Error(Errc::format, context + ": zero dimension in header");
  VideoVolume v = read_volume_f32(r, d);
  r.expect_end();
  return v;
}

void encode_filter(ByteWriter& w, const MachFilter& f) {
  w.raw("MCH1");
  w.u32(to_u32(f.dims().rows, "L"));
  w.u32(to_u32(f.dims().cols, "M"));
  w.u32(to_u32(f.dims().frames, "N"));
  w.f64(f.params.alpha);
  w.f64(f.params.beta);
  w.f64(f.params.gamma);
  w.u8(static_cast<std::uint8_t>(f.view_tag.kind));
  w.u32(to_u32(f.label.size(), "label"));
  w.raw(f.label);
  write_volume_f32(w, f.volume);
}

MachFilter decode_filter(ByteReader& r) {
  r.magic("MCH1");
  Dims3 d;
  d.rows = r.u32();
  d.cols = r.u32();
  d.frames = r.u32();
  if (d.rows == 0 || d.cols == 0 || d.frames == 0) throw Error(Errc::format, r.context() + ": zero filter dimension");
  MachFilter f;
  f.params.alpha = r.f64();
  f.params.beta = r.f64();
  f.params.gamma = r.f64();
  const std::uint8_t kind = r.u8();
  if (kind > 2) throw Error(Errc::format, r.context() + ": unknown view tag " + std::to_string(kind));
  f.view_tag.kind = static_cast<ViewKind>(kind);
  const std::uint32_t label_len = r.u32();
  f.label = r.str(label_len);
  f.volume = read_volume_f32(r, d);
  return f;
}

Bytes encode_filter(const MachFilter& f) {
  ByteWriter w;
  encode_filter(w, f);
  return w.take();
}

MachFilter decode_filter(std::span<const std::uint8_t> bytes, const std::string& context) {
  ByteReader r(bytes, context);
  MachFilter f = decode_filter(r);
  r.expect_end();
  return f;
}

Bytes encode_bank(const FilterBank& bank) {
  ByteWriter w;
  w.raw("BNK1");
  w.u32(to_u32(bank.size(), "bank size"));
  for (const auto& f : bank.filters) encode_filter(w, f);
  return w.take();
}

FilterBank decode_bank(std::span<const std::uint8_t> bytes, const std::string& context) {
  ByteReader r(bytes, context);
  r.magic("BNK1");
  const std::uint32_t count = r.u32();
  std::vector<MachFilter> filters;
  for (std::uint32_t i = 0; i < count; ++i) filters.push_back(decode_filter(r));
  r.expect_end();
  return FilterBank::from_filters(std::move(filters));
}

void encode_matrix_header(ByteWriter& w, const MeasurementMatrix& m, bool materialized) {
  w.raw("PHI1");
  w.u8(static_cast<std::uint8_t>(m.distribution()));
  w.u64(m.seed());
  w.u32(to_u32(m.rows(), "K"));
  w.u32(to_u32(m.cols(), "D"));
  w.u8(materialized ? 1 : 0);
}

Bytes encode_matrix(const MeasurementMatrix& m, bool materialized) {
  ByteWriter w;
  encode_matrix_header(w, m, materialized);
  if (materialized)
    for (float x : m.entries()) w.f32(x);
  return w.take();
}

namespace {

struct MatrixHeader {
  Distribution distribution;
  std::uint64_t seed;
  std::uint32_t rows, cols;
  bool materialized;
};

MatrixHeader read_matrix_header(ByteReader& r) {
  r.magic("PHI1");
  MatrixHeader h{};
  const std::uint8_t dist = r.u8();
  if (dist > 1) throw Error(Errc::format, r.context() + ": unknown distribution code " + std::to_string(dist));
  h.distribution = static_cast<Distribution>(dist);
  h.seed = r.u64();
  h.rows = r.u32();
  h.cols = r.u32();
  const std::uint8_t mat = r.u8();
  if (mat > 1) throw Error(Errc::format, r.context() + ": bad materialized flag");
  h.materialized = mat == 1;
  return h;
}

}  // namespace

MeasurementMatrix decode_matrix(std::span<const std::uint8_t> bytes, const std::string& context) {
  ByteReader r(bytes, context);
  const MatrixHeader h = read_matrix_header(r);
  if (!h.materialized) {
    r.expect_end();
    return make_matrix(h.distribution, h.seed, h.rows, h.cols);
  }
  const std::size_t n = payload_count(r, {h.rows, h.cols}, 4);
  std::vector<float> entries(n);
  for (float& x : entries) x = r.f32();
  r.expect_end();
  return MeasurementMatrix::from_entries(h.distribution, h.seed, h.rows, h.cols, std::move(entries));
}

Bytes encode_compressed(const CompressedVideo& z) {
  ByteWriter w;
  w.raw("CMP1");
  w.raw("PHI1");
  w.u8(static_cast<std::uint8_t>(z.distribution));
  w.u64(z.matrix_seed);
  w.u32(to_u32(z.measurements_per_frame, "K"));
  w.u32(to_u32(z.scene.frame_size(), "D"));
  w.u8(0);
  w.u32(to_u32(z.scene.rows, "P"));
  w.u32(to_u32(z.scene.cols, "Q"));
  w.u32(to_u32(z.scene.frames, "R"));
  w.u8(static_cast<std::uint8_t>(z.derivative_order));
  w.f32(static_cast<float>(z.noise_sigma));
  for (double x : z.measurements) w.f32(static_cast<float>(x));
  return w.take();
}

CompressedVideo decode_compressed(std::span<const std::uint8_t> bytes, const std::string& context) {
  ByteReader r(bytes, context);
  r.magic("CMP1");
  const MatrixHeader h = read_matrix_header(r);
  if (h.materialized) throw Error(Errc::format, context + ": embedded matrix header must be seed-only");
  CompressedVideo z;
  z.distribution = h.distribution;
  z.matrix_seed = h.seed;
  z.measurements_per_frame = h.rows;
  z.scene.rows = r.u32();
  z.scene.cols = r.u32();
  z.scene.frames = r.u32();
  z.derivative_order = r.u8();
  if (z.derivative_order > 1) throw Error(Errc::format, context + ": derivative order must be 0 or 1");
  z.noise_sigma = r.f32();
  if (static_cast<std::uint64_t>(z.scene.rows) * z.scene.cols != h.cols)
    throw Error(Errc::format, context + ": scene P*Q does not equal matrix D");
  if (z.scene.frames < static_cast<std::size_t>(z.derivative_order) + 1)
    throw Error(Errc::format, context + ": too few frames for the derivative order");
  z.columns = z.scene.frames - static_cast<std::size_t>(z.derivative_order);
  const std::size_t n = payload_count(r, {z.columns, h.rows}, 4);
  z.measurements.resize(n);
  for (double& x : z.measurements) x = r.f32();
  r.expect_end();
  return z;
}

Bytes encode_model(const SvmModel& m) {
  ByteWriter w;
  w.raw("MDL1");
  w.u32(to_u32(m.class_count, "class count"));
  w.u32(to_u32(m.dim, "dim"));
  for (std::size_t c = 0; c < m.class_count; ++c) {
    for (double x : m.class_weights(c)) w.f64(x);
    w.f64(m.bias[c]);
  }
  for (double x : m.feature_mean) w.f64(x);
  for (double x : m.feature_std) w.f64(x);
  return w.take();
}

SvmModel decode_model(std::span<const std::uint8_t> bytes, const std::string& context) {
  ByteReader r(bytes, context);
  r.magic("MDL1");
  SvmModel m;
  m.class_count = r.u32();
  m.dim = r.u32();
  payload_count(r, {m.class_count, m.dim + 1ULL}, 8);
  m.weights.resize(m.class_count * m.dim);
  m.bias.resize(m.class_count);
  for (std::size_t c = 0; c < m.class_count; ++c) {
    for (std::size_t j = 0; j < m.dim; ++j) m.weights[c * m.dim + j] = r.f64();
    m.bias[c] = r.f64();
  }
  payload_count(r, {2, m.dim}, 8);
  m.feature_mean.resize(m.dim);
  m.feature_std.resize(m.dim);
  for (double& x : m.feature_mean) x = r.f64();
  for (double& x : m.feature_std) x = r.f64();
  r.expect_end();
  return m;
}

// --- PGM / PPM ---------------------------------------------------------------

namespace {

struct PgmImage {
  std::size_t width = 0, height = 0;
  unsigned maxval = 0;
  std::span<const std::uint8_t> pixels;
};

PgmImage parse_pgm(std::span<const std::uint8_t> b, const std::string& context) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_space();
    if (pos >= b.size() || !std::isdigit(b[pos])) throw Error(Errc::format, context + ": malformed PGM header");
    std::size_t v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + (b[pos++] - '0');
      if (v > (1u << 30)) throw Error(Errc::format, context + ": PGM header value too large");
    }
    return v;
  };
  if (b.size() < 2 || b[0] != 'P' || b[1] != '5') throw Error(Errc::format, context + ": not a binary PGM (P5)");
  pos = 2;
  PgmImage img;
  img.width = number();
  img.height = number();
  img.maxval = static_cast<unsigned>(number());
  if (img.width == 0 || img.height == 0) throw Error(Errc::format, context + ": zero PGM dimension");
  if (img.maxval == 0 || img.maxval > 255) throw Error(Errc::format, context + ": only 8-bit PGM is supported");
  if (pos >= b.size() || !std::isspace(b[pos])) throw Error(Errc::format, context + ": malformed PGM header");
  ++pos;
  const std::size_t need = img.width * img.height;
  if (b.size() - pos < need)
    throw Error(Errc::truncation, context + ": expected " + std::to_string(pos + need) + " bytes, found " +
                                      std::to_string(b.size()));
  img.pixels = b.subspan(pos, need);
  return img;
}

}  // namespace

VideoVolume read_pgm_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  if (files.empty()) throw Error(Errc::io, "no .pgm frames in '" + dir.string() + "'");

  Dims3 dims;
  std::vector<double> data;
  for (const auto& file : files) {
    const Bytes bytes = read_file(file);
    const PgmImage img = parse_pgm(bytes, file.string());
    if (data.empty()) {
      dims = {img.height, img.width, files.size()};
      data.reserve(dims.size());
    } else if (img.height != dims.rows || img.width != dims.cols) {
      throw Error(Errc::dimension, file.string() + " is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                                       ", earlier frames are " + std::to_string(dims.cols) + "x" + std::to_string(dims.rows));
    }
    const double scale = 1.0 / static_cast<double>(img.maxval);
    for (std::uint8_t p : img.pixels) data.push_back(static_cast<double>(p) * scale);
  }
  return VideoVolume(dims, std::move(data));
}

Bytes encode_pgm(const VideoVolume& v, std::size_t frame) {
  ByteWriter w;
  w.raw("P5\n" + std::to_string(v.cols()) + " " + std::to_string(v.rows()) + "\n255\n");
  for (double x : v.frame(frame)) w.u8(static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)));
  return w.take();
}

VideoVolume load_video(const fs::path& path) {
  if (fs::is_directory(path)) return read_pgm_sequence(path);
  return decode_rvf(read_file(path), path.string());
}

std::vector<OverlayFrame> render_overlay(const VideoVolume& frames, const std::vector<BoundingBox>& boxes) {
  const std::size_t rows = frames.rows(), cols = frames.cols();
  std::vector<OverlayFrame> out(frames.frames());
  std::vector<std::vector<const BoundingBox*>> by_frame(frames.frames());
  for (const auto& b : boxes) {
    if (b.frame_index >= frames.frames())
      throw Error(Errc::dimension, "box for frame " + std::to_string(b.frame_index) + " but video has " +
                                       std::to_string(frames.frames()) + " frames");
    by_frame[b.frame_index].push_back(&b);
  }

  for (std::size_t t = 0; t < frames.frames(); ++t) {
    auto f = frames.frame(t);
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    const double range = *hi - *lo;
    std::vector<std::uint8_t> rgb(rows * cols * 3);
    for (std::size_t i = 0; i < rows * cols; ++i) {
      const double g = range > 0.0 ? (f[i] - *lo) / range : 0.0;
      const auto v = static_cast<std::uint8_t>(std::lround(g * 255.0));
      rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = v;
    }
    bool clipped = false;
    auto paint = [&](long r, long c) {
      if (r < 0 || c < 0 || r >= static_cast<long>(rows) || c >= static_cast<long>(cols)) {
        clipped = true;
        return;
      }
      const std::size_t i = 3 * (static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c));
      rgb[i] = 0;
      rgb[i + 1] = 255;
      rgb[i + 2] = 0;
    };
    for (const BoundingBox* b : by_frame[t]) {
      if (b->height == 0 || b->width == 0) continue;
      const long top = static_cast<long>(b->top), left = static_cast<long>(b->left);
      const long bottom = top + static_cast<long>(b->height) - 1, right = left + static_cast<long>(b->width) - 1;
      for (long c = left; c <= right; ++c) {
        paint(top, c);
        paint(bottom, c);
      }
      for (long r = top; r <= bottom; ++r) {
        paint(r, left);
        paint(r, right);
      }
    }
    ByteWriter w;
    w.raw("P6\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n");
    w.raw(rgb);
    out[t] = {w.take(), clipped};
  }
  return out;
}

}  // namespace smash
