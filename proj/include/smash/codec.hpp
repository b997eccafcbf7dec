#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smash/inference.hpp"
#include "smash/localization.hpp"
#include "smash/mach.hpp"
#include "smash/sensing.hpp"
#include "smash/stsf.hpp"
#include "smash/volume.hpp"

namespace smash {

using Bytes = std::vector<std::uint8_t>;

// Little-endian primitive writer.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  Bytes& bytes() { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

// Little-endian reader; running past the end raises a truncation error that
// names the needed and available byte counts.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string context) : data_(data), context_(std::move(context)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string str(std::size_t n);
  void magic(std::string_view expected);
  // Fails early when fewer than n bytes remain.
  void require(std::size_t n) const;
  void expect_end() const;

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& context() const { return context_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string context_;
};

Bytes read_file(const std::filesystem::path& path);
// Writes to a temporary sibling then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// RVF1: "RVF1" + u32 P,Q,R + frames of P*Q f32, row-major.
Bytes encode_rvf(const VideoVolume& v);
VideoVolume decode_rvf(std::span<const std::uint8_t> bytes, const std::string& context = "RVF1");

// MCH1: "MCH1" + u32 L,M,N + f64 alpha,beta,gamma + u8 view kind + u32 label
// length + label + L*M*N f32 frame-major. Compensation matrices are not part
// of the record.
void encode_filter(ByteWriter& w, const MachFilter& f);
MachFilter decode_filter(ByteReader& r);
Bytes encode_filter(const MachFilter& f);
MachFilter decode_filter(std::span<const std::uint8_t> bytes, const std::string& context = "MCH1");

// BNK1: "BNK1" + u32 count + MCH1 records.
Bytes encode_bank(const FilterBank& bank);
FilterBank decode_bank(std::span<const std::uint8_t> bytes, const std::string& context = "BNK1");

// PHI1: "PHI1" + u8 distribution + u64 seed + u32 K,D + u8 materialized +
// optional K*D f32 row-major. Seed-only files are regenerated on read.
void encode_matrix_header(ByteWriter& w, const MeasurementMatrix& m, bool materialized);
Bytes encode_matrix(const MeasurementMatrix& m, bool materialized);
MeasurementMatrix decode_matrix(std::span<const std::uint8_t> bytes, const std::string& context = "PHI1");

// CMP1: "CMP1" + PHI1 header (seed only) + u32 P,Q,R + u8 derivative order +
// f32 sigma + (R - order) columns of K f32.
Bytes encode_compressed(const CompressedVideo& z);
CompressedVideo decode_compressed(std::span<const std::uint8_t> bytes, const std::string& context = "CMP1");

// MDL1: "MDL1" + u32 classes, dim + per class (dim f64 weights, f64 bias) +
// dim f64 mean + dim f64 std.
Bytes encode_model(const SvmModel& m);
SvmModel decode_model(std::span<const std::uint8_t> bytes, const std::string& context = "MDL1");

// Binary P5 frames, 8 bit, read in lexicographic file-name order. Samples
// are scaled to [0, 1] by the file's maxval.
VideoVolume read_pgm_sequence(const std::filesystem::path& dir);
Bytes encode_pgm(const VideoVolume& v, std::size_t frame);

// Loads .rvf files or PGM directories.
VideoVolume load_video(const std::filesystem::path& path);

struct OverlayFrame {
  Bytes ppm;
  bool clipped = false;
};

// P6 image per frame: min-max normalized grey replicated to RGB with each
// box frame drawn as a one-pixel (0, 255, 0) outline.
std::vector<OverlayFrame> render_overlay(const VideoVolume& frames, const std::vector<BoundingBox>& boxes);

}  // namespace smash
