#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smash/volume.hpp"

namespace smash {

enum class Distribution : std::uint8_t { gaussian = 0, bernoulli = 1 };

const char* to_string(Distribution d);
Distribution parse_distribution(const std::string& name);

// K x D random projection. Entries are float(draw / sqrt(K)); columns index
// pixels in column-major frame order (concatenated columns of a frame).
class MeasurementMatrix {
 public:
  MeasurementMatrix() = default;

  Distribution distribution() const { return distribution_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double scale() const;

  std::span<const float> entries() const { return entries_; }
  std::span<const float> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }
  float operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  // y = phi x, x of length D.
  void apply(std::span<const double> x, std::span<double> y) const;
  // x = phi^T y, y of length K.
  void apply_transpose(std::span<const double> y, std::span<double> x) const;

  bool same_source(const MeasurementMatrix& other) const {
    return distribution_ == other.distribution_ && seed_ == other.seed_ && rows_ == other.rows_ && cols_ == other.cols_;
  }

  // Adopts stored entries (materialized matrix files). Entries must be K*D long.
  static MeasurementMatrix from_entries(Distribution distribution, std::uint64_t seed, std::size_t rows,
                                        std::size_t cols, std::vector<float> entries);

 private:
  friend MeasurementMatrix make_matrix(Distribution, std::uint64_t, std::size_t, std::size_t);

  Distribution distribution_ = Distribution::gaussian;
  std::uint64_t seed_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> entries_;
};

// Row r is drawn from substream(seed, r); output does not depend on thread
// count.
MeasurementMatrix make_matrix(Distribution distribution, std::uint64_t seed, std::size_t rows, std::size_t cols);

// Z(t) = phi I(t) + w(t) for every frame, stored column by column.
struct CompressedVideo {
  std::size_t measurements_per_frame = 0;  // K
  std::size_t columns = 0;                 // R, or R-1 after differencing
  std::vector<double> measurements;        // columns x K, column t contiguous
  Dims3 scene;                             // (P, Q, R) of the sensed video
  Distribution distribution = Distribution::gaussian;
  std::uint64_t matrix_seed = 0;
  double noise_sigma = 0.0;
  int derivative_order = 0;

  std::span<const double> column(std::size_t t) const {
    return {measurements.data() + t * measurements_per_frame, measurements_per_frame};
  }
  std::span<double> column(std::size_t t) {
    return {measurements.data() + t * measurements_per_frame, measurements_per_frame};
  }

  void check_consistent(const MeasurementMatrix& m) const;
};

// Frame as a column-major vector (rows fastest).
std::vector<double> flatten_frame(const VideoVolume& v, std::size_t t);

// noise_seed drives w(t); frame t uses tagged_stream(noise_seed, kNoiseTag, t).
CompressedVideo compress(const VideoVolume& v, const MeasurementMatrix& m, double noise_sigma = 0.0,
                         std::uint64_t noise_seed = 0);

CompressedVideo compressed_temporal_derivative(const CompressedVideo& z);

// Adjoint lift phi^T Z(t) per column; this is not a reconstruction.
VideoVolume backproject(const CompressedVideo& z, const MeasurementMatrix& m);

struct JlReport {
  std::size_t measurements = 0;  // K
  std::size_t dimension = 0;     // D
  std::size_t trial_count = 0;
  std::vector<double> epsilon_samples;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  double predicted_scale = 0.0;  // 1/sqrt(K)
};

enum class PairMode {
  orthogonal,  // b is a's orthogonal complement direction
  random,      // independent unit vectors
  self,        // b = a
};

struct JlParams {
  Distribution distribution = Distribution::gaussian;
  std::uint64_t matrix_seed = 0;
  std::size_t measurements = 0;
  std::size_t dimension = 0;
};

JlReport jl_report(const JlParams& params, std::size_t trial_count, std::uint64_t vector_seed,
                   PairMode mode = PairMode::orthogonal);

// Same as above against an already generated matrix.
JlReport jl_report(const MeasurementMatrix& m, std::size_t trial_count, std::uint64_t vector_seed,
                   PairMode mode = PairMode::orthogonal);

}  // namespace smash
