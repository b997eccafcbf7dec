#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace smash {

// Extent of a space-time volume. rows = P (height), cols = Q (width),
// frames = R.
struct Dims3 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t frames = 0;

  std::size_t frame_size() const { return rows * cols; }
  std::size_t size() const { return rows * cols * frames; }
  bool operator==(const Dims3&) const = default;
};

std::string to_string(const Dims3& d);

// Dense real P x Q x R tensor. Storage is row-major within a frame and
// frame-major overall: index = (t * P + row) * Q + col.
class VideoVolume {
 public:
  VideoVolume() = default;
  explicit VideoVolume(Dims3 dims, double fill = 0.0);
  VideoVolume(Dims3 dims, std::vector<double> data);

  const Dims3& dims() const { return dims_; }
  std::size_t rows() const { return dims_.rows; }
  std::size_t cols() const { return dims_.cols; }
  std::size_t frames() const { return dims_.frames; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t row, std::size_t col, std::size_t frame) {
    return data_[(frame * dims_.rows + row) * dims_.cols + col];
  }
  double operator()(std::size_t row, std::size_t col, std::size_t frame) const {
    return data_[(frame * dims_.rows + row) * dims_.cols + col];
  }

  std::span<double> frame(std::size_t t) {
    return {data_.data() + t * dims_.frame_size(), dims_.frame_size()};
  }
  std::span<const double> frame(std::size_t t) const {
    return {data_.data() + t * dims_.frame_size(), dims_.frame_size()};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  // Checks the VideoVolume invariants; throws Error on violation.
  void validate() const;

  double sum_squares() const;

  VideoVolume& operator+=(const VideoVolume& other);
  VideoVolume& operator*=(double scale);

 private:
  Dims3 dims_;
  std::vector<double> data_;
};

VideoVolume operator+(VideoVolume a, const VideoVolume& b);
VideoVolume operator*(VideoVolume a, double scale);

// Complex spectrum on the same grid and layout as the volume it came from.
struct Spectrum3 {
  Dims3 dims;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(std::size_t u1, std::size_t u2, std::size_t u3) {
    return data[(u3 * dims.rows + u1) * dims.cols + u2];
  }
  const std::complex<double>& at(std::size_t u1, std::size_t u2, std::size_t u3) const {
    return data[(u3 * dims.rows + u1) * dims.cols + u2];
  }
};

enum class Provenance { oracle, smashed };

// Valid-region correlation output c(l, m, n).
struct ResponseVolume {
  VideoVolume values;
  Provenance provenance = Provenance::oracle;

  const Dims3& dims() const { return values.dims(); }
  double operator()(std::size_t l, std::size_t m, std::size_t n) const { return values(l, m, n); }
};

// Unnormalized forward 3D DFT, negative exponent.
Spectrum3 dft3(const VideoVolume& v);

// Inverse 3D DFT scaled by 1/(P*Q*R). The imaginary residue must stay below
// 1e-6 relative to the largest real magnitude; it is then discarded.
VideoVolume idft3(const Spectrum3& s);

// Relative imaginary residue idft3 would discard: max|Im| / max(max|Re|, tiny).
double imaginary_residue(const Spectrum3& s);

// c(l,m,n) = sum_{x,y,t} video(l+x, m+y, n+t) * filter(x, y, t) over offsets
// where the filter lies fully inside the video.
ResponseVolume correlate3(const VideoVolume& video, const VideoVolume& filter);

class Correlator;

// Spectrum of a filter zero-padded to a given video grid. Reusable against
// every Correlator with that grid.
class FilterSpectrum {
 public:
  FilterSpectrum(const VideoVolume& filter, const Dims3& video_dims);
  ~FilterSpectrum();
  FilterSpectrum(FilterSpectrum&&) noexcept;
  FilterSpectrum& operator=(FilterSpectrum&&) noexcept;

  const Dims3& filter_dims() const;
  const Dims3& video_dims() const;

 private:
  friend class Correlator;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Caches the spectrum of one video so many filters can be correlated against
// it. Filters must fit inside the video.
class Correlator {
 public:
  explicit Correlator(const VideoVolume& video);
  ~Correlator();
  Correlator(Correlator&&) noexcept;
  Correlator& operator=(Correlator&&) noexcept;

  const Dims3& video_dims() const;
  ResponseVolume correlate(const VideoVolume& filter, Provenance provenance = Provenance::oracle) const;
  ResponseVolume correlate(const FilterSpectrum& filter, Provenance provenance = Provenance::oracle) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Forward difference along time: out(t) = v(t+1) - v(t), R-1 frames.
VideoVolume temporal_derivative(const VideoVolume& v);

}  // namespace smash
