#pragma once

// Slow reference implementations used to check the fast paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "smash/rng.hpp"
#include "smash/sensing.hpp"
#include "smash/volume.hpp"

namespace oracle {

using smash::Dims3;
using smash::VideoVolume;

inline VideoVolume random_volume(Dims3 dims, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  smash::SplitMix64 rng(seed);
  VideoVolume v(dims);
  for (double& x : v.data()) x = lo + (hi - lo) * rng.uniform();
  return v;
}

// Direct triple-sum DFT with the negative-exponent convention.
inline std::vector<std::complex<double>> dft3(const VideoVolume& v) {
  const auto& d = v.dims();
  std::vector<std::complex<double>> out(d.size());
  for (std::size_t u3 = 0; u3 < d.frames; ++u3)
    for (std::size_t u1 = 0; u1 < d.rows; ++u1)
      for (std::size_t u2 = 0; u2 < d.cols; ++u2) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < d.frames; ++t)
          for (std::size_t r = 0; r < d.rows; ++r)
            for (std::size_t c = 0; c < d.cols; ++c) {
              const double phase = -2.0 * std::numbers::pi *
                                   (static_cast<double>(u1 * r) / static_cast<double>(d.rows) +
                                    static_cast<double>(u2 * c) / static_cast<double>(d.cols) +
                                    static_cast<double>(u3 * t) / static_cast<double>(d.frames));
              acc += v(r, c, t) * std::polar(1.0, phase);
            }
        out[(u3 * d.rows + u1) * d.cols + u2] = acc;
      }
  return out;
}

// Real part of the direct inverse DFT, scaled by 1/(P*Q*R).
inline VideoVolume idft3_real(const std::vector<std::complex<double>>& spec, Dims3 d) {
  VideoVolume out(d);
  const double n = static_cast<double>(d.size());
  for (std::size_t t = 0; t < d.frames; ++t)
    for (std::size_t r = 0; r < d.rows; ++r)
      for (std::size_t c = 0; c < d.cols; ++c) {
        std::complex<double> acc = 0.0;
        for (std::size_t u3 = 0; u3 < d.frames; ++u3)
          for (std::size_t u1 = 0; u1 < d.rows; ++u1)
            for (std::size_t u2 = 0; u2 < d.cols; ++u2) {
              const double phase = 2.0 * std::numbers::pi *
                                   (static_cast<double>(u1 * r) / static_cast<double>(d.rows) +
                                    static_cast<double>(u2 * c) / static_cast<double>(d.cols) +
                                    static_cast<double>(u3 * t) / static_cast<double>(d.frames));
              acc += spec[(u3 * d.rows + u1) * d.cols + u2] * std::polar(1.0, phase);
            }
        out(r, c, t) = acc.real() / n;
      }
  return out;
}

// Separable Gaussian blob, peak 1, constant over time.
inline VideoVolume gaussian_blob(Dims3 d, double row0, double col0, double sigma) {
  VideoVolume v(d);
  for (std::size_t t = 0; t < d.frames; ++t)
    for (std::size_t r = 0; r < d.rows; ++r)
      for (std::size_t c = 0; c < d.cols; ++c) {
        const double dr = static_cast<double>(r) - row0, dc = static_cast<double>(c) - col0;
        v(r, c, t) = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      }
  return v;
}

// Valid-region correlation by direct summation.
inline VideoVolume correlate(const VideoVolume& video, const VideoVolume& filter) {
  const auto& vd = video.dims();
  const auto& fd = filter.dims();
  VideoVolume out(Dims3{vd.rows - fd.rows + 1, vd.cols - fd.cols + 1, vd.frames - fd.frames + 1});
  for (std::size_t n = 0; n < out.frames(); ++n)
    for (std::size_t l = 0; l < out.rows(); ++l)
      for (std::size_t m = 0; m < out.cols(); ++m) {
        double acc = 0.0;
        for (std::size_t t = 0; t < fd.frames; ++t)
          for (std::size_t x = 0; x < fd.rows; ++x)
            for (std::size_t y = 0; y < fd.cols; ++y) acc += video(l + x, m + y, n + t) * filter(x, y, t);
        out(l, m, n) = acc;
      }
  return out;
}

// Dense phi * x with x in column-major frame order.
inline std::vector<double> project(const smash::MeasurementMatrix& m, const std::vector<double>& x) {
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t k = 0; k < m.rows(); ++k)
    for (std::size_t j = 0; j < m.cols(); ++j) y[k] += static_cast<double>(m(k, j)) * x[j];
  return y;
}

inline std::vector<double> column_major(const VideoVolume& v, std::size_t t) {
  std::vector<double> x(v.rows() * v.cols());
  for (std::size_t c = 0; c < v.cols(); ++c)
    for (std::size_t r = 0; r < v.rows(); ++r) x[c * v.rows() + r] = v(r, c, t);
  return x;
}

// Literal compressed-domain correlation: every filter slice is placed at
// offset (l, m) in a zero frame, compressed, and its inner product taken
// with the compressed (differenced) video frame n + t.
inline VideoVolume smashed_literal(const smash::CompressedVideo& z, const VideoVolume& filter,
                                   const smash::MeasurementMatrix& m) {
  const std::size_t P = z.scene.rows, Q = z.scene.cols;
  const auto& fd = filter.dims();
  VideoVolume out(Dims3{P - fd.rows + 1, Q - fd.cols + 1, z.columns - fd.frames + 1});
  VideoVolume placed(Dims3{P, Q, 1});
  for (std::size_t l = 0; l < out.rows(); ++l)
    for (std::size_t mm = 0; mm < out.cols(); ++mm)
      for (std::size_t t = 0; t < fd.frames; ++t) {
        std::fill(placed.data().begin(), placed.data().end(), 0.0);
        for (std::size_t x = 0; x < fd.rows; ++x)
          for (std::size_t y = 0; y < fd.cols; ++y) placed(l + x, mm + y, 0) = filter(x, y, t);
        const std::vector<double> ph = project(m, column_major(placed, 0));
        for (std::size_t n = 0; n < out.frames(); ++n) {
          const auto zs = z.column(n + t);
          double dot = 0.0;
          for (std::size_t k = 0; k < ph.size(); ++k) dot += zs[k] * ph[k];
          out(l, mm, n) += dot;
        }
      }
  return out;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

// max |a - b| / max(max |b|, tiny)
inline double rel_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  return diff / std::max(max_abs(b), 1e-300);
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  return diff;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("smash_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
