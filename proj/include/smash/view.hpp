#pragma once

#include <array>
#include <string>

#include "smash/volume.hpp"

namespace smash {

// Spatial affine map [A|b] acting on x_s = (x1, x2) = (column, row):
// source = A x_s + b.
struct AffineView {
  std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};  // a11, a12, a21, a22
  std::array<double, 2> b{0.0, 0.0};

  static AffineView identity() { return {}; }
  // a11,a12,a21,a22,b1,b2
  static AffineView parse(const std::string& text);

  double det() const { return a[0] * a[3] - a[1] * a[2]; }
  double abs_det() const;
  bool is_identity() const;
  std::string to_string() const;

  // Throws an invertibility error when |det A| is (numerically) zero.
  void check_invertible() const;

  bool operator==(const AffineView&) const = default;
};

// View whose sampling equals applying `first`, then `second`:
// warp(warp(v, first), second) == warp(v, compose(second, first)).
AffineView compose(const AffineView& second, const AffineView& first);

// Horizontal shear by `degrees` about the frame centre.
AffineView shear_view(double degrees, std::size_t rows, std::size_t cols);

// out(row, col, t) = bilinear sample of v at A (col, row) + b in frame t,
// zero outside the source support. Frame dims are preserved.
VideoVolume warp_volume(const VideoVolume& v, const AffineView& view);

}  // namespace smash
