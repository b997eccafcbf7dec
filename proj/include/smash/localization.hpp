#pragma once

#include <array>
#include <utility>
#include <vector>

#include "smash/volume.hpp"

namespace smash {

// Box in video-frame (pixel) coordinates. A response offset (l, m) is the
// top-left placement of the filter, so response coordinates are shifted by
// the filter half-extent ((L-1)/2, (M-1)/2) to land on the filter centre.
struct BoundingBox {
  std::size_t frame_index = 0;
  std::size_t center_row = 0;
  std::size_t center_col = 0;
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double mass_fraction = 0.0;
  double gamma = 0.0;
  bool degenerate = false;
};

enum class BoxMode {
  mass,   // largest centred rectangle with normalized mass <= lambda
  fixed,  // filter-sized box with the peak as its top-left corner
};

inline constexpr double kDefaultLambda = 0.7;

BoundingBox locate_frame(const ResponseVolume& r, std::size_t frame_offset, const Dims3& filter_dims,
                         double lambda = kDefaultLambda, BoxMode mode = BoxMode::mass);

std::vector<BoundingBox> locate_video(const ResponseVolume& r, const Dims3& filter_dims, double lambda = kDefaultLambda,
                                      BoxMode mode = BoxMode::mass);

struct CenterErrorReport {
  std::vector<double> displacements;
  static constexpr std::array<double, 5> thresholds{5.0, 10.0, 15.0, 20.0, 25.0};
  std::array<double, 5> fraction_within{};
};

// truth_centers holds (row, col) per frame.
CenterErrorReport center_error(const std::vector<BoundingBox>& boxes,
                               const std::vector<std::pair<double, double>>& truth_centers);

}  // namespace smash
