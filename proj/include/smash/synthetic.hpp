#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smash/volume.hpp"

namespace smash {

// Spatio-temporal crop used as a filter training example.
struct Crop {
  std::size_t row = 0, col = 0, frame = 0;
  Dims3 dims;
};

VideoVolume extract_crop(const VideoVolume& v, const Crop& crop);

struct SyntheticConfig {
  std::size_t field = 128;        // square frame side
  std::size_t frames = 16;
  double blob = 12.0;             // square blob side
  double min_speed = 1.5;         // pixels per frame
  double max_speed = 2.5;
  double jitter = 0.0;            // start offset from the centred trajectory, uniform in [-jitter, jitter]
  double noise_sigma = 0.05;
  std::size_t instances = 10;     // per action
  std::size_t crop_size = 32;
  std::size_t crop_frames = 8;
  std::uint64_t seed = 1;
};

struct SyntheticVideo {
  VideoVolume video;
  std::size_t label = 0;
  Crop crop;
  std::vector<std::pair<double, double>> centers;  // (row, col) per frame
};

struct SyntheticSuite {
  std::vector<std::string> actions;  // "right", "left", "up"
  std::vector<SyntheticVideo> videos;
};

// Bright anti-aliased square translating right, left or up over a dark field
// with additive Gaussian noise. Videos are ordered instance-major.
SyntheticSuite make_synthetic_suite(const SyntheticConfig& config);

}  // namespace smash
