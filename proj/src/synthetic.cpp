#include "smash/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "smash/error.hpp"
#include "smash/rng.hpp"

namespace smash {

VideoVolume extract_crop(const VideoVolume& v, const Crop& crop) {
  const Dims3& d = crop.dims;
  if (d.rows == 0 || d.cols == 0 || d.frames == 0) throw Error(Errc::dimension, "empty crop");
  if (crop.row + d.rows > v.rows() || crop.col + d.cols > v.cols() || crop.frame + d.frames > v.frames())
    throw Error(Errc::dimension, "crop " + to_string(d) + " at (" + std::to_string(crop.row) + "," +
                                     std::to_string(crop.col) + "," + std::to_string(crop.frame) +
                                     ") exceeds video " + to_string(v.dims()));
  VideoVolume out(d);
  for (std::size_t t = 0; t < d.frames; ++t)
    for (std::size_t r = 0; r < d.rows; ++r)
      for (std::size_t c = 0; c < d.cols; ++c) out(r, c, t) = v(crop.row + r, crop.col + c, crop.frame + t);
  return out;
}

namespace {

// Length of [a, a+1) intersected with [lo, lo+len).
double overlap(double a, double lo, double len) {
  return std::max(0.0, std::min(a + 1.0, lo + len) - std::max(a, lo));
}

}  // namespace

SyntheticSuite make_synthetic_suite(const SyntheticConfig& cfg) {
  if (cfg.crop_frames < 2 || cfg.crop_frames > cfg.frames || cfg.crop_size > cfg.field)
    throw Error(Errc::dimension, "synthetic crop does not fit the generated videos");
  SyntheticSuite suite;
  suite.actions = {"right", "left", "up"};
  const std::array<std::pair<double, double>, 3> direction{{{0.0, 1.0}, {0.0, -1.0}, {-1.0, 0.0}}};
  const double field = static_cast<double>(cfg.field);
  const double travel_frames = static_cast<double>(cfg.frames - 1);

  for (std::size_t inst = 0; inst < cfg.instances; ++inst) {
    for (std::size_t a = 0; a < suite.actions.size(); ++a) {
      SplitMix64 rng = tagged_stream(cfg.seed, kSynthTag, inst * suite.actions.size() + a);
      const double speed = cfg.min_speed + (cfg.max_speed - cfg.min_speed) * rng.uniform();
      const auto [dr, dc] = direction[a];
      const double travel = speed * travel_frames;
      // Trajectory centred in the field, then jittered and kept inside it.
      auto start = [&](double d) {
        const double centred = (field - cfg.blob) / 2.0 - d * travel / 2.0;
        const double lo = d < 0.0 ? travel : 0.0;
        const double hi = field - cfg.blob - (d > 0.0 ? travel : 0.0);
        return std::clamp(centred + cfg.jitter * (2.0 * rng.uniform() - 1.0), lo, hi);
      };
      const double y0 = start(dr);
      const double x0 = start(dc);

      SyntheticVideo sv;
      sv.label = a;
      sv.video = VideoVolume(Dims3{cfg.field, cfg.field, cfg.frames});
      for (std::size_t t = 0; t < cfg.frames; ++t) {
        const double y = y0 + dr * speed * static_cast<double>(t);
        const double x = x0 + dc * speed * static_cast<double>(t);
        sv.centers.emplace_back(y + cfg.blob / 2.0 - 0.5, x + cfg.blob / 2.0 - 0.5);
        const auto r_lo = static_cast<std::size_t>(std::max(0.0, std::floor(y)));
        const auto r_hi = std::min(cfg.field, static_cast<std::size_t>(std::ceil(y + cfg.blob)));
        const auto c_lo = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
        const auto c_hi = std::min(cfg.field, static_cast<std::size_t>(std::ceil(x + cfg.blob)));
        for (std::size_t r = r_lo; r < r_hi; ++r) {
          const double wy = overlap(static_cast<double>(r), y, cfg.blob);
          for (std::size_t c = c_lo; c < c_hi; ++c) sv.video(r, c, t) = wy * overlap(static_cast<double>(c), x, cfg.blob);
        }
      }
      if (cfg.noise_sigma > 0.0) {
        SplitMix64 noise = tagged_stream(cfg.seed, kSynthNoiseTag, inst * suite.actions.size() + a);
        auto data = sv.video.data();
        fill_gaussian(noise, [&](std::size_t i, double g) { data[i] += cfg.noise_sigma * g; }, data.size());
      }

      // Training crop centred on the blob's mid-window position.
      sv.crop.frame = (cfg.frames - cfg.crop_frames) / 2;
      sv.crop.dims = Dims3{cfg.crop_size, cfg.crop_size, cfg.crop_frames};
      const double mid_t = static_cast<double>(sv.crop.frame) + (static_cast<double>(cfg.crop_frames) - 1.0) / 2.0;
      const double mid_r = y0 + dr * speed * mid_t + cfg.blob / 2.0 - 0.5;
      const double mid_c = x0 + dc * speed * mid_t + cfg.blob / 2.0 - 0.5;
      const double half = (static_cast<double>(cfg.crop_size) - 1.0) / 2.0;
      const double max_origin = field - static_cast<double>(cfg.crop_size);
      sv.crop.row = static_cast<std::size_t>(std::clamp(std::round(mid_r - half), 0.0, max_origin));
      sv.crop.col = static_cast<std::size_t>(std::clamp(std::round(mid_c - half), 0.0, max_origin));
      suite.videos.push_back(std::move(sv));
    }
  }
  return suite;
}

}  // namespace smash
