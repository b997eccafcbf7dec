#include "smash/localization.hpp"

#include <algorithm>
#include <cmath>

#include "smash/error.hpp"

namespace smash {

namespace {

struct Span1 {
  long lo, hi;  // inclusive
};

// Interval of `length` samples centred at `centre`, clipped to [0, limit).
Span1 centred(std::size_t centre, std::size_t length, std::size_t limit) {
  const long lo = static_cast<long>(centre) - static_cast<long>((length - 1) / 2);
  const long hi = lo + static_cast<long>(length) - 1;
  return {std::max(0L, lo), std::min(static_cast<long>(limit) - 1, hi)};
}

Span1 intersect(Span1 a, Span1 b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

}  // namespace

BoundingBox locate_frame(const ResponseVolume& r, std::size_t frame_offset, const Dims3& filter_dims, double lambda,
                         BoxMode mode) {
  const Dims3& d = r.dims();
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(Errc::dimension, "lambda must lie in (0, 1]");
  if (frame_offset >= d.frames)
    throw Error(Errc::dimension, "frame " + std::to_string(frame_offset) + " is outside the response (" +
                                     std::to_string(d.frames) + " frames)");
  if (filter_dims.rows < 1 || filter_dims.cols < 1) throw Error(Errc::dimension, "filter dims must be positive");

  auto slice = r.values.frame(frame_offset);
  const std::size_t peak = static_cast<std::size_t>(std::max_element(slice.begin(), slice.end()) - slice.begin());
  const std::size_t pr = peak / d.cols, pc = peak % d.cols;

  const std::size_t off_r = (filter_dims.rows - 1) / 2, off_c = (filter_dims.cols - 1) / 2;
  const std::size_t image_rows = d.rows + filter_dims.rows - 1, image_cols = d.cols + filter_dims.cols - 1;

  BoundingBox box;
  box.frame_index = frame_offset;
  box.center_row = pr + off_r;
  box.center_col = pc + off_c;

  if (mode == BoxMode::fixed) {
    box.top = pr;
    box.left = pc;
    box.height = std::min(filter_dims.rows, image_rows - pr);
    box.width = std::min(filter_dims.cols, image_cols - pc);
    box.gamma = 1.0;
    return box;
  }

  const Span1 rect_r = centred(pr, filter_dims.rows, d.rows);
  const Span1 rect_c = centred(pc, filter_dims.cols, d.cols);
  double lowest = slice[peak];
  for (long i = rect_r.lo; i <= rect_r.hi; ++i)
    for (long j = rect_c.lo; j <= rect_c.hi; ++j) lowest = std::min(lowest, slice[static_cast<std::size_t>(i) * d.cols + j]);
  const double shift = lowest < 0.0 ? lowest : 0.0;
  double total = 0.0;
  for (long i = rect_r.lo; i <= rect_r.hi; ++i)
    for (long j = rect_c.lo; j <= rect_c.hi; ++j) total += slice[static_cast<std::size_t>(i) * d.cols + j] - shift;

  auto mass_of = [&](Span1 br, Span1 bc) {
    double s = 0.0;
    for (long i = br.lo; i <= br.hi; ++i)
      for (long j = bc.lo; j <= bc.hi; ++j) s += slice[static_cast<std::size_t>(i) * d.cols + j] - shift;
    return s / total;
  };
  auto place = [&](Span1 br, Span1 bc, double mass, double gamma, bool degenerate) {
    box.top = static_cast<std::size_t>(br.lo) + off_r;
    box.left = static_cast<std::size_t>(bc.lo) + off_c;
    box.height = static_cast<std::size_t>(br.hi - br.lo + 1);
    box.width = static_cast<std::size_t>(bc.hi - bc.lo + 1);
    box.mass_fraction = mass;
    box.gamma = gamma;
    box.degenerate = degenerate;
    return box;
  };

  const Span1 point_r{static_cast<long>(pr), static_cast<long>(pr)};
  const Span1 point_c{static_cast<long>(pc), static_cast<long>(pc)};
  if (!(total > 0.0)) return place(point_r, point_c, 0.0, 0.0, true);

  for (std::size_t k = 100; k >= 1; --k) {
    const std::size_t h = (k * filter_dims.rows + 99) / 100;
    const std::size_t w = (k * filter_dims.cols + 99) / 100;
    const Span1 br = intersect(centred(pr, h, d.rows), rect_r);
    const Span1 bc = intersect(centred(pc, w, d.cols), rect_c);
    const double mass = mass_of(br, bc);
    if (mass <= lambda) return place(br, bc, mass, static_cast<double>(k) / 100.0, false);
  }
  return place(point_r, point_c, mass_of(point_r, point_c), 0.0, true);
}

std::vector<BoundingBox> locate_video(const ResponseVolume& r, const Dims3& filter_dims, double lambda, BoxMode mode) {
  std::vector<BoundingBox> boxes;
  boxes.reserve(r.dims().frames);
  for (std::size_t n = 0; n < r.dims().frames; ++n) boxes.push_back(locate_frame(r, n, filter_dims, lambda, mode));
  return boxes;
}

CenterErrorReport center_error(const std::vector<BoundingBox>& boxes,
                               const std::vector<std::pair<double, double>>& truth_centers) {
  if (boxes.size() != truth_centers.size())
    throw Error(Errc::alignment, std::to_string(boxes.size()) + " boxes but " + std::to_string(truth_centers.size()) +
                                     " ground-truth centres");
  CenterErrorReport rep;
  rep.displacements.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const double dr = static_cast<double>(boxes[i].center_row) - truth_centers[i].first;
    const double dc = static_cast<double>(boxes[i].center_col) - truth_centers[i].second;
    rep.displacements.push_back(std::hypot(dr, dc));
  }
  for (std::size_t k = 0; k < CenterErrorReport::thresholds.size(); ++k) {
    std::size_t within = 0;
    for (double dsp : rep.displacements) within += dsp <= CenterErrorReport::thresholds[k] ? 1 : 0;
    rep.fraction_within[k] = boxes.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(boxes.size());
  }
  return rep;
}

}  // namespace smash
