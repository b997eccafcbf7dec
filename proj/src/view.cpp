#include "smash/view.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "smash/error.hpp"

namespace smash {

AffineView AffineView::parse(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::format, "affine view '" + text + "' has a non-numeric entry '" + item + "'");
    }
  }
  if (values.size() != 6)
    throw Error(Errc::format, "affine view needs six values a11,a12,a21,a22,b1,b2, got " + std::to_string(values.size()));
  AffineView v;
  v.a = {values[0], values[1], values[2], values[3]};
  v.b = {values[4], values[5]};
  return v;
}

double AffineView::abs_det() const { return std::abs(det()); }

bool AffineView::is_identity() const { return *this == AffineView::identity(); }

std::string AffineView::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << a[0] << ',' << a[1] << ',' << a[2] << ',' << a[3] << ',' << b[0] << ',' << b[1];
  return os.str();
}

void AffineView::check_invertible() const {
  const double scale = std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2]), std::abs(a[3])});
  if (!(abs_det() > 1e-12 * scale * scale) || !std::isfinite(det()))
    throw Error(Errc::invertibility, "affine view [" + to_string() + "] has a singular linear part");
}

AffineView compose(const AffineView& second, const AffineView& first) {
  const auto& p = first.a;
  const auto& q = second.a;
  AffineView out;
  out.a = {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]};
  out.b = {p[0] * second.b[0] + p[1] * second.b[1] + first.b[0], p[2] * second.b[0] + p[3] * second.b[1] + first.b[1]};
  return out;
}

AffineView shear_view(double degrees, std::size_t rows, std::size_t /*cols*/) {
  const double k = std::tan(degrees * std::numbers::pi / 180.0);
  const double centre_row = (static_cast<double>(rows) - 1.0) / 2.0;
  AffineView v;
  v.a = {1.0, k, 0.0, 1.0};
  v.b = {-k * centre_row, 0.0};
  return v;
}

namespace {

double sample_or_zero(std::span<const double> frame, std::size_t rows, std::size_t cols, long r, long c) {
  if (r < 0 || c < 0 || r >= static_cast<long>(rows) || c >= static_cast<long>(cols)) return 0.0;
  return frame[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
}

double bilinear(std::span<const double> frame, std::size_t rows, std::size_t cols, double x1, double x2) {
  const double fc = std::floor(x1), fr = std::floor(x2);
  if (fc < -1.0 || fr < -1.0 || fc > static_cast<double>(cols) || fr > static_cast<double>(rows)) return 0.0;
  const long c0 = static_cast<long>(fc), r0 = static_cast<long>(fr);
  const double wc = x1 - fc, wr = x2 - fr;
  double v = sample_or_zero(frame, rows, cols, r0, c0);
  if (wc == 0.0 && wr == 0.0) return v;
  v *= (1.0 - wc) * (1.0 - wr);
  if (wc != 0.0) v += wc * (1.0 - wr) * sample_or_zero(frame, rows, cols, r0, c0 + 1);
  if (wr != 0.0) v += (1.0 - wc) * wr * sample_or_zero(frame, rows, cols, r0 + 1, c0);
  if (wc != 0.0 && wr != 0.0) v += wc * wr * sample_or_zero(frame, rows, cols, r0 + 1, c0 + 1);
  return v;
}

}  // namespace

VideoVolume warp_volume(const VideoVolume& v, const AffineView& view) {
  view.check_invertible();
  const std::size_t rows = v.rows(), cols = v.cols();
  VideoVolume out(v.dims());
  for (std::size_t t = 0; t < v.frames(); ++t) {
    auto src = v.frame(t);
    auto dst = out.frame(t);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double x1 = view.a[0] * static_cast<double>(c) + view.a[1] * static_cast<double>(r) + view.b[0];
        const double x2 = view.a[2] * static_cast<double>(c) + view.a[3] * static_cast<double>(r) + view.b[1];
        dst[r * cols + c] = bilinear(src, rows, cols, x1, x2);
      }
    }
  }
  return out;
}

}  // namespace smash
