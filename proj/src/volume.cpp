#include "smash/volume.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "fftw_plans.hpp"
#include "smash/error.hpp"

namespace smash {

std::string to_string(const Dims3& d) {
  return std::to_string(d.rows) + "x" + std::to_string(d.cols) + "x" + std::to_string(d.frames);
}

namespace {

std::size_t checked_size(const Dims3& d) {
  const std::size_t limit = std::vector<double>().max_size();
  std::size_t n = d.rows;
  for (std::size_t f : {d.cols, d.frames}) {
    if (f != 0 && n > limit / f) throw Error(Errc::sizing, "volume " + to_string(d) + " exceeds addressable size");
    n *= f;
  }
  return n;
}

}  // namespace

VideoVolume::VideoVolume(Dims3 dims, double fill) : dims_(dims), data_(checked_size(dims), fill) {}

VideoVolume::VideoVolume(Dims3 dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  if (data_.size() != checked_size(dims_))
    throw Error(Errc::dimension, "data length " + std::to_string(data_.size()) + " does not match " + to_string(dims_));
}

void VideoVolume::validate() const {
  if (dims_.rows < 1 || dims_.cols < 1 || dims_.frames < 1)
    throw Error(Errc::dimension, "volume dims must be positive, got " + to_string(dims_));
  if (data_.size() != dims_.size()) throw Error(Errc::dimension, "data length mismatch");
  for (double x : data_)
    if (!std::isfinite(x)) throw Error(Errc::dimension, "volume contains a non-finite value");
}

double VideoVolume::sum_squares() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return s;
}

VideoVolume& VideoVolume::operator+=(const VideoVolume& other) {
  if (!(dims_ == other.dims_))
    throw Error(Errc::dimension, "cannot add " + to_string(other.dims_) + " to " + to_string(dims_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

VideoVolume& VideoVolume::operator*=(double scale) {
  for (double& x : data_) x *= scale;
  return *this;
}

VideoVolume operator+(VideoVolume a, const VideoVolume& b) { return a += b; }
VideoVolume operator*(VideoVolume a, double scale) { return a *= scale; }

namespace detail {

void check_fft_dims(const Dims3& dims) {
  checked_size(dims);
  if (dims.rows > INT_MAX || dims.cols > INT_MAX || dims.frames > INT_MAX)
    throw Error(Errc::sizing, "FFT grid " + to_string(dims) + " exceeds transform limits");
}

fftw_plan plan_for(PlanKind kind, const Dims3& dims) {
  static std::mutex mutex;
  static std::map<std::tuple<int, std::size_t, std::size_t, std::size_t>, fftw_plan> cache;

  check_fft_dims(dims);
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(static_cast<int>(kind), dims.frames, dims.rows, dims.cols);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const int n0 = static_cast<int>(dims.frames);
  const int n1 = static_cast<int>(dims.rows);
  const int n2 = static_cast<int>(dims.cols);
  const std::size_t real_n = dims.size();
  const std::size_t half_n = dims.frames * dims.rows * (dims.cols / 2 + 1);

  fftw_plan plan = nullptr;
  switch (kind) {
    case PlanKind::c2c_forward:
    case PlanKind::c2c_backward: {
      FftwBuffer<fftw_complex> in(real_n), out(real_n);
      plan = fftw_plan_dft_3d(n0, n1, n2, in.data(), out.data(),
                              kind == PlanKind::c2c_forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
      break;
    }
    case PlanKind::r2c: {
      FftwBuffer<double> in(real_n);
      FftwBuffer<fftw_complex> out(half_n);
      plan = fftw_plan_dft_r2c_3d(n0, n1, n2, in.data(), out.data(), FFTW_ESTIMATE);
      break;
    }
    case PlanKind::c2r: {
      FftwBuffer<fftw_complex> in(half_n);
      FftwBuffer<double> out(real_n);
      plan = fftw_plan_dft_c2r_3d(n0, n1, n2, in.data(), out.data(), FFTW_ESTIMATE);
      break;
    }
  }
  if (!plan) throw Error(Errc::sizing, "FFTW could not plan a transform on " + to_string(dims));
  cache.emplace(key, plan);
  return plan;
}

}  // namespace detail

using detail::FftwBuffer;
using detail::PlanKind;

Spectrum3 dft3(const VideoVolume& v) {
  v.validate();
  const Dims3& d = v.dims();
  fftw_plan plan = detail::plan_for(PlanKind::c2c_forward, d);
  FftwBuffer<fftw_complex> in(d.size()), out(d.size());
  auto src = v.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    in[i][0] = src[i];
    in[i][1] = 0.0;
  }
  fftw_execute_dft(plan, in.data(), out.data());

  Spectrum3 s{d, std::vector<std::complex<double>>(d.size())};
  for (std::size_t i = 0; i < d.size(); ++i) s.data[i] = {out[i][0], out[i][1]};
  return s;
}

namespace {

struct ComplexResult {
  std::vector<double> re;
  double max_re = 0.0;
  double max_im = 0.0;
};

ComplexResult inverse_complex(const Spectrum3& s) {
  const Dims3& d = s.dims;
  if (d.rows < 1 || d.cols < 1 || d.frames < 1 || s.data.size() != d.size())
    throw Error(Errc::dimension, "spectrum dims " + to_string(d) + " inconsistent with data length");
  fftw_plan plan = detail::plan_for(PlanKind::c2c_backward, d);
  FftwBuffer<fftw_complex> in(d.size()), out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    in[i][0] = s.data[i].real();
    in[i][1] = s.data[i].imag();
  }
  fftw_execute_dft(plan, in.data(), out.data());

  ComplexResult r;
  r.re.resize(d.size());
  const double scale = 1.0 / static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    r.re[i] = out[i][0] * scale;
    r.max_re = std::max(r.max_re, std::abs(r.re[i]));
    r.max_im = std::max(r.max_im, std::abs(out[i][1] * scale));
  }
  return r;
}

double relative_residue(const ComplexResult& r) {
  if (r.max_im == 0.0) return 0.0;
  return r.max_im / std::max(r.max_re, 1e-300);
}

}  // namespace

double imaginary_residue(const Spectrum3& s) { return relative_residue(inverse_complex(s)); }

VideoVolume idft3(const Spectrum3& s) {
  ComplexResult r = inverse_complex(s);
  const double residue = relative_residue(r);
  if (residue > 1e-6)
    throw Error(Errc::conjugate_symmetry,
                "inverse DFT left imaginary residue " + std::to_string(residue) + " (limit 1e-6 relative)");
  return VideoVolume(s.dims, std::move(r.re));
}

// ---------------------------------------------------------------------------

struct Correlator::Impl {
  Dims3 dims;
  std::size_t half_size = 0;
  FftwBuffer<fftw_complex> spectrum{0};
};

Correlator::Correlator(const VideoVolume& video) : impl_(std::make_unique<Impl>()) {
  video.validate();
  const Dims3& d = video.dims();
  fftw_plan plan = detail::plan_for(PlanKind::r2c, d);
  impl_->dims = d;
  impl_->half_size = d.frames * d.rows * (d.cols / 2 + 1);
  impl_->spectrum = FftwBuffer<fftw_complex>(impl_->half_size);
  FftwBuffer<double> in(d.size());
  std::copy(video.data().begin(), video.data().end(), in.data());
  fftw_execute_dft_r2c(plan, in.data(), impl_->spectrum.data());
}

Correlator::~Correlator() = default;
Correlator::Correlator(Correlator&&) noexcept = default;
Correlator& Correlator::operator=(Correlator&&) noexcept = default;

const Dims3& Correlator::video_dims() const { return impl_->dims; }

struct FilterSpectrum::Impl {
  Dims3 video;
  Dims3 filter;
  FftwBuffer<fftw_complex> spectrum{0};
};

FilterSpectrum::FilterSpectrum(const VideoVolume& filter, const Dims3& vd) : impl_(std::make_unique<Impl>()) {
  const Dims3& fd = filter.dims();
  if (fd.rows < 1 || fd.cols < 1 || fd.frames < 1) throw Error(Errc::dimension, "empty filter " + to_string(fd));
  if (fd.rows > vd.rows || fd.cols > vd.cols || fd.frames > vd.frames)
    throw Error(Errc::dimension, "filter " + to_string(fd) + " does not fit inside video " + to_string(vd));
  fftw_plan plan = detail::plan_for(PlanKind::r2c, vd);
  impl_->video = vd;
  impl_->filter = fd;

  // Zero-pad the filter to the video grid.
  FftwBuffer<double> padded(vd.size());
  std::fill(padded.data(), padded.data() + vd.size(), 0.0);
  for (std::size_t t = 0; t < fd.frames; ++t)
    for (std::size_t r = 0; r < fd.rows; ++r)
      for (std::size_t c = 0; c < fd.cols; ++c) padded[(t * vd.rows + r) * vd.cols + c] = filter(r, c, t);
  impl_->spectrum = FftwBuffer<fftw_complex>(vd.frames * vd.rows * (vd.cols / 2 + 1));
  fftw_execute_dft_r2c(plan, padded.data(), impl_->spectrum.data());
}

FilterSpectrum::~FilterSpectrum() = default;
FilterSpectrum::FilterSpectrum(FilterSpectrum&&) noexcept = default;
FilterSpectrum& FilterSpectrum::operator=(FilterSpectrum&&) noexcept = default;
const Dims3& FilterSpectrum::filter_dims() const { return impl_->filter; }
const Dims3& FilterSpectrum::video_dims() const { return impl_->video; }

ResponseVolume Correlator::correlate(const VideoVolume& filter, Provenance provenance) const {
  return correlate(FilterSpectrum(filter, impl_->dims), provenance);
}

ResponseVolume Correlator::correlate(const FilterSpectrum& filter, Provenance provenance) const {
  const Dims3& vd = impl_->dims;
  const Dims3& fd = filter.filter_dims();
  if (!(filter.video_dims() == vd))
    throw Error(Errc::dimension, "filter spectrum was padded to " + to_string(filter.video_dims()) + ", video is " +
                                     to_string(vd));

  // Video spectrum times conjugate filter spectrum yields correlation.
  FftwBuffer<fftw_complex> product(impl_->half_size);
  const auto& fs = filter.impl_->spectrum;
  for (std::size_t i = 0; i < impl_->half_size; ++i) {
    const double vr = impl_->spectrum[i][0], vi = impl_->spectrum[i][1];
    const double fr = fs[i][0], fi = fs[i][1];
    product[i][0] = vr * fr + vi * fi;
    product[i][1] = vi * fr - vr * fi;
  }
  FftwBuffer<double> full(vd.size());
  fftw_execute_dft_c2r(detail::plan_for(PlanKind::c2r, vd), product.data(), full.data());

  const Dims3 out{vd.rows - fd.rows + 1, vd.cols - fd.cols + 1, vd.frames - fd.frames + 1};
  VideoVolume values(out);
  const double scale = 1.0 / static_cast<double>(vd.size());
  for (std::size_t n = 0; n < out.frames; ++n)
    for (std::size_t l = 0; l < out.rows; ++l)
      for (std::size_t m = 0; m < out.cols; ++m) values(l, m, n) = full[(n * vd.rows + l) * vd.cols + m] * scale;
  return ResponseVolume{std::move(values), provenance};
}

ResponseVolume correlate3(const VideoVolume& video, const VideoVolume& filter) {
  const Dims3& vd = video.dims();
  const Dims3& fd = filter.dims();
  if (fd.rows > vd.rows || fd.cols > vd.cols || fd.frames > vd.frames)
    throw Error(Errc::dimension, "filter " + to_string(fd) + " does not fit inside video " + to_string(vd));
  return Correlator(video).correlate(filter);
}

VideoVolume temporal_derivative(const VideoVolume& v) {
  if (v.frames() < 2)
    throw Error(Errc::insufficient_frames, "temporal derivative needs at least 2 frames, got " + std::to_string(v.frames()));
  const Dims3 out{v.rows(), v.cols(), v.frames() - 1};
  VideoVolume d(out);
  for (std::size_t t = 0; t + 1 < v.frames(); ++t) {
    auto a = v.frame(t);
    auto b = v.frame(t + 1);
    auto o = d.frame(t);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = b[i] - a[i];
  }
  return d;
}

}  // namespace smash
