#include "smash/sensing.hpp"

#include <cmath>

#include "smash/error.hpp"
#include "smash/parallel.hpp"
#include "smash/rng.hpp"

namespace smash {

const char* to_string(Distribution d) { return d == Distribution::gaussian ? "gaussian" : "bernoulli"; }

Distribution parse_distribution(const std::string& name) {
  if (name == "gaussian") return Distribution::gaussian;
  if (name == "bernoulli") return Distribution::bernoulli;
  throw Error(Errc::format, "unknown distribution '" + name + "' (expected gaussian or bernoulli)");
}

double MeasurementMatrix::scale() const { return 1.0 / std::sqrt(static_cast<double>(rows_)); }

void MeasurementMatrix::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) throw Error(Errc::dimension, "matrix-vector size mismatch");
  for (std::size_t r = 0; r < rows_; ++r) {
    const float* row = entries_.data() + r * cols_;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += static_cast<double>(row[c]) * x[c];
    y[r] = acc;
  }
}

void MeasurementMatrix::apply_transpose(std::span<const double> y, std::span<double> x) const {
  if (x.size() != cols_ || y.size() != rows_) throw Error(Errc::dimension, "adjoint size mismatch");
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const float* row = entries_.data() + r * cols_;
    const double yr = y[r];
    for (std::size_t c = 0; c < cols_; ++c) x[c] += static_cast<double>(row[c]) * yr;
  }
}

MeasurementMatrix MeasurementMatrix::from_entries(Distribution distribution, std::uint64_t seed, std::size_t rows,
                                                  std::size_t cols, std::vector<float> entries) {
  if (rows == 0 || cols == 0) throw Error(Errc::dimension, "matrix needs K >= 1 and D >= 1");
  if (rows > cols) throw Error(Errc::rank, "K=" + std::to_string(rows) + " exceeds D=" + std::to_string(cols));
  if (entries.size() != rows * cols) throw Error(Errc::dimension, "materialized entry count does not equal K*D");
  MeasurementMatrix m;
  m.distribution_ = distribution;
  m.seed_ = seed;
  m.rows_ = rows;
  m.cols_ = cols;
  m.entries_ = std::move(entries);
  return m;
}

MeasurementMatrix make_matrix(Distribution distribution, std::uint64_t seed, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw Error(Errc::dimension, "matrix needs K >= 1 and D >= 1");
  if (rows > cols) throw Error(Errc::rank, "K=" + std::to_string(rows) + " exceeds D=" + std::to_string(cols));

  MeasurementMatrix m;
  m.distribution_ = distribution;
  m.seed_ = seed;
  m.rows_ = rows;
  m.cols_ = cols;
  m.entries_.resize(rows * cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));

  parallel_for(rows, [&](std::size_t r) {
    SplitMix64 rng = substream(seed, r);
    float* out = m.entries_.data() + r * cols;
    if (distribution == Distribution::gaussian) {
      fill_gaussian(rng, [&](std::size_t i, double g) { out[i] = static_cast<float>(g * scale); }, cols);
    } else {
      for (std::size_t c = 0; c < cols; ++c) out[c] = static_cast<float>(rng.sign() * scale);
    }
  });
  return m;
}

void CompressedVideo::check_consistent(const MeasurementMatrix& m) const {
  if (m.rows() != measurements_per_frame || m.cols() != scene.frame_size())
    throw Error(Errc::dimension, "compressed video (K=" + std::to_string(measurements_per_frame) + ", D=" +
                                     std::to_string(scene.frame_size()) + ") does not match matrix (K=" +
                                     std::to_string(m.rows()) + ", D=" + std::to_string(m.cols()) + ")");
  if (measurements.size() != columns * measurements_per_frame)
    throw Error(Errc::dimension, "measurement array length does not equal columns*K");
}

std::vector<double> flatten_frame(const VideoVolume& v, std::size_t t) {
  std::vector<double> x(v.rows() * v.cols());
  for (std::size_t c = 0; c < v.cols(); ++c)
    for (std::size_t r = 0; r < v.rows(); ++r) x[c * v.rows() + r] = v(r, c, t);
  return x;
}

CompressedVideo compress(const VideoVolume& v, const MeasurementMatrix& m, double noise_sigma,
                         std::uint64_t noise_seed) {
  v.validate();
  if (m.cols() != v.rows() * v.cols())
    throw Error(Errc::dimension, "matrix has D=" + std::to_string(m.cols()) + " but frames are " +
                                     std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw Error(Errc::dimension, "noise sigma must be finite and >= 0");

  CompressedVideo z;
  z.measurements_per_frame = m.rows();
  z.columns = v.frames();
  z.measurements.assign(z.columns * m.rows(), 0.0);
  z.scene = v.dims();
  z.distribution = m.distribution();
  z.matrix_seed = m.seed();
  z.noise_sigma = noise_sigma;
  z.derivative_order = 0;

  parallel_for(v.frames(), [&](std::size_t t) {
    const auto x = flatten_frame(v, t);
    auto y = z.column(t);
    m.apply(x, y);
    if (noise_sigma > 0.0) {
      SplitMix64 rng = tagged_stream(noise_seed, kNoiseTag, t);
      fill_gaussian(rng, [&](std::size_t i, double g) { y[i] += noise_sigma * g; }, y.size());
    }
  });
  return z;
}

CompressedVideo compressed_temporal_derivative(const CompressedVideo& z) {
  if (z.derivative_order != 0) throw Error(Errc::order, "measurements are already temporally differenced");
  if (z.columns < 2)
    throw Error(Errc::insufficient_frames, "temporal differencing needs at least 2 columns, got " + std::to_string(z.columns));
  CompressedVideo d = z;
  d.columns = z.columns - 1;
  d.derivative_order = 1;
  d.measurements.resize(d.columns * z.measurements_per_frame);
  for (std::size_t t = 0; t < d.columns; ++t) {
    auto a = z.column(t);
    auto b = z.column(t + 1);
    auto o = d.column(t);
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = b[k] - a[k];
  }
  return d;
}

VideoVolume backproject(const CompressedVideo& z, const MeasurementMatrix& m) {
  z.check_consistent(m);
  const std::size_t rows = z.scene.rows, cols = z.scene.cols;
  VideoVolume out(Dims3{rows, cols, z.columns});
  parallel_for(z.columns, [&](std::size_t t) {
    std::vector<double> x(rows * cols);
    m.apply_transpose(z.column(t), x);
    auto frame = out.frame(t);
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t r = 0; r < rows; ++r) frame[r * cols + c] = x[c * rows + r];
  });
  return out;
}

namespace {

std::vector<double> unit_gaussian(SplitMix64& rng, std::size_t n) {
  std::vector<double> v(n);
  fill_gaussian(rng, [&](std::size_t i, double g) { v[i] = g; }, n);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

JlReport jl_report(const MeasurementMatrix& m, std::size_t trial_count, std::uint64_t vector_seed, PairMode mode) {
  if (trial_count == 0) throw Error(Errc::arity, "jl report needs at least one trial");
  const std::size_t d = m.cols(), k = m.rows();
  JlReport rep;
  rep.measurements = k;
  rep.dimension = d;
  rep.trial_count = trial_count;
  rep.predicted_scale = 1.0 / std::sqrt(static_cast<double>(k));
  rep.epsilon_samples.resize(trial_count);

  parallel_for(trial_count, [&](std::size_t trial) {
    SplitMix64 rng = tagged_stream(vector_seed, kJlVectorTag, trial);
    std::vector<double> a = unit_gaussian(rng, d);
    std::vector<double> b;
    if (mode == PairMode::self) {
      b = a;
    } else {
      b = unit_gaussian(rng, d);
      if (mode == PairMode::orthogonal) {
        const double proj = dot(a, b);
        double norm = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          b[i] -= proj * a[i];
          norm += b[i] * b[i];
        }
        norm = std::sqrt(norm);
        for (double& x : b) x /= norm;
      }
    }
    std::vector<double> pa(k), pb(k);
    m.apply(a, pa);
    if (mode == PairMode::self) {
      pb = pa;
    } else {
      m.apply(b, pb);
    }
    rep.epsilon_samples[trial] = std::abs(dot(pa, pb) - dot(a, b));
  });

  double sum = 0.0;
  for (double e : rep.epsilon_samples) {
    sum += e;
    rep.max_abs_error = std::max(rep.max_abs_error, e);
  }
  rep.mean_abs_error = sum / static_cast<double>(trial_count);
  return rep;
}

JlReport jl_report(const JlParams& params, std::size_t trial_count, std::uint64_t vector_seed, PairMode mode) {
  return jl_report(make_matrix(params.distribution, params.matrix_seed, params.measurements, params.dimension),
                   trial_count, vector_seed, mode);
}

}  // namespace smash
