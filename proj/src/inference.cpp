#include "smash/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smash/error.hpp"
#include "smash/parallel.hpp"
#include "smash/rng.hpp"

namespace smash {

namespace {

struct CellMax {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t linear = 0;
  Index3 at;
  bool set = false;

  void offer(double v, std::size_t lin, const Index3& idx) {
    if (!set || v > value || (v == value && lin < linear)) {
      value = v;
      linear = lin;
      at = idx;
      set = true;
    }
  }
  void merge(const CellMax& o) {
    if (o.set) offer(o.value, o.linear, o.at);
  }
};

std::size_t cell_of(std::size_t i, std::size_t dim, std::size_t cells) {
  // Largest c with floor(c * dim / cells) <= i.
  std::size_t c = (i * cells) / dim;
  while (c + 1 < cells && ((c + 1) * dim) / cells <= i) ++c;
  while (c > 0 && (c * dim) / cells > i) --c;
  return c;
}

}  // namespace

PooledFeatures max_pool_features(const ResponseVolume& r) {
  const Dims3& d = r.dims();
  if (d.rows < 4 || d.cols < 4 || d.frames < 4)
    throw Error(Errc::pooling_resolution, "response " + to_string(d) + " is too small for 3-level pooling (need >= 4 per axis)");

  std::vector<std::size_t> row_cell(d.rows), col_cell(d.cols), frame_cell(d.frames);
  for (std::size_t i = 0; i < d.rows; ++i) row_cell[i] = cell_of(i, d.rows, 4);
  for (std::size_t i = 0; i < d.cols; ++i) col_cell[i] = cell_of(i, d.cols, 4);
  for (std::size_t i = 0; i < d.frames; ++i) frame_cell[i] = cell_of(i, d.frames, 4);

  std::array<CellMax, 64> fine;
  auto data = r.values.data();
  std::size_t lin = 0;
  for (std::size_t t = 0; t < d.frames; ++t)
    for (std::size_t row = 0; row < d.rows; ++row)
      for (std::size_t col = 0; col < d.cols; ++col, ++lin) {
        const std::size_t cell = (frame_cell[t] * 4 + row_cell[row]) * 4 + col_cell[col];
        fine[cell].offer(data[lin], lin, Index3{row, col, t});
      }

  std::array<CellMax, 8> mid;
  CellMax top;
  for (std::size_t ft = 0; ft < 4; ++ft)
    for (std::size_t fr = 0; fr < 4; ++fr)
      for (std::size_t fc = 0; fc < 4; ++fc) {
        const CellMax& c = fine[(ft * 4 + fr) * 4 + fc];
        mid[((ft / 2) * 2 + fr / 2) * 2 + fc / 2].merge(c);
        top.merge(c);
      }

  PooledFeatures out;
  out.values[0] = top.value;
  out.peaks[0] = top.at;
  for (std::size_t i = 0; i < 8; ++i) {
    out.values[1 + i] = mid[i].value;
    out.peaks[1 + i] = mid[i].at;
  }
  for (std::size_t i = 0; i < 64; ++i) {
    out.values[9 + i] = fine[i].value;
    out.peaks[9 + i] = fine[i].at;
  }
  return out;
}

double peak_to_sidelobe(const ResponseVolume& r, const Index3& peak, bool* degenerate) {
  const Dims3& d = r.dims();
  const long outer = static_cast<long>(kSidelobeOuter / 2);
  const long inner = static_cast<long>(kSidelobeInner / 2);
  auto range = [&](std::size_t centre, std::size_t dim) {
    const long lo = std::max(0L, static_cast<long>(centre) - outer);
    const long hi = std::min(static_cast<long>(dim) - 1, static_cast<long>(centre) + outer);
    return std::pair{lo, hi};
  };
  const auto [r0, r1] = range(peak.row, d.rows);
  const auto [c0, c1] = range(peak.col, d.cols);
  const auto [t0, t1] = range(peak.frame, d.frames);

  double sum = 0.0, sum_sq = 0.0, scale = 0.0;
  std::size_t count = 0;
  for (long t = t0; t <= t1; ++t)
    for (long row = r0; row <= r1; ++row)
      for (long col = c0; col <= c1; ++col) {
        if (std::abs(t - static_cast<long>(peak.frame)) <= inner &&
            std::abs(row - static_cast<long>(peak.row)) <= inner && std::abs(col - static_cast<long>(peak.col)) <= inner)
          continue;
        const double v = r.values(static_cast<std::size_t>(row), static_cast<std::size_t>(col), static_cast<std::size_t>(t));
        sum += v;
        ++count;
        scale = std::max(scale, std::abs(v));
      }
  if (degenerate) *degenerate = count == 0;
  if (count == 0) return 0.0;

  const double mean = sum / static_cast<double>(count);
  for (long t = t0; t <= t1; ++t)
    for (long row = r0; row <= r1; ++row)
      for (long col = c0; col <= c1; ++col) {
        if (std::abs(t - static_cast<long>(peak.frame)) <= inner &&
            std::abs(row - static_cast<long>(peak.row)) <= inner && std::abs(col - static_cast<long>(peak.col)) <= inner)
          continue;
        const double dv =
            r.values(static_cast<std::size_t>(row), static_cast<std::size_t>(col), static_cast<std::size_t>(t)) - mean;
        sum_sq += dv * dv;
      }
  const double sigma = std::sqrt(sum_sq / static_cast<double>(count));
  if (sigma < 1e-12 * std::max(1.0, scale)) return 0.0;
  return (r.values(peak.row, peak.col, peak.frame) - mean) / sigma;
}

PsrFeatures psr_features(const ResponseVolume& r, const std::array<Index3, kPoolCells>& peaks) {
  PsrFeatures out;
  for (std::size_t k = 0; k < kPoolCells; ++k) {
    bool degenerate = false;
    out.values[k] = peak_to_sidelobe(r, peaks[k], &degenerate);
    out.degenerate[k] = degenerate;
  }
  return out;
}

FeatureVector feature_vector(const std::vector<ResponseVolume>& responses) {
  FeatureVector fv;
  fv.values.resize(responses.size() * kBlockSize);
  parallel_for(responses.size(), [&](std::size_t i) {
    const PooledFeatures pooled = max_pool_features(responses[i]);
    const PsrFeatures psr = psr_features(responses[i], pooled.peaks);
    double* block = fv.values.data() + i * kBlockSize;
    std::copy(pooled.values.begin(), pooled.values.end(), block);
    std::copy(psr.values.begin(), psr.values.end(), block + kPoolCells);
  });
  return fv;
}

std::vector<std::string> feature_names(std::size_t bank_size) {
  std::vector<std::string> names;
  names.reserve(bank_size * kBlockSize);
  for (std::size_t f = 0; f < bank_size; ++f) {
    for (std::size_t k = 0; k < kPoolCells; ++k) names.push_back("f" + std::to_string(f) + "_pool" + std::to_string(k));
    for (std::size_t k = 0; k < kPoolCells; ++k) names.push_back("f" + std::to_string(f) + "_psr" + std::to_string(k));
  }
  return names;
}

// --- linear SVM --------------------------------------------------------------

double hinge_objective(std::span<const double> w, double b, const std::vector<std::vector<double>>& x,
                       std::span<const double> y, double lambda) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[i][j];
    loss += std::max(0.0, 1.0 - y[i] * s);
  }
  return 0.5 * lambda * reg + loss / static_cast<double>(x.size());
}

std::vector<double> hinge_subgradient(std::span<const double> w, double b, const std::vector<std::vector<double>>& x,
                                      std::span<const double> y, double lambda) {
  std::vector<double> g(w.size() + 1, 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) g[j] = lambda * w[j];
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[i][j];
    if (y[i] * s < 1.0) {
      for (std::size_t j = 0; j < w.size(); ++j) g[j] -= inv_n * y[i] * x[i][j];
      g[w.size()] -= inv_n * y[i];
    }
  }
  return g;
}

BinarySvm train_binary_svm(const std::vector<std::vector<double>>& x, std::span<const double> y, const SvmParams& params) {
  if (x.empty()) throw Error(Errc::arity, "SVM training needs at least one sample");
  if (!(params.lambda > 0.0)) throw Error(Errc::dimension, "SVM regularization must be positive");
  const std::size_t n = x.size(), dim = x.front().size();
  const double radius = 1.0 / std::sqrt(params.lambda);

  std::vector<double> w(dim, 0.0), avg_w(dim, 0.0);
  double b = 0.0, avg_b = 0.0;
  std::size_t averaged = 0;
  BinarySvm best{w, b};
  double best_obj = hinge_objective(w, b, x, y, params.lambda);

  std::vector<std::size_t> order(n);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng = tagged_stream(params.seed, kSvmOrderTag, epoch);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next() % i]);

    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (params.lambda * static_cast<double>(t));
      double s = b;
      for (std::size_t j = 0; j < dim; ++j) s += w[j] * x[i][j];
      const double shrink = 1.0 - eta * params.lambda;
      for (double& v : w) v *= shrink;
      if (y[i] * s < 1.0) {
        for (std::size_t j = 0; j < dim; ++j) w[j] += eta * y[i] * x[i][j];
        b += eta * y[i];
      }
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > radius)
        for (double& v : w) v *= radius / norm;
    }

    // Average the second half of the run.
    if (2 * epoch >= params.epochs) {
      ++averaged;
      const double mix = 1.0 / static_cast<double>(averaged);
      for (std::size_t j = 0; j < dim; ++j) avg_w[j] += mix * (w[j] - avg_w[j]);
      avg_b += mix * (b - avg_b);
    }
    const double obj = hinge_objective(w, b, x, y, params.lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best = {w, b};
    }
    if (averaged > 0) {
      const double obj_avg = hinge_objective(avg_w, avg_b, x, y, params.lambda);
      if (obj_avg < best_obj) {
        best_obj = obj_avg;
        best = {avg_w, avg_b};
      }
    }
  }
  return best;
}

SvmModel train_svm(const std::vector<std::vector<double>>& features, const std::vector<std::size_t>& labels,
                   const SvmParams& params) {
  if (features.size() != labels.size()) throw Error(Errc::alignment, "feature and label counts differ");
  if (features.empty()) throw Error(Errc::arity, "SVM training needs samples");
  const std::size_t dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) throw Error(Errc::dimension, "feature vectors have inconsistent lengths");
  const std::size_t classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (classes < 2) throw Error(Errc::degenerate_labels, "SVM training needs at least two classes");
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t l : labels) ++counts[l];
  for (std::size_t c = 0; c < classes; ++c)
    if (counts[c] == 0) throw Error(Errc::degenerate_labels, "class " + std::to_string(c) + " has no samples");

  SvmModel model;
  model.class_count = classes;
  model.dim = dim;
  model.params = params;
  model.feature_mean.assign(dim, 0.0);
  model.feature_std.assign(dim, 0.0);
  const double inv_n = 1.0 / static_cast<double>(features.size());
  for (const auto& f : features)
    for (std::size_t j = 0; j < dim; ++j) model.feature_mean[j] += f[j] * inv_n;
  for (const auto& f : features)
    for (std::size_t j = 0; j < dim; ++j) {
      const double dv = f[j] - model.feature_mean[j];
      model.feature_std[j] += dv * dv * inv_n;
    }
  for (double& s : model.feature_std) {
    s = std::sqrt(s);
    if (!(s > 1e-12)) s = 1.0;
  }

  std::vector<std::vector<double>> x(features.size(), std::vector<double>(dim));
  for (std::size_t i = 0; i < features.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j) x[i][j] = model.standardize(j, features[i][j]);

  model.weights.assign(classes * dim, 0.0);
  model.bias.assign(classes, 0.0);
  parallel_for(classes, [&](std::size_t c) {
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == c ? 1.0 : -1.0;
    SvmParams per_class = params;
    per_class.seed = params.seed ^ (0x9E3779B97F4A7C15ULL * (c + 1));
    BinarySvm svm = train_binary_svm(x, y, per_class);
    std::copy(svm.w.begin(), svm.w.end(), model.weights.begin() + static_cast<std::ptrdiff_t>(c * dim));
    model.bias[c] = svm.b;
  });
  return model;
}

Classification classify(std::span<const double> features, const SvmModel& model) {
  if (features.size() != model.dim)
    throw Error(Errc::dimension, "feature length " + std::to_string(features.size()) + " does not match model dimension " +
                                     std::to_string(model.dim));
  Classification out;
  out.scores.resize(model.class_count);
  for (std::size_t c = 0; c < model.class_count; ++c) {
    auto w = model.class_weights(c);
    double s = model.bias[c];
    for (std::size_t j = 0; j < model.dim; ++j) s += w[j] * model.standardize(j, features[j]);
    out.scores[c] = s;
  }
  out.label = static_cast<std::size_t>(std::max_element(out.scores.begin(), out.scores.end()) - out.scores.begin());
  return out;
}

Classification classify_peak_psr(const FeatureVector& fv, const FilterBank& bank) {
  if (fv.blocks() != bank.size() || fv.values.size() != bank.size() * kBlockSize)
    throw Error(Errc::dimension, "feature vector has " + std::to_string(fv.blocks()) + " blocks for a bank of " +
                                     std::to_string(bank.size()));
  Classification out;
  out.scores.assign(bank.actions.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < bank.size(); ++f) {
    // PSR of the filter's strongest peak: the whole-volume cell comes first.
    const double best = fv.values[f * kBlockSize + kPoolCells];
    double& slot = out.scores[bank.filter_to_action[f]];
    slot = std::max(slot, best);
  }
  out.label = static_cast<std::size_t>(std::max_element(out.scores.begin(), out.scores.end()) - out.scores.begin());
  return out;
}

}  // namespace smash
