#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "smash/stsf.hpp"
#include "smash/volume.hpp"

namespace smash {

inline constexpr std::size_t kPoolCells = 73;  // 1 + 8 + 64
inline constexpr std::size_t kBlockSize = 2 * kPoolCells;

struct Index3 {
  std::size_t row = 0, col = 0, frame = 0;
  bool operator==(const Index3&) const = default;
};

struct PooledFeatures {
  std::array<double, kPoolCells> values{};
  std::array<Index3, kPoolCells> peaks{};
};

// Three-level volumetric max pooling. Level l splits each axis into 2^l
// cells with boundaries floor(i * dim / 2^l). Cells are ordered level by
// level, then frame cell, row cell, column cell (column fastest).
PooledFeatures max_pool_features(const ResponseVolume& r);

struct PsrFeatures {
  std::array<double, kPoolCells> values{};
  std::array<bool, kPoolCells> degenerate{};
};

// Sidelobe window edges: an 11^3 cube around the peak minus its central 5^3
// cube, clipped to the volume.
inline constexpr std::size_t kSidelobeOuter = 11;
inline constexpr std::size_t kSidelobeInner = 5;

double peak_to_sidelobe(const ResponseVolume& r, const Index3& peak, bool* degenerate = nullptr);
PsrFeatures psr_features(const ResponseVolume& r, const std::array<Index3, kPoolCells>& peaks);

// Per filter, in bank order: 73 pooled maxima then 73 PSR values.
struct FeatureVector {
  std::vector<double> values;
  std::size_t blocks() const { return values.size() / kBlockSize; }
};

FeatureVector feature_vector(const std::vector<ResponseVolume>& responses);

// Column names matching the FeatureVector layout.
std::vector<std::string> feature_names(std::size_t bank_size);

struct SvmParams {
  double lambda = 1e-2;     // L2 regularization
  std::size_t epochs = 300;
  std::uint64_t seed = 0;   // per-epoch visiting order
};

// One-vs-rest linear SVMs on standardized features.
struct SvmModel {
  std::size_t class_count = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // class_count x dim
  std::vector<double> bias;     // class_count
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  SvmParams params;

  std::span<const double> class_weights(std::size_t c) const { return {weights.data() + c * dim, dim}; }
  double standardize(std::size_t j, double v) const { return (v - feature_mean[j]) / feature_std[j]; }
};

// lambda/2 |w|^2 + mean_i max(0, 1 - y_i (w.x_i + b)); y in {-1, +1}.
double hinge_objective(std::span<const double> w, double b, const std::vector<std::vector<double>>& x,
                       std::span<const double> y, double lambda);

// A subgradient of hinge_objective; the last entry is the bias component.
std::vector<double> hinge_subgradient(std::span<const double> w, double b, const std::vector<std::vector<double>>& x,
                                      std::span<const double> y, double lambda);

struct BinarySvm {
  std::vector<double> w;
  double b = 0.0;
};

// Stochastic subgradient descent with step 1/(lambda t), deterministic visit
// order from params.seed. Returns the epoch-end iterate (plain or averaged)
// with the lowest objective.
BinarySvm train_binary_svm(const std::vector<std::vector<double>>& x, std::span<const double> y, const SvmParams& params);

// labels are class indices 0..C-1; every class needs at least one sample.
SvmModel train_svm(const std::vector<std::vector<double>>& features, const std::vector<std::size_t>& labels,
                   const SvmParams& params);

struct Classification {
  std::size_t label = 0;
  std::vector<double> scores;
};

Classification classify(std::span<const double> features, const SvmModel& model);

// Training-free baseline: the action whose filters reach the highest PSR.
Classification classify_peak_psr(const FeatureVector& fv, const FilterBank& bank);

}  // namespace smash
