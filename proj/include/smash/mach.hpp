#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "smash/view.hpp"
#include "smash/volume.hpp"

namespace smash {

enum class ViewKind : std::uint8_t { type1 = 0, type2 = 1, compensated = 2 };

struct ViewTag {
  ViewKind kind = ViewKind::type1;
  AffineView view;  // meaningful for compensated filters only

  bool operator==(const ViewTag&) const = default;
};

struct MachParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double noise_constant = 1.0;  // C(u), flat over all frequencies
};

// Space-time template H(x, y, t) with its synthesis parameters.
struct MachFilter {
  VideoVolume volume;
  MachParams params;
  std::string label;
  ViewTag view_tag;

  const Dims3& dims() const { return volume.dims(); }
  void validate() const;
};

// Frequency-domain statistics of the temporally differenced training set.
struct SpectraStats {
  std::vector<std::complex<double>> mean_spectrum;  // M_x
  std::vector<double> power_spectrum;               // D_x
  std::vector<double> similarity_spectrum;          // S_x
  std::size_t example_count = 0;
  Dims3 dims;  // of the differenced volumes
};

SpectraStats spectra_stats(const std::vector<VideoVolume>& examples);

// h = M_x / (alpha C + beta D_x + gamma S_x), H = idft3(h). The result is the
// raw template; see normalize_filter for the zero-mean unit-energy form.
MachFilter synthesize(const SpectraStats& stats, const MachParams& params, const std::string& label);

// Subtracts the mean and scales to unit L2 norm.
MachFilter normalize_filter(MachFilter f);

// synthesize(spectra_stats(examples)) followed by normalize_filter.
MachFilter train_filter(const std::vector<VideoVolume>& examples, const MachParams& params, const std::string& label);

struct ViewExamples {
  std::string label;
  std::vector<VideoVolume> examples;
  std::vector<AffineView> to_canonical;  // one per example
};

// Warps each example to the canonical view, then synthesizes one raw filter
// per entry. Filters are tagged type2.
std::vector<MachFilter> build_type2_bank(const std::vector<ViewExamples>& groups, const MachParams& params);

// |det A|^2 H(A x_s + b, t), alpha scaled by |det A|^2, beta and gamma kept.
MachFilter compensate(const MachFilter& f, const AffineView& view);

// Column reversal of every frame.
MachFilter flip_horizontal(const MachFilter& f);

}  // namespace smash
