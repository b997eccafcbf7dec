#include "smash/mach.hpp"

#include <cmath>

#include "smash/error.hpp"
#include "smash/parallel.hpp"

namespace smash {

void MachFilter::validate() const {
  volume.validate();
  bool nonzero = false;
  for (double x : volume.data()) nonzero = nonzero || x != 0.0;
  if (!nonzero) throw Error(Errc::dimension, "filter '" + label + "' is identically zero");
  if (params.alpha < 0.0 || params.beta < 0.0 || params.gamma < 0.0)
    throw Error(Errc::dimension, "filter parameters must be non-negative");
  if (params.alpha == 0.0 && params.beta == 0.0 && params.gamma == 0.0)
    throw Error(Errc::singular_denominator, "alpha, beta and gamma are all zero");
}

SpectraStats spectra_stats(const std::vector<VideoVolume>& examples) {
  if (examples.empty()) throw Error(Errc::arity, "MACH synthesis needs at least one training example");
  const Dims3 dims = examples.front().dims();
  for (std::size_t i = 1; i < examples.size(); ++i)
    if (!(examples[i].dims() == dims))
      throw Error(Errc::dimension, "training example " + std::to_string(i) + " is " + to_string(examples[i].dims()) +
                                       ", expected " + to_string(dims));

  std::vector<Spectrum3> spectra(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) { spectra[i] = dft3(temporal_derivative(examples[i])); });

  SpectraStats stats;
  stats.dims = spectra.front().dims;
  stats.example_count = examples.size();
  const std::size_t bins = stats.dims.size();
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  stats.mean_spectrum.assign(bins, {0.0, 0.0});
  stats.power_spectrum.assign(bins, 0.0);
  stats.similarity_spectrum.assign(bins, 0.0);
  for (const auto& s : spectra)
    for (std::size_t u = 0; u < bins; ++u) {
      stats.mean_spectrum[u] += s.data[u];
      stats.power_spectrum[u] += std::norm(s.data[u]);
    }
  for (std::size_t u = 0; u < bins; ++u) {
    stats.mean_spectrum[u] *= inv_n;
    stats.power_spectrum[u] *= inv_n;
  }
  for (const auto& s : spectra)
    for (std::size_t u = 0; u < bins; ++u) stats.similarity_spectrum[u] += std::norm(s.data[u] - stats.mean_spectrum[u]);
  for (double& x : stats.similarity_spectrum) x *= inv_n;
  return stats;
}

MachFilter synthesize(const SpectraStats& stats, const MachParams& params, const std::string& label) {
  if (params.alpha < 0.0 || params.beta < 0.0 || params.gamma < 0.0)
    throw Error(Errc::dimension, "alpha, beta and gamma must be non-negative");
  const Dims3& d = stats.dims;
  Spectrum3 h{d, std::vector<std::complex<double>>(d.size())};
  for (std::size_t u3 = 0; u3 < d.frames; ++u3)
    for (std::size_t u1 = 0; u1 < d.rows; ++u1)
      for (std::size_t u2 = 0; u2 < d.cols; ++u2) {
        const std::size_t u = (u3 * d.rows + u1) * d.cols + u2;
        const double denom = params.alpha * params.noise_constant + params.beta * stats.power_spectrum[u] +
                             params.gamma * stats.similarity_spectrum[u];
        if (!(denom > 0.0))
          throw Error(Errc::singular_denominator, "MACH denominator alpha*C + beta*D_x + gamma*S_x vanishes at bin (" +
                                                      std::to_string(u1) + "," + std::to_string(u2) + "," +
                                                      std::to_string(u3) + ")");
        h.data[u] = stats.mean_spectrum[u] / denom;
      }
  MachFilter f{idft3(h), params, label, ViewTag{}};
  return f;
}

MachFilter normalize_filter(MachFilter f) {
  auto data = f.volume.data();
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double energy = 0.0;
  for (double& x : data) {
    x -= mean;
    energy += x * x;
  }
  if (!(energy > 0.0)) throw Error(Errc::dimension, "filter '" + f.label + "' has no energy after mean removal");
  const double inv = 1.0 / std::sqrt(energy);
  for (double& x : data) x *= inv;
  return f;
}

MachFilter train_filter(const std::vector<VideoVolume>& examples, const MachParams& params, const std::string& label) {
  return normalize_filter(synthesize(spectra_stats(examples), params, label));
}

std::vector<MachFilter> build_type2_bank(const std::vector<ViewExamples>& groups, const MachParams& params) {
  if (groups.empty()) throw Error(Errc::arity, "type-2 bank needs at least one action");
  std::vector<MachFilter> bank;
  for (const auto& g : groups) {
    if (g.to_canonical.empty()) throw Error(Errc::arity, "action '" + g.label + "' has no canonical transforms");
    if (g.to_canonical.size() != g.examples.size())
      throw Error(Errc::arity, "action '" + g.label + "' has " + std::to_string(g.examples.size()) + " examples but " +
                                   std::to_string(g.to_canonical.size()) + " transforms");
    std::vector<VideoVolume> warped;
    warped.reserve(g.examples.size());
    for (std::size_t i = 0; i < g.examples.size(); ++i)
      warped.push_back(g.to_canonical[i].is_identity() ? g.examples[i] : warp_volume(g.examples[i], g.to_canonical[i]));
    MachFilter f = synthesize(spectra_stats(warped), params, g.label);
    f.view_tag.kind = ViewKind::type2;
    bank.push_back(std::move(f));
  }
  return bank;
}

MachFilter compensate(const MachFilter& f, const AffineView& view) {
  view.check_invertible();
  const double det2 = view.abs_det() * view.abs_det();
  MachFilter out = f;
  out.volume = warp_volume(f.volume, view);
  if (det2 != 1.0) out.volume *= det2;
  out.params.alpha = det2 * f.params.alpha;
  out.view_tag = ViewTag{ViewKind::compensated, view};
  return out;
}

MachFilter flip_horizontal(const MachFilter& f) {
  AffineView flip;
  flip.a = {-1.0, 0.0, 0.0, 1.0};
  flip.b = {static_cast<double>(f.dims().cols) - 1.0, 0.0};
  MachFilter out = compensate(f, flip);
  switch (f.view_tag.kind) {
    case ViewKind::type1:
    case ViewKind::type2:
      out.view_tag = ViewTag{ViewKind::type2, AffineView::identity()};
      break;
    case ViewKind::compensated:
      out.view_tag = ViewTag{ViewKind::compensated, compose(flip, f.view_tag.view)};
      break;
  }
  return out;
}

}  // namespace smash
