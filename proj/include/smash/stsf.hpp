#pragma once

#include <string>
#include <vector>

#include "smash/mach.hpp"
#include "smash/sensing.hpp"
#include "smash/volume.hpp"

namespace smash {

// Ordered filters plus the distinct action labels they belong to. Feature
// layout follows filter order, so the order is part of the model.
struct FilterBank {
  std::vector<MachFilter> filters;
  std::vector<std::string> actions;
  std::vector<std::size_t> filter_to_action;

  static FilterBank from_filters(std::vector<MachFilter> filters);
  void validate() const;
  std::size_t size() const { return filters.size(); }
};

// c_comp(l,m,n) = sum_t <phi S_{n+t}, phi H^{l,m,t}>, evaluated as
// correlate3(phi^T Z, H). Requires temporally differenced measurements.
ResponseVolume smashed_response(const CompressedVideo& z, const MachFilter& f, const MeasurementMatrix& m);

// correlate3(temporal_derivative(v), H) on uncompressed video.
ResponseVolume oracle_response(const VideoVolume& v, const MachFilter& f);

// One smashed response per filter, in bank order. The backprojection and
// its spectrum are computed once and shared by every filter.
std::vector<ResponseVolume> response_bank(const CompressedVideo& z, const FilterBank& bank, const MeasurementMatrix& m);

std::vector<ResponseVolume> oracle_bank(const VideoVolume& v, const FilterBank& bank);

// Correlates a bank against an already prepared correlator (backprojected or
// differenced video).
std::vector<ResponseVolume> correlate_bank(const Correlator& prepared, const FilterBank& bank, Provenance provenance);

}  // namespace smash
