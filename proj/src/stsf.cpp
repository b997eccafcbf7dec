#include "smash/stsf.hpp"

#include <algorithm>

#include "smash/error.hpp"
#include "smash/parallel.hpp"

namespace smash {

FilterBank FilterBank::from_filters(std::vector<MachFilter> filters) {
  FilterBank bank;
  bank.filters = std::move(filters);
  for (const auto& f : bank.filters) {
    auto it = std::find(bank.actions.begin(), bank.actions.end(), f.label);
    if (it == bank.actions.end()) {
      bank.filter_to_action.push_back(bank.actions.size());
      bank.actions.push_back(f.label);
    } else {
      bank.filter_to_action.push_back(static_cast<std::size_t>(it - bank.actions.begin()));
    }
  }
  return bank;
}

void FilterBank::validate() const {
  if (filter_to_action.size() != filters.size()) throw Error(Errc::arity, "bank index map length mismatch");
  for (std::size_t i = 0; i < filters.size(); ++i) {
    if (filter_to_action[i] >= actions.size() || actions[filter_to_action[i]] != filters[i].label)
      throw Error(Errc::arity, "filter " + std::to_string(i) + " label '" + filters[i].label + "' is not in the action list");
  }
}

namespace {

void check_differenced(const CompressedVideo& z) {
  if (z.derivative_order != 1)
    throw Error(Errc::order, "smashed correlation expects temporally differenced measurements (derivative order 1)");
}

}  // namespace

ResponseVolume smashed_response(const CompressedVideo& z, const MachFilter& f, const MeasurementMatrix& m) {
  check_differenced(z);
  const VideoVolume lifted = backproject(z, m);
  return Correlator(lifted).correlate(f.volume, Provenance::smashed);
}

ResponseVolume oracle_response(const VideoVolume& v, const MachFilter& f) {
  return Correlator(temporal_derivative(v)).correlate(f.volume, Provenance::oracle);
}

std::vector<ResponseVolume> correlate_bank(const Correlator& prepared, const FilterBank& bank, Provenance provenance) {
  std::vector<ResponseVolume> out(bank.size());
  parallel_for(bank.size(), [&](std::size_t i) { out[i] = prepared.correlate(bank.filters[i].volume, provenance); });
  return out;
}

std::vector<ResponseVolume> response_bank(const CompressedVideo& z, const FilterBank& bank, const MeasurementMatrix& m) {
  check_differenced(z);
  return correlate_bank(Correlator(backproject(z, m)), bank, Provenance::smashed);
}

std::vector<ResponseVolume> oracle_bank(const VideoVolume& v, const FilterBank& bank) {
  return correlate_bank(Correlator(temporal_derivative(v)), bank, Provenance::oracle);
}

}  // namespace smash
