#include "smash/error.hpp"

namespace smash {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::dimension: return "dimension";
    case Errc::sizing: return "sizing";
    case Errc::rank: return "rank";
    case Errc::order: return "order";
    case Errc::insufficient_frames: return "insufficient-frames";
    case Errc::arity: return "arity";
    case Errc::singular_denominator: return "singular-denominator";
    case Errc::conjugate_symmetry: return "conjugate-symmetry";
    case Errc::invertibility: return "invertibility";
    case Errc::pooling_resolution: return "pooling-resolution";
    case Errc::degenerate_labels: return "degenerate-labels";
    case Errc::alignment: return "alignment";
    case Errc::format: return "format";
    case Errc::truncation: return "truncation";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace smash
