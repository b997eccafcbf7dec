#pragma once

#include <stdexcept>
#include <string>

namespace smash {

enum class Errc {
  dimension,
  sizing,
  rank,
  order,
  insufficient_frames,
  arity,
  singular_denominator,
  conjugate_symmetry,
  invertibility,
  pooling_resolution,
  degenerate_labels,
  alignment,
  format,
  truncation,
  io,
};

const char* errc_name(Errc code);

// Every library failure is reported through this type. The code decides the
// CLI exit status: format/truncation/io map to 2, everything else to 3.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + " error: " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  bool is_io() const noexcept {
    return code_ == Errc::format || code_ == Errc::truncation || code_ == Errc::io;
  }

 private:
  Errc code_;
};

}  // namespace smash
