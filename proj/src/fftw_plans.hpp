#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>

#include "smash/volume.hpp"

namespace smash::detail {

// fftw_malloc-backed buffer so every array matches the alignment the cached
// plans were created with.
template <typename T>
class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n) : n_(n), p_(static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1)))) {
    if (!p_) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  FftwBuffer(FftwBuffer&& o) noexcept : n_(o.n_), p_(o.p_) { o.p_ = nullptr; o.n_ = 0; }
  FftwBuffer& operator=(FftwBuffer&& o) noexcept {
    std::swap(n_, o.n_);
    std::swap(p_, o.p_);
    return *this;
  }

  T* data() const { return p_; }
  std::size_t size() const { return n_; }
  T& operator[](std::size_t i) const { return p_[i]; }

 private:
  std::size_t n_;
  T* p_;
};

enum class PlanKind { c2c_forward, c2c_backward, r2c, c2r };

// Returns a cached FFTW_ESTIMATE plan for an out-of-place transform on the
// (frames, rows, cols) grid. Planning is serialized; execution through the
// new-array interface is thread safe.
fftw_plan plan_for(PlanKind kind, const Dims3& dims);

// Throws a sizing error when the grid cannot be addressed by FFTW.
void check_fft_dims(const Dims3& dims);

}  // namespace smash::detail
