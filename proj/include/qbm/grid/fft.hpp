#pragma once

// Thin owner of FFTW plans. Plans are created with FFTW_ESTIMATE |
// FFTW_UNALIGNED so the chosen codelets never depend on timing or on the
// address of the data, which keeps reruns bitwise identical. Executing a
// plan on new arrays is thread-safe; creation is serialised internally.
// Transforms are unnormalised; sign -1 is the forward e^{-iks} direction.

#include <memory>

#include "qbm/core.hpp"

namespace qbm {

class FftPlan {
 public:
  FftPlan() = default;
  /// howmany transforms of length n; element i of transform t sits at
  /// offset t*dist + i*stride.
  FftPlan(int n, int sign, int howmany = 1, int stride = 1, int dist = 0);

  void execute(cplx* in, cplx* out) const;
  void execute(cplx* inout) const { execute(inout, inout); }

  int length() const noexcept { return n_; }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  int n_ = 0;
};

}  // namespace qbm
