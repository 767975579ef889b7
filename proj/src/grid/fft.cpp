#include "qbm/grid/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace qbm {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FftPlan::Impl {
  fftw_plan plan = nullptr;
  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
  }
};

FftPlan::FftPlan(int n, int sign, int howmany, int stride, int dist) : n_(n) {
  if (dist == 0) dist = n;
  const std::size_t span = static_cast<std::size_t>(howmany - 1) * dist +
                           static_cast<std::size_t>(n - 1) * stride + 1;
  std::vector<cplx> scratch(span);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  auto impl = std::make_shared<Impl>();
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    impl->plan = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, stride, dist, buf, nullptr, stride,
                                    dist, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!impl->plan) throw Error(ErrorKind::misuse, "FFTW could not create a plan");
  impl_ = std::move(impl);
}

void FftPlan::execute(cplx* in, cplx* out) const {
  fftw_execute_dft(impl_->plan, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(out));
}

}  // namespace qbm
