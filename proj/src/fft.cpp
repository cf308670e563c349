#include "unison/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cassert>
#include <cstring>

#include "unison/error.hpp"

namespace unison {

RealFft::RealFft(int n) : n_(n) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "FFT size must be >= 2");
  real_buf_ = fftw_alloc_real(static_cast<size_t>(n));
  cplx_buf_ = reinterpret_cast<double*>(fftw_alloc_complex(static_cast<size_t>(n / 2 + 1)));
  plan_fwd_ = fftw_plan_dft_r2c_1d(n, real_buf_,
                                   reinterpret_cast<fftw_complex*>(cplx_buf_), FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(cplx_buf_),
                                   real_buf_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_buf_);
  fftw_free(cplx_buf_);
}

void RealFft::forward(std::span<const double> in, std::span<double> out) const {
  assert(static_cast<int>(in.size()) <= n_);
  assert(static_cast<int>(out.size()) >= 2 * bins());
  std::copy(in.begin(), in.end(), real_buf_);
  std::fill(real_buf_ + in.size(), real_buf_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::memcpy(out.data(), cplx_buf_, sizeof(double) * 2 * static_cast<size_t>(bins()));
}

void RealFft::inverse(std::span<const double> in, std::span<double> out) const {
  assert(static_cast<int>(in.size()) >= 2 * bins());
  assert(static_cast<int>(out.size()) >= n_);
  // c2r destroys its input, hence the copy into the private buffer.
  std::memcpy(cplx_buf_, in.data(), sizeof(double) * 2 * static_cast<size_t>(bins()));
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[static_cast<size_t>(i)] = real_buf_[i] * scale;
}

} // namespace unison
