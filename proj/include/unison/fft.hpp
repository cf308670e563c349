#pragma once

#include <span>
#include <vector>

namespace unison {

// Real-input FFT of fixed size backed by FFTW (FFTW_ESTIMATE plans, so
// results are reproducible for a given build). Spectra are interleaved
// (re, im) pairs for bins 0..n/2, i.e. 2*(n/2+1) doubles.
class RealFft {
public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // in: n reals (shorter input is zero-padded); out: 2*bins() doubles.
  void forward(std::span<const double> in, std::span<double> out) const;

  // in: 2*bins() doubles; out: n reals. Includes the 1/n normalization so
  // inverse(forward(x)) == x.
  void inverse(std::span<const double> in, std::span<double> out) const;

  std::vector<double> make_spectrum() const { return std::vector<double>(2 * bins(), 0.0); }

private:
  int n_;
  void* plan_fwd_;
  void* plan_inv_;
  double* real_buf_;
  double* cplx_buf_; // fftw_complex array, viewed as interleaved doubles
};

} // namespace unison
