#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "unison/audio.hpp"
#include "unison/contour.hpp"

namespace unison::vocoder {

inline constexpr int kNumMfsc = 60;
inline constexpr int kNumApBands = 4;
inline constexpr double kFrameHop = 0.005;
inline constexpr double kWarpAlpha = 0.45;
// Stand-in period for windowing and excitation on unvoiced frames.
inline constexpr double kUnvoicedF0 = 160.0;

// 2048 at 44.1 kHz, rescaled with the sample rate and rounded to the
// nearest power of two (log distance), never below 256.
int fft_size(int sample_rate);

// Per-frame source-filter decomposition: F0, warped log-amplitude envelope
// cepstrum, and per-band aperiodic energy ratios. f0/mfsc/band_ap always
// hold the same number of frames.
struct VocoderFeatures {
  F0Contour f0; // hop_seconds == kFrameHop
  std::vector<std::array<double, kNumMfsc>> mfsc;
  std::vector<std::array<double, kNumApBands>> band_ap; // each in [0, 1]
  int sample_rate = 0;

  std::size_t frames() const { return f0.size(); }
};

// f0 must already be on the kFrameHop grid covering the clip (within two
// frames of slack at the end).
VocoderFeatures analyze(const AudioClip& clip, const F0Contour& f0);

// Pulse-plus-noise resynthesis through per-frame minimum-phase filters.
// Output length is frames * hop; peak is limited to kNormalizePeak.
// Identical (feats, noise_seed) pairs render bit-identical audio.
AudioClip synthesize(const VocoderFeatures& feats, std::uint64_t noise_seed = 0);

// Scales voiced frames' F0 by 2^(offset/1200); envelope and aperiodicity
// are untouched. offset_cents must have one entry per frame.
VocoderFeatures transpose_f0(const VocoderFeatures& feats,
                             const std::vector<double>& offset_cents);

// All-pass frequency warp of a one-sided cepstrum (the classic recursive
// transform). A constant spectrum passes through unchanged; warping by
// alpha then -alpha is the identity up to truncation order.
std::vector<double> warp_cepstrum(const std::vector<double>& cep,
                                  std::size_t out_size, double alpha);

// Unwarps one mfsc frame back to a linear-frequency log-amplitude envelope
// sampled at nfft/2 + 1 bins.
std::vector<double> envelope_from_mfsc(const std::array<double, kNumMfsc>& mfsc,
                                       int nfft, double alpha = kWarpAlpha);

} // namespace unison::vocoder
