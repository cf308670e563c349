#include "unison/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "unison/error.hpp"
#include "unison/fft.hpp"

namespace unison {
namespace {

constexpr double kRmsGate = 1e-3; // -60 dBFS

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// r[tau] = sum_n x[n] x[n+tau] over the zero-padded frame, via FFT.
void autocorrelation(const RealFft& fft, std::span<const double> frame, int max_lag,
                     std::vector<double>& spectrum, std::vector<double>& work,
                     std::vector<double>& r) {
  fft.forward(frame, spectrum);
  for (int b = 0; b < fft.bins(); ++b) {
    const double re = spectrum[2 * b], im = spectrum[2 * b + 1];
    spectrum[2 * b] = re * re + im * im;
    spectrum[2 * b + 1] = 0.0;
  }
  fft.inverse(spectrum, work);
  r.assign(work.begin(), work.begin() + max_lag + 1);
}

} // namespace

F0Contour track_f0(const AudioClip& clip, const TrackerConfig& cfg) {
  if (clip.sample_rate <= 0) throw Error(ErrorCode::invalid_argument, "bad sample rate");
  if (!(cfg.hop_seconds > 0.0) || !(cfg.fmin_hz > 0.0) || !(cfg.fmax_hz > cfg.fmin_hz) ||
      cfg.fmax_hz >= clip.sample_rate / 2.0)
    throw Error(ErrorCode::invalid_argument, "tracker config violates fmin < fmax < rate/2");

  const int sr = clip.sample_rate;
  const int win = std::max(16, static_cast<int>(std::lround(cfg.window_seconds * sr)));
  if (static_cast<int>(clip.samples.size()) <= win)
    throw Error(ErrorCode::clip_too_short, "clip shorter than one analysis window");

  const double hop = std::max(1.0, cfg.hop_seconds * sr);
  const int min_lag = std::max(2, static_cast<int>(std::floor(sr / cfg.fmax_hz)));
  const int max_lag = std::min(static_cast<int>(std::ceil(sr / cfg.fmin_hz)), win - 2);
  if (min_lag >= max_lag)
    throw Error(ErrorCode::invalid_argument, "window too short for fmin");

  const RealFft fft(next_pow2(win + max_lag + 1));
  // Frame k is centered on the exact nominal grid; rounding the hop once
  // and accumulating it would drift off t = k * hop_seconds at rates where
  // the hop is not a whole number of samples.
  const std::size_t frames =
      static_cast<std::size_t>(std::floor(clip.samples.size() / hop + 1e-9)) + 1;

  F0Contour out;
  out.hop_seconds = cfg.hop_seconds;
  out.values_hz.assign(frames, 0.0);

  std::vector<double> frame(static_cast<std::size_t>(win));
  std::vector<double> spectrum = fft.make_spectrum();
  std::vector<double> work(static_cast<std::size_t>(fft.size()));
  std::vector<double> r, cum(static_cast<std::size_t>(win)), dprime(static_cast<std::size_t>(max_lag) + 1);

  const auto sample_at = [&](long idx) {
    return idx >= 0 && idx < static_cast<long>(clip.samples.size())
               ? clip.samples[static_cast<std::size_t>(idx)]
               : 0.0;
  };

  for (std::size_t k = 0; k < frames; ++k) {
    const long center = std::lround(static_cast<double>(k) * hop);
    double energy = 0.0;
    for (int i = 0; i < win; ++i) {
      const double v = sample_at(center - win / 2 + i);
      frame[static_cast<std::size_t>(i)] = v;
      energy += v * v;
      cum[static_cast<std::size_t>(i)] = energy;
    }
    if (std::sqrt(energy / win) < kRmsGate) continue;

    autocorrelation(fft, frame, max_lag, spectrum, work, r);

    // d(tau) over the shrinking overlap window, cumulative-mean normalized.
    double running = 0.0;
    dprime[0] = 1.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
      const double e_left = cum[static_cast<std::size_t>(win - lag - 1)];
      const double e_right = energy - cum[static_cast<std::size_t>(lag - 1)];
      const double d = std::max(0.0, e_left + e_right - 2.0 * r[static_cast<std::size_t>(lag)]);
      running += d;
      dprime[static_cast<std::size_t>(lag)] =
          running > 0.0 ? d * lag / running : 1.0;
    }

    // First dip under the threshold wins; otherwise fall back to the global
    // minimum (which then fails the voicing test anyway).
    int tau = -1;
    for (int t = min_lag; t <= max_lag; ++t) {
      if (dprime[static_cast<std::size_t>(t)] < cfg.voicing_threshold) {
        while (t + 1 <= max_lag &&
               dprime[static_cast<std::size_t>(t + 1)] < dprime[static_cast<std::size_t>(t)])
          ++t;
        tau = t;
        break;
      }
    }
    if (tau < 0) {
      tau = min_lag;
      for (int t = min_lag + 1; t <= max_lag; ++t)
        if (dprime[static_cast<std::size_t>(t)] < dprime[static_cast<std::size_t>(tau)]) tau = t;
    }
    if (dprime[static_cast<std::size_t>(tau)] >= cfg.voicing_threshold) continue;

    double refined = tau;
    if (tau > min_lag && tau < max_lag) {
      const double y1 = dprime[static_cast<std::size_t>(tau - 1)];
      const double y2 = dprime[static_cast<std::size_t>(tau)];
      const double y3 = dprime[static_cast<std::size_t>(tau + 1)];
      const double denom = y1 - 2.0 * y2 + y3;
      if (std::fabs(denom) > 1e-12) {
        const double delta = std::clamp(0.5 * (y1 - y3) / denom, -1.0, 1.0);
        refined = tau + delta;
      }
    }
    out.values_hz[k] = std::clamp(sr / refined, cfg.fmin_hz, cfg.fmax_hz);
  }

  // Median-of-3 over voiced interiors removes single-frame octave spikes
  // without touching the voicing mask.
  if (frames >= 3) {
    std::vector<double> filtered = out.values_hz;
    for (std::size_t k = 1; k + 1 < frames; ++k) {
      if (out.voiced(k - 1) && out.voiced(k) && out.voiced(k + 1)) {
        double a = out.values_hz[k - 1], b = out.values_hz[k], c = out.values_hz[k + 1];
        filtered[k] = std::max(std::min(a, b), std::min(std::max(a, b), c));
      }
    }
    out.values_hz = std::move(filtered);
  }
  return out;
}

} // namespace unison
