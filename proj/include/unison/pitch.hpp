#pragma once

#include "unison/audio.hpp"
#include "unison/contour.hpp"

namespace unison {

struct TrackerConfig {
  double hop_seconds = 0.010;
  double fmin_hz = 50.0;
  double fmax_hz = 1500.0;
  // Applied to the minimum of the cumulative-mean-normalized difference;
  // larger values admit noisier frames as voiced.
  double voicing_threshold = 0.45;
  double window_seconds = 0.040;
};

// Monophonic F0 tracking: normalized-difference autocorrelation (YIN-style)
// with parabolic lag refinement, an RMS gate at -60 dBFS, and a 3-frame
// median pass against single-frame octave spikes. Frame k is centered at
// t = k * hop_seconds. Deterministic.
F0Contour track_f0(const AudioClip& clip, const TrackerConfig& cfg = {});

} // namespace unison
