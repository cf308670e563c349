#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "unison/audio.hpp"
#include "unison/pitch.hpp"
#include "unison/vocoder.hpp"

namespace unison {

// Knobs of the clone generator. All randomness in a run is a pure function
// of (seed, clone_index), so renders are reproducible.
struct CloneParams {
  double std_cents = 0.0;  // pitch-deviation scale, >= 0
  double ts_seconds = 0.0; // timing-shift scale, >= 0
  int ns = 1;              // number of voices in the unison, >= 1
  bool timbre_variation = false;
  double timbre_warp_scale = 0.03; // max |frequency-axis scaling - 1|
  std::uint64_t seed = 0;
};

// Half-open sample range of audio between silences longer than 80 ms.
struct VoicedSegment {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Splits on runs of 10 ms frames under -60 dBFS RMS spanning more than
// 80 ms; shorter gaps stay inside their segment. Segments are trimmed to
// non-silent frames, ordered, and disjoint.
std::vector<VoicedSegment> segment_voiced_regions(const AudioClip& clip);

// One member of the unison. Clone 0 is the unperturbed resynthesis; later
// clones get smoothed pitch scatter (std_cents after a 50 ms average),
// per-segment timing shifts (clamped so segments stay ordered), fresh
// excitation noise, and optionally a small random envelope warp.
AudioClip make_clone(const vocoder::VocoderFeatures& feats,
                     const AudioClip& clip, const CloneParams& params,
                     int clone_index);

// Tracks and analyzes the solo, renders params.ns clones, and mixes them
// at kNormalizePeak. Output runs one shift margin longer than the input.
AudioClip solo_to_unison(const AudioClip& clip, const CloneParams& params);

// Single-voice prototype of a unison mixture: the mixture's own tracked F0
// and envelope, resynthesized as one voice. Harmonic-ratio tracking slips
// are snapped back to the surrounding contour, and the envelope is median
// filtered over time so momentary beat cancellations inside the mixture do
// not punch holes into the prototype. When tracked_out is given it receives
// the cleaned contour the render used, on cfg's hop grid.
AudioClip unison_to_solo(const AudioClip& clip, const TrackerConfig& cfg = {},
                         F0Contour* tracked_out = nullptr);

} // namespace unison
