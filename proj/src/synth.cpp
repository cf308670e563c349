#include "unison/synth.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "unison/error.hpp"
#include "unison/pitch.hpp"
#include "unison/rng.hpp"

namespace unison {

namespace {

constexpr double kSilenceRms = 1e-3;     // -60 dBFS
constexpr double kSilenceFrame = 0.010;  // RMS frame for segmentation
constexpr double kMaxSilence = 0.080;    // longest gap kept inside a segment
constexpr double kCrossfade = 0.010;     // seam fade when segments move
constexpr double kPitchSmooth = 0.050;   // moving average over pitch noise
// A finite-window pitch measurement averages the smoothed deviation process
// again and reads its scale about 17% low; the offsets are inflated so
// rendered unisons measure back at the requested std_cents.
constexpr double kReadbackGain = 1.20;

// Substream ids: one block of ids per clone, one id per purpose.
constexpr std::uint64_t kStreamsPerClone = 16;
constexpr std::uint64_t kStreamPitch = 1;
constexpr std::uint64_t kStreamTiming = 2;
constexpr std::uint64_t kStreamTimbre = 3;
constexpr std::uint64_t kStreamNoise = 4;

std::uint64_t stream_id(int clone_index, std::uint64_t purpose) {
  return std::uint64_t(clone_index) * kStreamsPerClone + purpose;
}

// Per-frame Normal(0, std) offsets, moving-averaged over kPitchSmooth and
// rescaled so the post-smoothing standard deviation is std again (times
// the readback compensation).
std::vector<double> pitch_offsets(std::size_t frames, double hop_seconds,
                                  double std_cents, Rng& rng) {
  std::vector<double> raw(frames);
  for (double& v : raw) v = rng.next_gaussian() * std_cents * kReadbackGain;
  int half = int(std::lround(0.5 * kPitchSmooth / hop_seconds));
  if (half < 1) return raw;
  int win = 2 * half + 1;
  double gain = std::sqrt(double(win));
  std::vector<double> out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int j = -half; j <= half; ++j) {
      std::int64_t idx = std::int64_t(i) + j;
      if (idx < 0) idx = 0;
      if (idx >= std::int64_t(frames)) idx = std::int64_t(frames) - 1;
      acc += raw[std::size_t(idx)];
    }
    out[i] = gain * acc / double(win);
  }
  return out;
}

} // namespace

std::vector<VoicedSegment> segment_voiced_regions(const AudioClip& clip) {
  std::vector<VoicedSegment> segments;
  if (clip.empty() || clip.sample_rate <= 0) return segments;

  std::size_t frame_len = std::size_t(std::lround(kSilenceFrame * clip.sample_rate));
  if (frame_len == 0) frame_len = 1;
  std::size_t n_frames = (clip.samples.size() + frame_len - 1) / frame_len;

  std::vector<bool> silent(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::size_t lo = f * frame_len;
    std::size_t hi = std::min(lo + frame_len, clip.samples.size());
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += clip.samples[i] * clip.samples[i];
    double rms = std::sqrt(acc / double(hi - lo));
    silent[f] = rms < kSilenceRms;
  }

  // A silent run is a delimiter only when it outlasts kMaxSilence.
  std::size_t min_gap_frames =
      std::size_t(std::floor(kMaxSilence / kSilenceFrame)) + 1;
  std::vector<bool> delimiter(n_frames, false);
  std::size_t run_start = 0;
  for (std::size_t f = 0; f <= n_frames; ++f) {
    bool s = f < n_frames && silent[f];
    if (s) continue;
    if (f > run_start && f - run_start >= min_gap_frames)
      for (std::size_t g = run_start; g < f; ++g) delimiter[g] = true;
    run_start = f + 1;
  }

  // Regions between delimiters, trimmed to their non-silent frames.
  std::size_t f = 0;
  while (f < n_frames) {
    if (delimiter[f]) {
      ++f;
      continue;
    }
    std::size_t begin = f;
    while (f < n_frames && !delimiter[f]) ++f;
    std::size_t end = f;
    while (begin < end && silent[begin]) ++begin;
    while (end > begin && silent[end - 1]) --end;
    if (begin == end) continue;
    VoicedSegment seg;
    seg.begin = begin * frame_len;
    seg.end = std::min(end * frame_len, clip.samples.size());
    segments.push_back(seg);
  }
  return segments;
}

namespace {

// Places each segment of src at its shifted position in a zero buffer,
// with linear fades over kCrossfade at both edges of every placed block.
// Shifts were clamped to half of each adjacent gap, so blocks never
// overlap and never reorder.
std::vector<double> apply_timing_shifts(const std::vector<double>& src,
                                        const std::vector<VoicedSegment>& segments,
                                        const std::vector<double>& shifts_seconds,
                                        int sample_rate, std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  std::size_t fade = std::size_t(std::lround(kCrossfade * sample_rate));
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const VoicedSegment& seg = segments[s];
    std::int64_t shift = std::llround(shifts_seconds[s] * sample_rate);
    std::size_t len = seg.end - seg.begin;
    std::size_t edge = std::min(fade, len / 2);
    for (std::size_t i = 0; i < len; ++i) {
      std::int64_t dst = std::int64_t(seg.begin + i) + shift;
      if (dst < 0 || dst >= std::int64_t(out_len)) continue;
      std::size_t src_idx = seg.begin + i;
      if (src_idx >= src.size()) break;
      double g = 1.0;
      if (edge > 0) {
        if (i < edge) g = double(i + 1) / double(edge + 1);
        std::size_t from_end = len - 1 - i;
        if (from_end < edge) g = std::min(g, double(from_end + 1) / double(edge + 1));
      }
      out[std::size_t(dst)] += g * src[src_idx];
    }
  }
  return out;
}

// Largest shift each segment may take without crossing the midpoint of an
// adjacent gap; both neighbors obey the same rule, so order is preserved
// for any draw.
void clamp_shifts(std::vector<double>& shifts,
                  const std::vector<VoicedSegment>& segments, int sample_rate,
                  std::size_t out_len) {
  for (std::size_t s = 0; s < segments.size(); ++s) {
    double lo, hi;
    if (s == 0) {
      lo = -double(segments[s].begin) / sample_rate;
    } else {
      lo = -0.5 * double(segments[s].begin - segments[s - 1].end) / sample_rate;
    }
    if (s + 1 < segments.size()) {
      hi = 0.5 * double(segments[s + 1].begin - segments[s].end) / sample_rate;
    } else {
      hi = double(out_len - std::min(out_len, segments[s].end)) / sample_rate;
    }
    shifts[s] = std::clamp(shifts[s], lo, hi);
  }
}

} // namespace

AudioClip make_clone(const vocoder::VocoderFeatures& feats,
                     const AudioClip& clip, const CloneParams& params,
                     int clone_index) {
  if (params.ns < 1 || params.std_cents < 0.0 || params.ts_seconds < 0.0 ||
      !std::isfinite(params.std_cents) || !std::isfinite(params.ts_seconds))
    throw Error(ErrorCode::invalid_argument, "clone: bad parameters");
  if (clone_index < 0 || clone_index >= params.ns)
    throw Error(ErrorCode::invalid_argument,
                "clone: index " + std::to_string(clone_index) +
                    " outside ns=" + std::to_string(params.ns));

  int sr = feats.sample_rate;
  std::uint64_t noise_seed =
      Rng::substream(params.seed, stream_id(clone_index, kStreamNoise)).next_u64();

  if (clone_index == 0) return vocoder::synthesize(feats, noise_seed);

  vocoder::VocoderFeatures working = feats;

  if (params.std_cents > 0.0) {
    Rng rng = Rng::substream(params.seed, stream_id(clone_index, kStreamPitch));
    std::vector<double> offsets = pitch_offsets(
        working.frames(), working.f0.hop_seconds, params.std_cents, rng);
    working = vocoder::transpose_f0(working, offsets);
  }

  if (params.timbre_variation && params.timbre_warp_scale > 0.0) {
    Rng rng = Rng::substream(params.seed, stream_id(clone_index, kStreamTimbre));
    double beta = (2.0 * rng.next_double() - 1.0) * params.timbre_warp_scale;
    // A bilinear warp with coefficient beta/2 scales the low-frequency
    // axis by about (1 + beta).
    for (auto& frame : working.mfsc) {
      std::vector<double> onesided(frame.begin(), frame.end());
      std::vector<double> warped =
          vocoder::warp_cepstrum(onesided, vocoder::kNumMfsc, 0.5 * beta);
      std::copy(warped.begin(), warped.end(), frame.begin());
    }
  }

  AudioClip rendered = vocoder::synthesize(working, noise_seed);

  std::size_t margin = std::size_t(std::ceil(4.0 * params.ts_seconds * sr));
  std::size_t out_len = rendered.samples.size() + margin;
  if (params.ts_seconds > 0.0) {
    std::vector<VoicedSegment> segments = segment_voiced_regions(clip);
    std::vector<double> shifts(segments.size());
    Rng rng = Rng::substream(params.seed, stream_id(clone_index, kStreamTiming));
    for (double& v : shifts) v = rng.next_gaussian() * params.ts_seconds;
    clamp_shifts(shifts, segments, sr, out_len);
    rendered.samples = apply_timing_shifts(rendered.samples, segments, shifts,
                                           sr, out_len);
  } else {
    rendered.samples.resize(out_len, 0.0);
  }
  return rendered;
}

AudioClip solo_to_unison(const AudioClip& clip, const CloneParams& params) {
  TrackerConfig cfg;
  F0Contour tracked = track_f0(clip, cfg);
  F0Contour f0 = resample_contour(tracked, vocoder::kFrameHop);
  vocoder::VocoderFeatures feats = vocoder::analyze(clip, f0);

  std::vector<AudioClip> clones;
  clones.reserve(std::size_t(params.ns));
  for (int i = 0; i < params.ns; ++i)
    clones.push_back(make_clone(feats, clip, params, i));
  return mix_and_normalize(clones);
}

namespace {

// The tracker reads a dense unison at a harmonic ratio of its melody
// whenever beats momentarily cancel the fundamental; on some vowels that
// affects a quarter of all frames, in stretches too long for any local
// vote to fix. Folding each voiced run onto its own median log-frequency
// settles the whole run onto one pitch track: a frame far from the median
// moves only when a near-exact harmonic ratio lands it back inside the
// run's band. Assumes one pitch per voiced run; frames beyond the guard
// with no matching ratio, such as wide sweeps, stay untouched.
void repair_harmonic_runs(F0Contour& f0) {
  constexpr double kGuardCents = 300.0;
  constexpr double kBandCents = 120.0;
  constexpr double kRatios[] = {0.2, 0.25,      1.0 / 3.0, 0.4, 0.5,
                                0.6, 2.0 / 3.0, 0.8,       1.25, 1.5,
                                5.0 / 3.0,      2.0,       2.5,  3.0,
                                4.0, 5.0};
  std::size_t n = f0.size();
  std::vector<double> logs;
  std::size_t i = 0;
  while (i < n) {
    if (!f0.voiced(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && f0.voiced(j + 1)) ++j;
    logs.clear();
    for (std::size_t k = i; k <= j; ++k)
      logs.push_back(std::log2(f0.values_hz[k]));
    std::nth_element(logs.begin(), logs.begin() + std::ptrdiff_t(logs.size() / 2),
                     logs.end());
    double med = logs[logs.size() / 2];
    for (std::size_t k = i; k <= j; ++k) {
      double d = 1200.0 * (std::log2(f0.values_hz[k]) - med);
      if (std::abs(d) <= kGuardCents) continue;
      double best = kBandCents, best_r = 0.0;
      for (double r : kRatios) {
        double err = std::abs(d + 1200.0 * std::log2(r));
        if (err < best) {
          best = err;
          best_r = r;
        }
      }
      if (best_r > 0.0) f0.values_hz[k] *= best_r;
    }
    // The frames flanking a repaired stretch carry leftovers of the slip,
    // readings tens of cents off while the tracker's window straddled the
    // beat hole. A short median pass drops those without touching vibrato,
    // whose half-period is well above the window.
    for (std::size_t k = i; k <= j; ++k)
      logs[k - i] = std::log2(f0.values_hz[k]);
    std::vector<double> win;
    for (std::size_t k = i; k <= j; ++k) {
      std::size_t a = (k - i >= 3) ? k - i - 3 : 0;
      std::size_t b = std::min(logs.size() - 1, k - i + 3);
      win.assign(logs.begin() + std::ptrdiff_t(a),
                 logs.begin() + std::ptrdiff_t(b + 1));
      std::nth_element(win.begin(), win.begin() + std::ptrdiff_t(win.size() / 2),
                       win.end());
      f0.values_hz[k] = std::exp2(win[win.size() / 2]);
    }
    i = j + 1;
  }
}

// Beats inside a unison carve holes into individual harmonics, sometimes
// for hundreds of milliseconds; rendered as-is they leave the prototype
// without a stable fundamental wherever the mixture lost its own. Each
// voiced run therefore renders with its median envelope shape and noise
// profile; only the level coefficient keeps its frame-by-frame track.
void smooth_prototype_timbre(vocoder::VocoderFeatures& feats) {
  std::size_t n = feats.frames();
  std::vector<double> buf;
  auto median_over = [&](auto read, std::size_t a, std::size_t b) {
    buf.clear();
    for (std::size_t k = a; k <= b; ++k) buf.push_back(read(k));
    std::nth_element(buf.begin(), buf.begin() + std::ptrdiff_t(buf.size() / 2),
                     buf.end());
    return buf[buf.size() / 2];
  };
  std::size_t i = 0;
  while (i < n) {
    if (!feats.f0.voiced(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && feats.f0.voiced(j + 1)) ++j;
    for (int m = 1; m < vocoder::kNumMfsc; ++m) {
      double med = median_over(
          [&](std::size_t k) { return feats.mfsc[k][std::size_t(m)]; }, i, j);
      for (std::size_t k = i; k <= j; ++k) feats.mfsc[k][std::size_t(m)] = med;
    }
    for (int b = 0; b < vocoder::kNumApBands; ++b) {
      double med = median_over(
          [&](std::size_t k) { return feats.band_ap[k][std::size_t(b)]; }, i, j);
      for (std::size_t k = i; k <= j; ++k) feats.band_ap[k][std::size_t(b)] = med;
    }
    i = j + 1;
  }
}

} // namespace

AudioClip unison_to_solo(const AudioClip& clip, const TrackerConfig& cfg,
                         F0Contour* tracked_out) {
  F0Contour tracked = track_f0(clip, cfg);
  repair_harmonic_runs(tracked);
  F0Contour f0 = resample_contour(tracked, vocoder::kFrameHop);
  vocoder::VocoderFeatures feats = vocoder::analyze(clip, f0);
  smooth_prototype_timbre(feats);
  if (tracked_out) *tracked_out = std::move(tracked);
  return vocoder::synthesize(feats, 0);
}

} // namespace unison
