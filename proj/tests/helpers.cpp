#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "unison/fft.hpp"
#include "unison/pitch.hpp"
#include "unison/rng.hpp"

namespace testutil {

using unison::AudioClip;
using unison::F0Contour;

AudioClip sine(double freq_hz, double seconds, int sr, double amp) {
  AudioClip clip;
  clip.sample_rate = sr;
  std::size_t n = std::size_t(std::lround(seconds * sr));
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    clip.samples[i] = amp * std::sin(2.0 * M_PI * freq_hz * double(i) / sr);
  return clip;
}

AudioClip harmonic_tone(double f0_hz, double seconds, int sr, double amp,
                        int harmonics) {
  AudioClip clip;
  clip.sample_rate = sr;
  std::size_t n = std::size_t(std::lround(seconds * sr));
  clip.samples.assign(n, 0.0);
  double norm = 0.0;
  for (int h = 1; h <= harmonics; ++h) norm += 1.0 / h;
  for (std::size_t i = 0; i < n; ++i) {
    double t = double(i) / sr;
    double v = 0.0;
    for (int h = 1; h <= harmonics; ++h)
      v += std::sin(2.0 * M_PI * h * f0_hz * t) / h;
    clip.samples[i] = amp * v / norm;
  }
  return clip;
}

AudioClip sawtooth(double f0_hz, double seconds, int sr, double amp) {
  int harmonics = std::max(1, int(std::floor(0.48 * sr / f0_hz)));
  AudioClip clip;
  clip.sample_rate = sr;
  std::size_t n = std::size_t(std::lround(seconds * sr));
  clip.samples.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double t = double(i) / sr;
    double v = 0.0;
    for (int h = 1; h <= harmonics; ++h)
      v += std::sin(2.0 * M_PI * h * f0_hz * t) / h;
    clip.samples[i] = v;
  }
  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : clip.samples) v *= amp / peak;
  return clip;
}

namespace {

// Phase-accumulated tone for a given instantaneous-frequency function.
template <typename FreqFn>
AudioClip fm_tone(FreqFn freq_at, double seconds, int sr, double amp) {
  AudioClip clip;
  clip.sample_rate = sr;
  std::size_t n = std::size_t(std::lround(seconds * sr));
  clip.samples.resize(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    clip.samples[i] = amp * std::sin(phase);
    phase += 2.0 * M_PI * freq_at(double(i) / sr) / sr;
  }
  return clip;
}

double vibrato_freq(double f0, double depth_cents, double rate_hz, double t) {
  return f0 * std::exp2(depth_cents * std::sin(2.0 * M_PI * rate_hz * t) / 1200.0);
}

double glide_freq(double f_start, double f_end, double seconds, double t) {
  return f_start * std::pow(f_end / f_start, t / seconds);
}

} // namespace

AudioClip vibrato_tone(double f0_hz, double depth_cents, double rate_hz,
                       double seconds, int sr, double amp) {
  return fm_tone(
      [=](double t) { return vibrato_freq(f0_hz, depth_cents, rate_hz, t); },
      seconds, sr, amp);
}

AudioClip glide_tone(double f_start_hz, double f_end_hz, double seconds, int sr,
                     double amp) {
  return fm_tone(
      [=](double t) { return glide_freq(f_start_hz, f_end_hz, seconds, t); },
      seconds, sr, amp);
}

AudioClip vowel(double f0_hz, const Formants& formants, double seconds, int sr,
                double amp) {
  AudioClip clip = sawtooth(f0_hz, seconds, sr, 1.0);
  const double freqs[3] = {formants.f1, formants.f2, formants.f3};
  const double bws[3] = {80.0, 90.0, 120.0};
  for (int s = 0; s < 3; ++s) {
    double r = std::exp(-M_PI * bws[s] / sr);
    double theta = 2.0 * M_PI * freqs[s] / sr;
    double a1 = 2.0 * r * std::cos(theta);
    double a2 = -r * r;
    double y1 = 0.0, y2 = 0.0;
    for (double& v : clip.samples) {
      double y = v + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : clip.samples) v *= amp / peak;
  return clip;
}

AudioClip white_noise(double seconds, int sr, double amp, std::uint64_t seed) {
  unison::Rng rng(seed);
  AudioClip clip;
  clip.sample_rate = sr;
  std::size_t n = std::size_t(std::lround(seconds * sr));
  clip.samples.resize(n);
  for (double& v : clip.samples) v = amp * (2.0 * rng.next_double() - 1.0);
  return clip;
}

AudioClip silence(double seconds, int sr) {
  AudioClip clip;
  clip.sample_rate = sr;
  clip.samples.assign(std::size_t(std::lround(seconds * sr)), 0.0);
  return clip;
}

AudioClip concat(const std::vector<AudioClip>& parts) {
  AudioClip out;
  if (parts.empty()) return out;
  out.sample_rate = parts.front().sample_rate;
  for (const AudioClip& p : parts) {
    if (p.sample_rate != out.sample_rate)
      throw std::runtime_error("concat: sample rates differ");
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  return out;
}

void fade_edges(AudioClip& clip, double seconds) {
  std::size_t n = std::min(clip.samples.size() / 2,
                           std::size_t(std::lround(seconds * clip.sample_rate)));
  for (std::size_t i = 0; i < n; ++i) {
    double g = double(i + 1) / double(n + 1);
    clip.samples[i] *= g;
    clip.samples[clip.samples.size() - 1 - i] *= g;
  }
}

namespace {

std::size_t contour_frames(double seconds, double hop) {
  return std::size_t(std::floor(seconds / hop + 1e-9)) + 1;
}

} // namespace

F0Contour const_contour(double f0_hz, double seconds, double hop) {
  F0Contour c;
  c.hop_seconds = hop;
  c.values_hz.assign(contour_frames(seconds, hop), f0_hz);
  return c;
}

F0Contour vibrato_contour(double f0_hz, double depth_cents, double rate_hz,
                          double seconds, double hop) {
  F0Contour c;
  c.hop_seconds = hop;
  std::size_t n = contour_frames(seconds, hop);
  c.values_hz.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    c.values_hz[k] = vibrato_freq(f0_hz, depth_cents, rate_hz, double(k) * hop);
  return c;
}

F0Contour glide_contour(double f_start_hz, double f_end_hz, double seconds,
                        double hop) {
  F0Contour c;
  c.hop_seconds = hop;
  std::size_t n = contour_frames(seconds, hop);
  c.values_hz.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    c.values_hz[k] =
        glide_freq(f_start_hz, f_end_hz, seconds, std::min(double(k) * hop, seconds));
  return c;
}

unison::MetricsReport score_against(const AudioClip& clip, const F0Contour& ref,
                                    double tol_cents) {
  unison::TrackerConfig cfg;
  cfg.hop_seconds = ref.hop_seconds;
  F0Contour est = unison::track_f0(clip, cfg);
  std::size_t n = std::min(est.size(), ref.size());
  F0Contour e = est, r = ref;
  e.values_hz.resize(n);
  r.values_hz.resize(n);
  return unison::evaluate_melody(e, r, tol_cents);
}

unison::MetricsReport metrics_oracle(const F0Contour& est, const F0Contour& ref,
                                     double tol_cents) {
  std::size_t n = ref.size();
  std::size_t n_ref_voiced = 0, n_ref_unvoiced = 0;
  std::size_t hits = 0, recalls = 0, alarms = 0, true_negatives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool rv = ref.values_hz[i] > 0.0;
    bool ev = est.values_hz[i] > 0.0;
    if (rv && ev) {
      ++n_ref_voiced;
      ++recalls;
      double dc = 1200.0 * std::log2(est.values_hz[i] / ref.values_hz[i]);
      if (std::abs(dc) <= tol_cents) ++hits;
    } else if (rv && !ev) {
      ++n_ref_voiced;
    } else if (!rv && ev) {
      ++n_ref_unvoiced;
      ++alarms;
    } else {
      ++n_ref_unvoiced;
      ++true_negatives;
    }
  }
  unison::MetricsReport rep;
  rep.tolerance_cents = tol_cents;
  rep.rpa = n_ref_voiced ? double(hits) / double(n_ref_voiced) : 0.0;
  rep.vr = n_ref_voiced ? double(recalls) / double(n_ref_voiced) : 0.0;
  rep.vfa = n_ref_unvoiced ? double(alarms) / double(n_ref_unvoiced) : 0.0;
  rep.oa = n ? double(hits + true_negatives) / double(n) : 0.0;
  return rep;
}

double lsd_db(const AudioClip& a, const AudioClip& b, double fmax_hz) {
  if (a.sample_rate != b.sample_rate)
    throw std::runtime_error("lsd: sample rates differ");
  int sr = a.sample_rate;
  const int frame = 2048, hop = 512;
  std::size_t n = std::min(a.samples.size(), b.samples.size());
  if (n < std::size_t(frame)) throw std::runtime_error("lsd: clips too short");

  unison::RealFft fft(frame);
  std::vector<double> win(frame);
  for (int i = 0; i < frame; ++i)
    win[std::size_t(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (frame - 1));

  // Raw bins would mostly measure harmonic alignment, so each frame's log
  // spectrum is cepstrally smoothed (quefrencies under 3 ms) down to its
  // envelope before the two signals are compared.
  const int lifter = std::max(8, int(0.003 * sr));
  auto frame_envelope = [&](const std::vector<double>& x, std::size_t start,
                            std::vector<double>& env, double& peak) {
    std::vector<double> seg(frame, 0.0);
    for (int i = 0; i < frame; ++i)
      seg[std::size_t(i)] = x[start + std::size_t(i)] * win[std::size_t(i)];
    std::vector<double> spec = fft.make_spectrum();
    fft.forward(seg, spec);
    peak = 0.0;
    std::vector<double> logp(std::size_t(fft.bins()), 0.0);
    for (int bn = 0; bn < fft.bins(); ++bn) {
      double re = spec[std::size_t(2 * bn)], im = spec[std::size_t(2 * bn + 1)];
      peak = std::max(peak, re * re + im * im);
      logp[std::size_t(bn)] = re * re + im * im;
    }
    double floor_p = std::max(peak * 1e-6, 1e-300);
    for (double& v : logp) v = std::log(std::max(v, floor_p));
    // Even extension, inverse FFT to the cepstrum, lifter, back.
    std::vector<double> sym(frame, 0.0);
    for (int bn = 0; bn < fft.bins(); ++bn) sym[std::size_t(bn)] = logp[std::size_t(bn)];
    for (int bn = 1; bn < fft.bins() - 1; ++bn)
      sym[std::size_t(frame - bn)] = logp[std::size_t(bn)];
    std::vector<double> cspec = fft.make_spectrum();
    fft.forward(sym, cspec);
    std::vector<double> lifted = fft.make_spectrum();
    for (int q = 0; q < fft.bins(); ++q) {
      bool keep = q < lifter;
      lifted[std::size_t(2 * q)] = keep ? cspec[std::size_t(2 * q)] / frame : 0.0;
      lifted[std::size_t(2 * q + 1)] = 0.0;
    }
    std::vector<double> smooth(frame, 0.0);
    fft.inverse(lifted, smooth);
    for (double& v : smooth) v *= frame; // undo the inverse's 1/n
    env.assign(smooth.begin(), smooth.begin() + fft.bins());
  };

  int max_bin = std::min(fft.bins() - 1, int(fmax_hz * frame / sr));
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> ea, eb;
  for (std::size_t start = 0; start + frame <= n; start += hop) {
    double peak_a = 0.0, peak_b = 0.0;
    frame_envelope(a.samples, start, ea, peak_a);
    frame_envelope(b.samples, start, eb, peak_b);
    if (std::max(peak_a, peak_b) < 1e-12) continue; // silent frame in both
    double acc = 0.0;
    for (int bn = 0; bn <= max_bin; ++bn) {
      double d = (ea[std::size_t(bn)] - eb[std::size_t(bn)]) * 10.0 / std::log(10.0);
      acc += d * d;
    }
    total += std::sqrt(acc / double(max_bin + 1));
    ++count;
  }
  if (count == 0) throw std::runtime_error("lsd: no frames with energy");
  return total / double(count);
}

double mc_pairwise_dev(double sigma, int n, int iters, std::uint64_t seed) {
  unison::Rng rng(seed);
  std::vector<double> x(std::size_t(n), 0.0);
  double total = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (double& v : x) v = sigma * rng.next_gaussian();
    double acc = 0.0;
    int pairs = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        acc += std::abs(x[std::size_t(i)] - x[std::size_t(j)]);
        ++pairs;
      }
    total += acc / pairs;
  }
  return total / iters;
}

double mc_expected_range(double sigma, int n, int iters, std::uint64_t seed,
                         bool with_zero) {
  unison::Rng rng(seed);
  double total = 0.0;
  for (int it = 0; it < iters; ++it) {
    double lo = with_zero ? 0.0 : 1e300;
    double hi = with_zero ? 0.0 : -1e300;
    for (int i = 0; i < n; ++i) {
      double v = sigma * rng.next_gaussian();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    total += hi - lo;
  }
  return total / iters;
}

SectionFixture make_section_fixture(std::uint64_t seed, double scatter_cents,
                                    int n_singers, int sr,
                                    const std::vector<double>& extra_cents) {
  const int n_notes = 8;
  const double note_len = 0.45, gap_len = 0.15, lead = 0.20;
  const double hop = 0.010;
  const double total = lead + n_notes * (note_len + gap_len) + lead;
  const double amp = 0.25;

  unison::Rng pitch_rng = unison::Rng::substream(seed, 1);
  unison::Rng jitter_rng = unison::Rng::substream(seed, 2);

  // Shared melody: random scale degrees around A3.
  std::vector<double> note_hz(n_notes);
  for (double& f : note_hz) {
    int degree = int(pitch_rng.next_u64() % 13);
    f = 220.0 * std::exp2(degree / 12.0);
  }

  SectionFixture fx;
  fx.group.section = unison::Section::soprano;
  std::size_t n_samples = std::size_t(std::lround(total * sr));
  std::size_t n_frames = std::size_t(std::floor(total / hop + 1e-9)) + 1;

  // Dips sit on the nominal note grid so every singer drops out at the
  // same instant. They go only on notes nobody rests on, are 70 ms long
  // (longer than the tracker's 40 ms window, so some frames see a fully
  // quiet window), and stay well inside the note for any boundary jitter.
  auto dip_gain = [&](int note, double t) {
    if (note < n_singers) return 1.0;
    double nominal_on = lead + note * (note_len + gap_len);
    for (double frac : {0.30, 0.62}) {
      double a = nominal_on + frac * note_len;
      double b = a + 0.070;
      if (t < a || t >= b) continue;
      double ramp = 0.005;
      double d = std::min(t - a, b - t);
      double m = std::clamp(d / ramp, 0.0, 1.0);
      return (1.0 - m) + m * 5e-4;
    }
    return 1.0;
  };

  for (int s = 0; s < n_singers; ++s) {
    AudioClip stem;
    stem.sample_rate = sr;
    stem.samples.assign(n_samples, 0.0);
    F0Contour gt;
    gt.hop_seconds = hop;
    gt.values_hz.assign(n_frames, 0.0);

    for (int note = 0; note < n_notes; ++note) {
      if (note == s % n_notes) continue; // this singer's rest

      double cents = scatter_cents * jitter_rng.next_gaussian();
      if (s < int(extra_cents.size())) cents += extra_cents[std::size_t(s)];
      double f = note_hz[std::size_t(note)] * std::exp2(cents / 1200.0);

      double on = lead + note * (note_len + gap_len) +
                  std::clamp(0.020 * jitter_rng.next_gaussian(), -0.05, 0.05);
      double off = on + note_len +
                   std::clamp(0.020 * jitter_rng.next_gaussian(), -0.05, 0.05);

      std::size_t i0 = std::size_t(std::lround(on * sr));
      std::size_t i1 = std::min(n_samples, std::size_t(std::lround(off * sr)));
      std::size_t edge = std::size_t(std::lround(0.010 * sr));
      for (std::size_t i = i0; i < i1; ++i) {
        double t = double(i) / sr;
        double v = 0.0;
        for (int h = 1; h <= 3; ++h)
          v += std::sin(2.0 * M_PI * h * f * (t - on)) / h;
        double g = amp / 1.8333;
        if (i - i0 < edge) g *= double(i - i0 + 1) / double(edge + 1);
        if (i1 - 1 - i < edge) g *= double(i1 - i) / double(edge + 1);
        stem.samples[i] += g * dip_gain(note, t) * v;
      }
      // Annotations stay voiced through the dips: the singers are still
      // phonating there, just far below the tracker's gate.
      for (std::size_t k = 0; k < n_frames; ++k) {
        double t = double(k) * hop;
        if (t >= on && t < off) gt.values_hz[k] = f;
      }
    }
    fx.stems.push_back(std::move(stem));
    fx.group.contours.push_back(std::move(gt));
  }
  fx.mix = unison::mix_and_normalize(fx.stems);
  return fx;
}

std::string make_temp_dir() {
  char tmpl[] = "/tmp/unison_test_XXXXXX";
  char* dir = mkdtemp(tmpl);
  if (!dir) throw std::runtime_error("mkdtemp failed");
  return dir;
}

} // namespace testutil
