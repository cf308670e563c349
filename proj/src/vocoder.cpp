#include "unison/vocoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "unison/error.hpp"
#include "unison/fft.hpp"
#include "unison/rng.hpp"

namespace unison::vocoder {

namespace {

// Log-amplitude floor for frames with no measurable energy; exp(2 * this)
// is far below the 16-bit noise floor but still a normal double.
constexpr double kSilenceLogAmp = -34.5;
// Power floor within a frame, relative to the frame's spectral peak.
constexpr double kFloorRel = 1e-8; // -80 dB

double hann(int i, int len) {
  if (len <= 1) return 1.0;
  return 0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(len - 1));
}

// Copies a Hann-windowed segment of win_len samples centered at `center`
// into dst[0..win_len), zero-padding outside the clip. Returns the mean
// power of the segment under the window (sum(x*w)^2 / sum(w^2)).
double windowed_segment(const std::vector<double>& x, std::int64_t center,
                        int win_len, std::vector<double>& dst) {
  double energy = 0.0;
  double wsum2 = 0.0;
  std::int64_t start = center - win_len / 2;
  for (int i = 0; i < win_len; ++i) {
    std::int64_t idx = start + i;
    double w = hann(i, win_len);
    double s = (idx >= 0 && idx < std::int64_t(x.size())) ? x[std::size_t(idx)] : 0.0;
    dst[std::size_t(i)] = s * w;
    energy += s * w * s * w;
    wsum2 += w * w;
  }
  return wsum2 > 0.0 ? energy / wsum2 : 0.0;
}

// Rectangular moving average of width_hz across the power spectrum, with
// mirror extension at DC and Nyquist. Fills the valleys between harmonics
// so the log envelope never collapses to the floor there.
void smooth_power(std::vector<double>& p, double bin_hz, double width_hz) {
  int nb = int(p.size());
  if (nb < 3 || width_hz <= bin_hz) return;
  int period = 2 * nb - 2;
  auto mirrored = [&](int i) {
    i = ((i % period) + period) % period;
    return i < nb ? p[std::size_t(i)] : p[std::size_t(period - i)];
  };
  double half_bins = 0.5 * width_hz / bin_hz;
  int hw = int(std::floor(half_bins));
  double frac = half_bins - hw;
  std::vector<double> out(std::size_t(nb), 0.0);
  for (int i = 0; i < nb; ++i) {
    double acc = 0.0;
    for (int j = i - hw; j <= i + hw; ++j) acc += mirrored(j);
    acc += frac * (mirrored(i - hw - 1) + mirrored(i + hw + 1));
    out[std::size_t(i)] = acc / (2.0 * half_bins + 1.0);
  }
  p.swap(out);
}

// One-sided minimum-phase cepstrum -> complex spectrum exp(sum a_m z^-m),
// interleaved (re, im) over fft.bins() entries.
void min_phase_spectrum(const std::vector<double>& onesided, RealFft& fft,
                        std::vector<double>& time_buf,
                        std::vector<double>& spec_buf) {
  std::fill(time_buf.begin(), time_buf.end(), 0.0);
  std::size_t limit = std::min(onesided.size(), time_buf.size());
  std::copy(onesided.begin(), onesided.begin() + std::ptrdiff_t(limit),
            time_buf.begin());
  fft.forward(time_buf, spec_buf);
  for (int b = 0; b < fft.bins(); ++b) {
    double re = spec_buf[std::size_t(2 * b)];
    double im = spec_buf[std::size_t(2 * b + 1)];
    double mag = std::exp(re);
    spec_buf[std::size_t(2 * b)] = mag * std::cos(im);
    spec_buf[std::size_t(2 * b + 1)] = mag * std::sin(im);
  }
}

std::array<double, kNumApBands + 1> band_edges(int sample_rate) {
  double nyq = sample_rate / 2.0;
  std::array<double, kNumApBands + 1> e{0.0, 1000.0, 2000.0, 4000.0, nyq};
  for (int i = 1; i <= kNumApBands; ++i) e[std::size_t(i)] = std::min(e[std::size_t(i)], nyq);
  for (int i = 1; i <= kNumApBands; ++i)
    e[std::size_t(i)] = std::max(e[std::size_t(i)], e[std::size_t(i - 1)]);
  return e;
}

// Gap bins of a perfectly periodic tone still read a fraction of a percent
// of band power through window sidelobes; ratios below this instrument
// floor mean fully periodic.
constexpr double kApLeakageFloor = 0.01;

// Aperiodicity per band: mean power in the middle third of each
// inter-harmonic gap over mean power in the whole band. Needs the longer
// six-period window so harmonic mainlobes (half-width f/3) clear the gaps.
std::array<double, kNumApBands> band_aperiodicity(
    const std::vector<double>& power, double bin_hz, double f0,
    const std::array<double, kNumApBands + 1>& edges) {
  std::array<double, kNumApBands> ap{};
  ap.fill(-1.0);
  for (int band = 0; band < kNumApBands; ++band) {
    double lo = edges[std::size_t(band)];
    double hi = edges[std::size_t(band + 1)];
    double total = 0.0, gap = 0.0;
    std::size_t total_n = 0, gap_n = 0;
    for (std::size_t b = 0; b < power.size(); ++b) {
      double nu = double(b) * bin_hz;
      if (nu < lo || nu >= hi) continue;
      total += power[b];
      ++total_n;
      double m = std::fmod(nu, f0);
      double dist = std::min(m, f0 - m);
      if (dist >= f0 / 3.0) {
        gap += power[b];
        ++gap_n;
      }
    }
    if (gap_n == 0 || total_n == 0 || total <= 0.0) continue;
    double ratio = (gap / double(gap_n)) / (total / double(total_n));
    ratio = ratio <= kApLeakageFloor
                ? 0.0
                : (ratio - kApLeakageFloor) / (1.0 - kApLeakageFloor);
    ap[std::size_t(band)] = std::clamp(ratio, 0.0, 1.0);
  }
  // Bands too narrow to contain a gap borrow from the nearest valid band.
  for (int band = 0; band < kNumApBands; ++band) {
    if (ap[std::size_t(band)] >= 0.0) continue;
    double fallback = 1.0;
    for (int d = 1; d < kNumApBands; ++d) {
      int left = band - d, right = band + d;
      if (left >= 0 && ap[std::size_t(left)] >= 0.0) { fallback = ap[std::size_t(left)]; break; }
      if (right < kNumApBands && ap[std::size_t(right)] >= 0.0) { fallback = ap[std::size_t(right)]; break; }
    }
    ap[std::size_t(band)] = fallback;
  }
  return ap;
}

// Per-bin aperiodic share, piecewise linear between band centers.
std::vector<double> interp_band_ap(const std::array<double, kNumApBands>& ap,
                                   const std::array<double, kNumApBands + 1>& edges,
                                   int bins, double bin_hz) {
  std::array<double, kNumApBands> centers;
  for (int b = 0; b < kNumApBands; ++b)
    centers[std::size_t(b)] = 0.5 * (edges[std::size_t(b)] + edges[std::size_t(b + 1)]);
  std::vector<double> out(std::size_t(bins), 0.0);
  for (int b = 0; b < bins; ++b) {
    double nu = b * bin_hz;
    double v;
    if (nu <= centers[0]) {
      v = ap[0];
    } else if (nu >= centers[kNumApBands - 1]) {
      v = ap[kNumApBands - 1];
    } else {
      int seg = 0;
      while (seg + 1 < kNumApBands && centers[std::size_t(seg + 1)] < nu) ++seg;
      double t = (nu - centers[std::size_t(seg)]) /
                 (centers[std::size_t(seg + 1)] - centers[std::size_t(seg)]);
      v = ap[std::size_t(seg)] + t * (ap[std::size_t(seg + 1)] - ap[std::size_t(seg)]);
    }
    out[std::size_t(b)] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

} // namespace

int fft_size(int sample_rate) {
  double ideal = 2048.0 * double(sample_rate) / 44100.0;
  int expo = int(std::lround(std::log2(ideal)));
  expo = std::max(expo, 8);
  return 1 << expo;
}

std::vector<double> warp_cepstrum(const std::vector<double>& cep,
                                  std::size_t out_size, double alpha) {
  std::vector<double> g(out_size, 0.0);
  if (cep.empty() || out_size == 0) return g;
  std::vector<double> prev(out_size, 0.0);
  int m2 = int(out_size) - 1;
  double b = 1.0 - alpha * alpha;
  for (int i = int(cep.size()) - 1; i >= 0; --i) {
    prev.swap(g);
    g[0] = cep[std::size_t(i)] + alpha * prev[0];
    if (m2 >= 1) g[1] = b * prev[0] + alpha * prev[1];
    for (int j = 2; j <= m2; ++j)
      g[std::size_t(j)] = prev[std::size_t(j - 1)] +
                          alpha * (prev[std::size_t(j)] - g[std::size_t(j - 1)]);
  }
  return g;
}

std::vector<double> envelope_from_mfsc(const std::array<double, kNumMfsc>& mfsc,
                                       int nfft, double alpha) {
  RealFft fft(nfft);
  std::vector<double> onesided(mfsc.begin(), mfsc.end());
  std::vector<double> unwarped =
      warp_cepstrum(onesided, std::size_t(nfft / 2), -alpha);
  std::vector<double> time_buf(std::size_t(nfft), 0.0);
  std::copy(unwarped.begin(), unwarped.end(), time_buf.begin());
  std::vector<double> spec = fft.make_spectrum();
  fft.forward(time_buf, spec);
  std::vector<double> env(std::size_t(fft.bins()), 0.0);
  for (int b = 0; b < fft.bins(); ++b) env[std::size_t(b)] = spec[std::size_t(2 * b)];
  return env;
}

VocoderFeatures analyze(const AudioClip& clip, const F0Contour& f0) {
  if (clip.sample_rate <= 0 || clip.empty())
    throw Error(ErrorCode::empty_audio, "vocoder: empty clip");
  if (std::abs(f0.hop_seconds - kFrameHop) > 1e-9)
    throw Error(ErrorCode::grid_mismatch,
                "vocoder: f0 contour not on the vocoder hop grid");
  int sr = clip.sample_rate;
  double hop_samples = kFrameHop * sr;
  std::size_t expected =
      std::size_t(std::floor(double(clip.samples.size()) / hop_samples)) + 1;
  std::size_t frames = f0.size();
  if (frames + 2 < expected || frames > expected + 2)
    throw Error(ErrorCode::grid_mismatch,
                "vocoder: f0 has " + std::to_string(frames) +
                    " frames, clip expects about " + std::to_string(expected));

  int nfft = fft_size(sr);
  RealFft fft(nfft);
  double bin_hz = double(sr) / nfft;
  auto edges = band_edges(sr);

  VocoderFeatures feats;
  feats.f0 = f0;
  feats.sample_rate = sr;
  feats.mfsc.resize(frames);
  feats.band_ap.resize(frames);

  std::vector<double> seg(std::size_t(nfft), 0.0);
  std::vector<double> spec = fft.make_spectrum();
  std::vector<double> power(std::size_t(fft.bins()), 0.0);
  std::vector<double> cep(std::size_t(nfft), 0.0);
  std::vector<double> time_buf(std::size_t(nfft), 0.0);

  for (std::size_t k = 0; k < frames; ++k) {
    bool voiced = f0.voiced(k);
    double f = voiced ? f0.values_hz[k] : kUnvoicedF0;
    std::int64_t center = std::llround(double(k) * hop_samples);

    int win = voiced ? int(std::lround(3.0 * sr / f))
                     : int(std::lround(0.040 * sr));
    win = std::clamp(win, 16, nfft);
    std::fill(seg.begin(), seg.end(), 0.0);
    double frame_power = windowed_segment(clip.samples, center, win, seg);

    fft.forward(seg, spec);
    for (int b = 0; b < fft.bins(); ++b) {
      double re = spec[std::size_t(2 * b)], im = spec[std::size_t(2 * b + 1)];
      power[std::size_t(b)] = re * re + im * im;
    }
    smooth_power(power, bin_hz, 2.0 * f / 3.0);

    double peak = *std::max_element(power.begin(), power.end());
    auto& mf = feats.mfsc[k];
    if (peak < 1e-30 || frame_power < 1e-30) {
      mf.fill(0.0);
      mf[0] = kSilenceLogAmp;
      feats.band_ap[k].fill(1.0);
      continue;
    }

    double floor_p = peak * kFloorRel;
    for (int b = 0; b < fft.bins(); ++b) {
      spec[std::size_t(2 * b)] = 0.5 * std::log(std::max(power[std::size_t(b)], floor_p));
      spec[std::size_t(2 * b + 1)] = 0.0;
    }
    fft.inverse(spec, cep);

    double cutoff_s = voiced ? 0.8 / f : 0.005;
    int q_cut = std::clamp(int(std::lround(cutoff_s * sr)), 2, nfft / 2 - 1);
    std::vector<double> onesided(std::size_t(q_cut), 0.0);
    onesided[0] = cep[0];
    for (int m = 1; m < q_cut; ++m) onesided[std::size_t(m)] = 2.0 * cep[std::size_t(m)];

    std::vector<double> warped = warp_cepstrum(onesided, kNumMfsc, kWarpAlpha);

    // Calibrate so the harmonic model under this envelope carries the
    // frame's measured power: P_model = sr/(2*nfft*f) * integral of the
    // power envelope (harmonic spacing f turns the sum into a density).
    std::fill(time_buf.begin(), time_buf.end(), 0.0);
    std::vector<double> unwarped =
        warp_cepstrum(warped, std::size_t(nfft / 2), -kWarpAlpha);
    std::copy(unwarped.begin(), unwarped.end(), time_buf.begin());
    fft.forward(time_buf, spec);
    double env_sum = 0.0;
    double e_first = 0.0, e_last = 0.0;
    for (int b = 0; b < fft.bins(); ++b) {
      double e = std::exp(2.0 * spec[std::size_t(2 * b)]);
      env_sum += e;
      if (b == 0) e_first = e;
      if (b == fft.bins() - 1) e_last = e;
    }
    env_sum -= 0.5 * (e_first + e_last);
    double p_model = sr * env_sum / (2.0 * double(nfft) * f);
    if (p_model > 0.0 && frame_power > 0.0)
      warped[0] += 0.5 * std::log(frame_power / p_model);

    std::copy(warped.begin(), warped.end(), mf.begin());

    if (!voiced) {
      feats.band_ap[k].fill(1.0);
      continue;
    }
    int win6 = std::clamp(int(std::lround(6.0 * sr / f)), 16, nfft);
    std::fill(seg.begin(), seg.end(), 0.0);
    windowed_segment(clip.samples, center, win6, seg);
    fft.forward(seg, spec);
    for (int b = 0; b < fft.bins(); ++b) {
      double re = spec[std::size_t(2 * b)], im = spec[std::size_t(2 * b + 1)];
      power[std::size_t(b)] = re * re + im * im;
    }
    feats.band_ap[k] = band_aperiodicity(power, bin_hz, f, edges);
  }
  return feats;
}

VocoderFeatures transpose_f0(const VocoderFeatures& feats,
                             const std::vector<double>& offset_cents) {
  if (offset_cents.size() != feats.frames())
    throw Error(ErrorCode::invalid_argument,
                "transpose: offset count " + std::to_string(offset_cents.size()) +
                    " does not match frame count " +
                    std::to_string(feats.frames()));
  VocoderFeatures out = feats;
  for (std::size_t k = 0; k < out.frames(); ++k)
    if (out.f0.voiced(k))
      out.f0.values_hz[k] *= std::exp2(offset_cents[k] / 1200.0);
  return out;
}

AudioClip synthesize(const VocoderFeatures& feats, std::uint64_t noise_seed) {
  int sr = feats.sample_rate;
  std::size_t frames = feats.frames();
  if (sr <= 0)
    throw Error(ErrorCode::invalid_argument, "synthesize: missing sample rate");
  if (feats.mfsc.size() != frames || feats.band_ap.size() != frames)
    throw Error(ErrorCode::grid_mismatch,
                "synthesize: feature streams disagree on frame count");

  AudioClip out;
  out.sample_rate = sr;
  if (frames == 0) return out;

  int nfft = fft_size(sr);
  RealFft fft(nfft);
  double hop_samples = kFrameHop * sr;
  std::int64_t n_out = std::llround(double(frames) * hop_samples);
  std::vector<double> buf(std::size_t(n_out + nfft), 0.0);

  auto edges = band_edges(sr);
  double bin_hz = double(sr) / nfft;
  int hop_i = int(std::lround(hop_samples));
  int noise_len = 2 * hop_i;

  // sin window: power-complementary at half-window overlap, so the noise
  // floor carries no audible frame-rate ripple.
  std::vector<double> noise_win(std::size_t(noise_len), 0.0);
  for (int i = 0; i < noise_len; ++i)
    noise_win[std::size_t(i)] = std::sin(M_PI * double(i) / double(noise_len));

  // Pitch marks walk through voiced runs at the local period. The mark keeps
  // its sub-sample offset; rounding onsets to whole samples would jitter the
  // pulse train and smear noise sidebands between the harmonics.
  struct Mark {
    std::int64_t sample;
    double frac;
    std::size_t frame;
  };
  std::vector<Mark> marks;
  std::size_t k = 0;
  while (k < frames) {
    if (!feats.f0.voiced(k)) {
      ++k;
      continue;
    }
    std::size_t k1 = k;
    while (k1 + 1 < frames && feats.f0.voiced(k1 + 1)) ++k1;
    double t = double(k) * kFrameHop;
    double t_end = double(k1) * kFrameHop + 0.5 * kFrameHop;
    while (t < t_end) {
      std::size_t ki = std::clamp(std::size_t(std::llround(t / kFrameHop)), k, k1);
      double ts = t * sr;
      double si = std::floor(ts);
      marks.push_back({std::int64_t(si), ts - si, ki});
      t += 1.0 / feats.f0.values_hz[ki];
    }
    k = k1 + 1;
  }
  std::vector<std::vector<std::size_t>> marks_by_frame(frames);
  for (std::size_t m = 0; m < marks.size(); ++m)
    marks_by_frame[marks[m].frame].push_back(m);

  Rng noise_rng = Rng::substream(noise_seed, 0x6e6f6973ULL);

  std::vector<double> time_buf(std::size_t(nfft), 0.0);
  std::vector<double> spec_h = fft.make_spectrum();
  std::vector<double> spec_n = fft.make_spectrum();
  std::vector<double> spec_pulse = fft.make_spectrum();
  std::vector<double> seg(std::size_t(nfft), 0.0);
  std::vector<double> impulse(std::size_t(nfft), 0.0);
  std::vector<double> onesided(kNumMfsc);
  std::vector<double> shaped(std::size_t(nfft), 0.0);

  for (std::size_t fr = 0; fr < frames; ++fr) {
    bool voiced = feats.f0.voiced(fr);
    double f = voiced ? feats.f0.values_hz[fr] : kUnvoicedF0;
    double period = double(sr) / f;

    std::copy(feats.mfsc[fr].begin(), feats.mfsc[fr].end(), onesided.begin());
    std::vector<double> unwarped =
        warp_cepstrum(onesided, std::size_t(nfft / 2), -kWarpAlpha);
    min_phase_spectrum(unwarped, fft, time_buf, spec_h);

    std::vector<double> ap =
        interp_band_ap(feats.band_ap[fr], edges, fft.bins(), bin_hz);

    // Noise branch: windowed white noise, shaped by H * sqrt(ap).
    std::fill(seg.begin(), seg.end(), 0.0);
    for (int i = 0; i < noise_len; ++i)
      seg[std::size_t(i)] = noise_rng.next_gaussian() * noise_win[std::size_t(i)];
    fft.forward(seg, spec_n);
    for (int b = 0; b < fft.bins(); ++b) {
      double g = (b == 0) ? 0.0 : std::sqrt(ap[std::size_t(b)]);
      double hr = spec_h[std::size_t(2 * b)] * g;
      double hi = spec_h[std::size_t(2 * b + 1)] * g;
      double nr = spec_n[std::size_t(2 * b)];
      double ni = spec_n[std::size_t(2 * b + 1)];
      spec_n[std::size_t(2 * b)] = hr * nr - hi * ni;
      spec_n[std::size_t(2 * b + 1)] = hr * ni + hi * nr;
    }
    fft.inverse(spec_n, shaped);
    double noise_gain = 0.5 * std::sqrt(period);
    std::int64_t n_start = std::llround(double(fr) * hop_samples) - hop_i;
    for (int i = 0; i < nfft; ++i) {
      std::int64_t idx = n_start + i;
      if (idx < 0 || idx >= std::int64_t(buf.size())) continue;
      buf[std::size_t(idx)] += noise_gain * shaped[std::size_t(i)];
    }

    if (!voiced || marks_by_frame[fr].empty()) continue;

    // Pulse branch: minimum-phase response scaled by sqrt(1 - ap), one
    // copy per pitch mark, gain T/2 so harmonic amplitudes match the
    // envelope. Each copy gets a linear-phase ramp for its sub-sample
    // onset; the wrapped tail is past the minimum-phase decay and inaudible.
    for (int b = 0; b < fft.bins(); ++b) {
      double g = (b == 0) ? 0.0 : std::sqrt(1.0 - ap[std::size_t(b)]);
      spec_pulse[std::size_t(2 * b)] = spec_h[std::size_t(2 * b)] * g;
      spec_pulse[std::size_t(2 * b + 1)] = spec_h[std::size_t(2 * b + 1)] * g;
    }
    double pulse_gain = 0.5 * period;
    for (std::size_t mi : marks_by_frame[fr]) {
      double w = 2.0 * M_PI * marks[mi].frac / double(nfft);
      for (int b = 0; b < fft.bins(); ++b) {
        double c = std::cos(w * b), s = -std::sin(w * b);
        double re = spec_pulse[std::size_t(2 * b)];
        double im = spec_pulse[std::size_t(2 * b + 1)];
        spec_n[std::size_t(2 * b)] = re * c - im * s;
        spec_n[std::size_t(2 * b + 1)] = re * s + im * c;
      }
      spec_n[std::size_t(2 * (nfft / 2) + 1)] = 0.0;
      fft.inverse(spec_n, impulse);
      std::int64_t p = marks[mi].sample;
      for (int i = 0; i < nfft; ++i) {
        std::int64_t idx = p + i;
        if (idx < 0 || idx >= std::int64_t(buf.size())) continue;
        buf[std::size_t(idx)] += pulse_gain * impulse[std::size_t(i)];
      }
    }
  }

  buf.resize(std::size_t(n_out));
  double peak = 0.0;
  for (double v : buf) peak = std::max(peak, std::abs(v));
  if (peak > kNormalizePeak) {
    double s = kNormalizePeak / peak;
    for (double& v : buf) v *= s;
  }
  out.samples = std::move(buf);
  return out;
}

} // namespace unison::vocoder
