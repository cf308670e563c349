#pragma once

// Signal generators, statistics oracles, and synthetic choir fixtures
// shared by the unit and acceptance suites. Everything here is seeded and
// repeatable.

#include <cstdint>
#include <string>
#include <vector>

#include "unison/audio.hpp"
#include "unison/contour.hpp"
#include "unison/metrics.hpp"

namespace testutil {

unison::AudioClip sine(double freq_hz, double seconds, int sr = 44100,
                       double amp = 0.3);
unison::AudioClip harmonic_tone(double f0_hz, double seconds, int sr = 44100,
                                double amp = 0.3, int harmonics = 3);
// Additive sawtooth with harmonics up to just under Nyquist.
unison::AudioClip sawtooth(double f0_hz, double seconds, int sr = 44100,
                           double amp = 0.3);
unison::AudioClip vibrato_tone(double f0_hz, double depth_cents, double rate_hz,
                               double seconds, int sr = 44100, double amp = 0.3);
// Exponential (log-linear) frequency glide.
unison::AudioClip glide_tone(double f_start_hz, double f_end_hz, double seconds,
                             int sr = 44100, double amp = 0.3);

struct Formants {
  double f1, f2, f3;
};
inline constexpr Formants kVowelA{730, 1090, 2440};
inline constexpr Formants kVowelE{530, 1840, 2480};
inline constexpr Formants kVowelI{270, 2290, 3010};
inline constexpr Formants kVowelO{570, 840, 2410};
inline constexpr Formants kVowelU{300, 870, 2240};

// Sawtooth source through three two-pole formant resonators.
unison::AudioClip vowel(double f0_hz, const Formants& formants, double seconds,
                        int sr = 44100, double amp = 0.35);

unison::AudioClip white_noise(double seconds, int sr, double amp,
                              std::uint64_t seed);
unison::AudioClip silence(double seconds, int sr = 44100);
unison::AudioClip concat(const std::vector<unison::AudioClip>& parts);
void fade_edges(unison::AudioClip& clip, double seconds);

// Ground-truth contours matching the generators above.
unison::F0Contour const_contour(double f0_hz, double seconds, double hop = 0.010);
unison::F0Contour vibrato_contour(double f0_hz, double depth_cents,
                                  double rate_hz, double seconds,
                                  double hop = 0.010);
unison::F0Contour glide_contour(double f_start_hz, double f_end_hz,
                                double seconds, double hop = 0.010);

// Tracks the clip and scores it against ref on ref's grid (contours are
// truncated to the shorter one).
unison::MetricsReport score_against(const unison::AudioClip& clip,
                                    const unison::F0Contour& ref,
                                    double tol_cents);

// Independent re-implementation of the melody metrics, written as plain
// per-frame case analysis.
unison::MetricsReport metrics_oracle(const unison::F0Contour& est,
                                     const unison::F0Contour& ref,
                                     double tol_cents);

// Mean per-frame RMS difference of the two log spectra in dB, bins up to
// fmax_hz, floored 60 dB under the louder frame's peak.
double lsd_db(const unison::AudioClip& a, const unison::AudioClip& b,
              double fmax_hz);

// Monte-Carlo mean of the pairwise |x_i - x_j| average for n iid
// Normal(0, sigma) draws.
double mc_pairwise_dev(double sigma, int n, int iters, std::uint64_t seed);
// Monte-Carlo E[max - min] of n Normal(0, sigma) draws; with_zero pins one
// extra draw at exactly 0 (the unperturbed clone).
double mc_expected_range(double sigma, int n, int iters, std::uint64_t seed,
                         bool with_zero = false);

// A synthetic choir section: per-singer stems with per-note pitch offsets,
// jittered note boundaries, and one rest note per singer. Notes nobody
// rests on carry brief deep amplitude dips at fixed wall-clock times, so
// all singers drop below the tracker's gate together while their
// annotations stay voiced. Annotations follow the stems exactly.
struct SectionFixture {
  unison::UnisonGroup group; // hop 0.010
  std::vector<unison::AudioClip> stems;
  unison::AudioClip mix;
};
SectionFixture make_section_fixture(std::uint64_t seed, double scatter_cents,
                                    int n_singers = 4, int sr = 22050,
                                    const std::vector<double>& extra_cents = {});

std::string make_temp_dir();

} // namespace testutil
