#pragma once

#include <string>
#include <vector>

namespace unison {

// Mono sample buffer, the signal currency of every module. Samples are
// doubles in [-1, 1]; immutable by convention once built.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  bool empty() const { return samples.empty(); }
};

// Peak level used whenever a mix or synthesis output is normalized
// (~= -1 dBFS, leaves headroom for the 16-bit quantizer).
inline constexpr double kNormalizePeak = 0.89;

// Reads a RIFF/WAV file. PCM 16-bit and IEEE float 32-bit are accepted;
// multi-channel content is averaged down to mono.
AudioClip load_wav(const std::string& path);

// Writes PCM 16-bit mono. Round trip through load_wav is exact to within
// one quantization step per sample.
void save_wav(const AudioClip& clip, const std::string& path);

// Sample-wise sum of the clips (shorter ones zero-padded), peak-normalized
// to kNormalizePeak. All-zero sums are returned as-is. Mixed sample rates
// are an error; no resampling happens here.
AudioClip mix_and_normalize(const std::vector<AudioClip>& clips);

} // namespace unison
