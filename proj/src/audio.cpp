#include "unison/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "unison/error.hpp"

namespace unison {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

double clamp_sample(double v) { return std::clamp(v, -1.0, 1.0); }

} // namespace

AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::io_failure, "read failed for " + path);
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t size = data.size();

  if (size < 12 || std::memcmp(bytes, "RIFF", 4) != 0 || std::memcmp(bytes + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::bad_format, "not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint32_t chunk_size = read_u32(bytes + pos + 4);
    const unsigned char* body = bytes + pos + 8;
    const std::size_t avail = std::min<std::size_t>(chunk_size, size - pos - 8);
    if (std::memcmp(bytes + pos, "fmt ", 4) == 0) {
      if (avail < 16) throw Error(ErrorCode::bad_format, "truncated fmt chunk: " + path);
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible && avail >= 26)
        format = read_u16(body + 24); // first word of the SubFormat GUID
      have_fmt = true;
    } else if (std::memcmp(bytes + pos, "data", 4) == 0) {
      pcm = body;
      pcm_size = avail;
    }
    pos += 8 + chunk_size + (chunk_size & 1); // chunks are word-aligned
  }

  if (!have_fmt || pcm == nullptr) throw Error(ErrorCode::bad_format, "missing fmt/data chunk: " + path);
  if (channels == 0 || rate == 0) throw Error(ErrorCode::bad_format, "bad fmt chunk: " + path);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw Error(ErrorCode::unsupported_codec,
                "only PCM16 and float32 WAV are supported (format " + std::to_string(format) +
                    ", " + std::to_string(bits) + " bits): " + path);

  const std::size_t bytes_per_sample = bits / 8u;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = frame_bytes > 0 ? pcm_size / frame_bytes : 0;
  if (frames == 0) throw Error(ErrorCode::empty_audio, "no audio frames in " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = pcm + f * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        const auto v = static_cast<std::int16_t>(read_u16(s));
        acc += static_cast<double>(v) / 32767.0;
      } else {
        float v;
        std::memcpy(&v, s, 4);
        acc += static_cast<double>(v);
      }
    }
    clip.samples[f] = clamp_sample(acc / channels);
  }
  return clip;
}

void save_wav(const AudioClip& clip, const std::string& path) {
  if (clip.empty()) throw Error(ErrorCode::empty_audio, "refusing to write empty clip: " + path);
  if (clip.sample_rate <= 0) throw Error(ErrorCode::invalid_argument, "bad sample rate");

  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1); // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);  // block align
  put_u16(out, 16); // bits
  out.append("data");
  put_u32(out, data_bytes);
  for (double v : clip.samples) {
    const double scaled = clamp_sample(v) * 32767.0;
    const auto q = static_cast<std::int16_t>(std::lround(scaled));
    put_u16(out, static_cast<std::uint16_t>(q));
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::io_failure, "cannot open for writing: " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw Error(ErrorCode::io_failure, "write failed: " + path);
}

AudioClip mix_and_normalize(const std::vector<AudioClip>& clips) {
  if (clips.empty()) throw Error(ErrorCode::invalid_argument, "mix_and_normalize needs >= 1 clip");
  const int rate = clips.front().sample_rate;
  std::size_t longest = 0;
  for (const auto& c : clips) {
    if (c.sample_rate != rate)
      throw Error(ErrorCode::mixed_sample_rates, "clips must share one sample rate");
    longest = std::max(longest, c.samples.size());
  }

  AudioClip mix;
  mix.sample_rate = rate;
  mix.samples.assign(longest, 0.0);
  for (const auto& c : clips)
    for (std::size_t i = 0; i < c.samples.size(); ++i) mix.samples[i] += c.samples[i];

  double peak = 0.0;
  for (double v : mix.samples) peak = std::max(peak, std::fabs(v));
  if (peak > 0.0) {
    const double gain = kNormalizePeak / peak;
    for (double& v : mix.samples) v *= gain;
  }
  return mix;
}

} // namespace unison
