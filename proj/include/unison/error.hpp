#pragma once

#include <stdexcept>
#include <string>

namespace unison {

enum class ErrorCode {
  io_failure,         // file missing, unreadable, or unwritable
  bad_format,         // malformed container or CSV
  unsupported_codec,  // WAV codec outside PCM16 / float32
  empty_audio,        // zero-length sample data
  mixed_sample_rates, // clips with differing rates where one rate is required
  invalid_argument,   // parameter outside its documented domain
  clip_too_short,     // signal shorter than one analysis window
  grid_mismatch,      // contours or features on incompatible time grids
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace unison
