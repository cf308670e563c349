#include "unison/error.hpp"

namespace unison {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::bad_format: return "bad_format";
    case ErrorCode::unsupported_codec: return "unsupported_codec";
    case ErrorCode::empty_audio: return "empty_audio";
    case ErrorCode::mixed_sample_rates: return "mixed_sample_rates";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::clip_too_short: return "clip_too_short";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace unison
