#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace unison {

// Uniform-hop F0 time series. Frame k sits at t = k * hop_seconds;
// a value of 0 marks an unvoiced frame, anything else is Hz.
struct F0Contour {
  double hop_seconds = 0.010;
  std::vector<double> values_hz;

  std::size_t size() const { return values_hz.size(); }
  bool voiced(std::size_t i) const { return values_hz[i] > 0.0; }
};

enum class Section { soprano, alto, tenor, bass };

const char* to_string(Section s);
// Accepts "S"/"A"/"T"/"B" and full names, case-insensitively.
Section parse_section(const std::string& label);

// One choir section: n singers' contours on a shared grid.
struct UnisonGroup {
  Section section = Section::soprano;
  std::vector<F0Contour> contours;

  std::size_t singers() const { return contours.size(); }
  std::size_t frames() const { return contours.empty() ? 0 : contours.front().size(); }
};

// Throws ErrorCode::grid_mismatch unless all contours share hop and length
// (and there is at least one of them).
void validate_group(const UnisonGroup& group);

// 1200 * log2(f / 440). Errors for f <= 0.
double hz_to_cents(double hz);
// 440 * 2^(c / 1200).
double cents_to_hz(double cents);

// Moves a contour to a new hop. Voicing follows the nearest source frame;
// values interpolate linearly in cents between voiced neighbors inside a
// voiced run, falling back to the nearest voiced value at run edges.
F0Contour resample_contour(const F0Contour& src, double target_hop_seconds);

// Frame-wise mean in Hz over the voiced entries only; a frame is unvoiced
// in the result iff it is unvoiced in every singer.
F0Contour mean_contour(const UnisonGroup& group);

// CSV with columns time_seconds,frequency_hz (header optional on read,
// written on save); 0 Hz marks unvoiced frames.
F0Contour load_contour_csv(const std::string& path);
void save_contour_csv(const F0Contour& contour, const std::string& path);

} // namespace unison
