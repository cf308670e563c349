#include "unison/contour.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "unison/error.hpp"

namespace unison {
namespace {

constexpr double kBaseFrequency = 440.0;
constexpr double kGridEps = 1e-9;

bool same_hop(double a, double b) { return std::fabs(a - b) <= kGridEps * std::max(a, b); }

} // namespace

const char* to_string(Section s) {
  switch (s) {
    case Section::soprano: return "soprano";
    case Section::alto: return "alto";
    case Section::tenor: return "tenor";
    case Section::bass: return "bass";
  }
  return "soprano";
}

Section parse_section(const std::string& label) {
  std::string l;
  for (char c : label) l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (l == "s" || l == "soprano") return Section::soprano;
  if (l == "a" || l == "alto") return Section::alto;
  if (l == "t" || l == "tenor") return Section::tenor;
  if (l == "b" || l == "bass") return Section::bass;
  throw Error(ErrorCode::invalid_argument, "unknown section label: " + label);
}

void validate_group(const UnisonGroup& group) {
  if (group.contours.empty())
    throw Error(ErrorCode::invalid_argument, "group has no contours");
  const auto& first = group.contours.front();
  for (const auto& c : group.contours) {
    if (!same_hop(c.hop_seconds, first.hop_seconds) || c.size() != first.size())
      throw Error(ErrorCode::grid_mismatch, "group contours must share hop and length");
  }
}

double hz_to_cents(double hz) {
  if (!(hz > 0.0)) throw Error(ErrorCode::invalid_argument, "hz_to_cents requires f > 0");
  return 1200.0 * std::log2(hz / kBaseFrequency);
}

double cents_to_hz(double cents) {
  return kBaseFrequency * std::exp2(cents / 1200.0);
}

F0Contour resample_contour(const F0Contour& src, double target_hop_seconds) {
  if (!(target_hop_seconds > 0.0))
    throw Error(ErrorCode::invalid_argument, "target hop must be positive");
  F0Contour out;
  out.hop_seconds = target_hop_seconds;
  if (src.values_hz.empty() || !(src.hop_seconds > 0.0)) return out;

  const std::size_t n = src.size();
  const double span = static_cast<double>(n - 1) * src.hop_seconds;
  const std::size_t out_n =
      static_cast<std::size_t>(std::floor(span / target_hop_seconds + kGridEps)) + 1;
  out.values_hz.resize(out_n);

  for (std::size_t j = 0; j < out_n; ++j) {
    double s = static_cast<double>(j) * target_hop_seconds / src.hop_seconds;
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    // Snap to the grid when the position is (numerically) an exact frame.
    const double snapped = std::round(s);
    if (std::fabs(s - snapped) < 1e-6) {
      out.values_hz[j] = src.values_hz[static_cast<std::size_t>(snapped)];
      continue;
    }
    const auto i0 = static_cast<std::size_t>(std::floor(s));
    const std::size_t i1 = std::min(i0 + 1, n - 1);
    const double frac = s - static_cast<double>(i0);
    const std::size_t nearest = frac < 0.5 ? i0 : i1;
    if (!src.voiced(nearest)) {
      out.values_hz[j] = 0.0;
    } else if (src.voiced(i0) && src.voiced(i1)) {
      const double c0 = hz_to_cents(src.values_hz[i0]);
      const double c1 = hz_to_cents(src.values_hz[i1]);
      out.values_hz[j] = cents_to_hz((1.0 - frac) * c0 + frac * c1);
    } else {
      out.values_hz[j] = src.values_hz[nearest];
    }
  }
  return out;
}

F0Contour mean_contour(const UnisonGroup& group) {
  validate_group(group);
  F0Contour out;
  out.hop_seconds = group.contours.front().hop_seconds;
  out.values_hz.assign(group.frames(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    int voiced = 0;
    for (const auto& c : group.contours) {
      if (c.voiced(k)) {
        sum += c.values_hz[k];
        ++voiced;
      }
    }
    out.values_hz[k] = voiced > 0 ? sum / voiced : 0.0;
  }
  return out;
}

F0Contour load_contour_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);

  std::vector<double> times;
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::bad_format, "expected time,frequency rows: " + path);
    char* end = nullptr;
    const std::string tfield = line.substr(0, comma);
    const double t = std::strtod(tfield.c_str(), &end);
    if (end == tfield.c_str()) {
      if (times.empty()) continue; // header row
      throw Error(ErrorCode::bad_format, "unparsable row '" + line + "' in " + path);
    }
    const std::string vfield = line.substr(comma + 1);
    const double v = std::strtod(vfield.c_str(), &end);
    if (end == vfield.c_str())
      throw Error(ErrorCode::bad_format, "unparsable row '" + line + "' in " + path);
    if (v < 0.0) throw Error(ErrorCode::bad_format, "negative frequency in " + path);
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2)
    throw Error(ErrorCode::bad_format, "need at least two rows to infer the hop: " + path);

  const double hop = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(hop > 0.0)) throw Error(ErrorCode::bad_format, "timestamps must increase: " + path);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expected = times.front() + static_cast<double>(i) * hop;
    if (std::fabs(times[i] - expected) > std::max(1e-4, 0.01 * hop))
      throw Error(ErrorCode::bad_format, "timestamps are not on a uniform grid: " + path);
  }

  F0Contour out;
  out.hop_seconds = hop;
  out.values_hz = std::move(values);
  return out;
}

void save_contour_csv(const F0Contour& contour, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::io_failure, "cannot open for writing: " + path);
  os << "time_seconds,frequency_hz\n";
  char buf[64];
  for (std::size_t k = 0; k < contour.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", static_cast<double>(k) * contour.hop_seconds,
                  contour.values_hz[k]);
    os << buf;
  }
  if (!os) throw Error(ErrorCode::io_failure, "write failed: " + path);
}

} // namespace unison
