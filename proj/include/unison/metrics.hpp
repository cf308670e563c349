#pragma once

#include <string>

#include "unison/contour.hpp"

namespace unison {

// Frame-wise melody-evaluation scores, all in [0, 1]. Unweighted frame
// counts; degenerate denominators yield 0 rather than an error so batch
// averaging never aborts.
struct MetricsReport {
  double rpa = 0.0; // voiced ref frames with voiced est within tolerance
  double oa = 0.0;  // correct voiced-pitch frames + correctly unvoiced frames
  double vr = 0.0;  // voiced ref frames judged voiced
  double vfa = 0.0; // unvoiced ref frames judged voiced
  double tolerance_cents = 30.0;
};

// est and ref must be on identical grids (resample first).
MetricsReport evaluate_melody(const F0Contour& est, const F0Contour& ref,
                              double tolerance_cents = 30.0);

std::string to_json(const MetricsReport& report);

} // namespace unison
