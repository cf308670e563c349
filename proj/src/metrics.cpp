#include "unison/metrics.hpp"

#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "unison/error.hpp"

namespace unison {

MetricsReport evaluate_melody(const F0Contour& est, const F0Contour& ref,
                              double tolerance_cents) {
  if (est.values_hz.size() != ref.values_hz.size())
    throw Error(ErrorCode::grid_mismatch,
                "metrics: contours have different frame counts (" +
                    std::to_string(est.values_hz.size()) + " vs " +
                    std::to_string(ref.values_hz.size()) + ")");
  double hop_rel = std::abs(est.hop_seconds - ref.hop_seconds) /
                   std::max(est.hop_seconds, ref.hop_seconds);
  if (!(hop_rel <= 1e-9))
    throw Error(ErrorCode::grid_mismatch,
                "metrics: contours have different hop sizes");
  if (tolerance_cents <= 0.0)
    throw Error(ErrorCode::invalid_argument,
                "metrics: tolerance must be positive");

  std::size_t n = ref.values_hz.size();
  std::size_t ref_voiced = 0;
  std::size_t ref_unvoiced = 0;
  std::size_t both_voiced_correct = 0; // voiced ref, voiced est, within tol
  std::size_t voiced_recalled = 0;     // voiced ref, voiced est
  std::size_t false_voiced = 0;        // unvoiced ref, voiced est
  std::size_t both_unvoiced = 0;

  for (std::size_t i = 0; i < n; ++i) {
    double r = ref.values_hz[i];
    double e = est.values_hz[i];
    bool rv = r > 0.0;
    bool ev = e > 0.0;
    if (rv) {
      ++ref_voiced;
      if (ev) {
        ++voiced_recalled;
        double diff = std::abs(hz_to_cents(e) - hz_to_cents(r));
        if (diff <= tolerance_cents) ++both_voiced_correct;
      }
    } else {
      ++ref_unvoiced;
      if (ev)
        ++false_voiced;
      else
        ++both_unvoiced;
    }
  }

  MetricsReport rep;
  rep.tolerance_cents = tolerance_cents;
  rep.rpa = ref_voiced ? double(both_voiced_correct) / double(ref_voiced) : 0.0;
  rep.vr = ref_voiced ? double(voiced_recalled) / double(ref_voiced) : 0.0;
  rep.vfa = ref_unvoiced ? double(false_voiced) / double(ref_unvoiced) : 0.0;
  rep.oa = n ? double(both_voiced_correct + both_unvoiced) / double(n) : 0.0;
  return rep;
}

std::string to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["rpa"] = report.rpa;
  j["oa"] = report.oa;
  j["vr"] = report.vr;
  j["vfa"] = report.vfa;
  j["tolerance_cents"] = report.tolerance_cents;
  return j.dump(2);
}

} // namespace unison
