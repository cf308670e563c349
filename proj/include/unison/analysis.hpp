#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "unison/audio.hpp"
#include "unison/contour.hpp"
#include "unison/metrics.hpp"
#include "unison/pitch.hpp"

namespace unison {

// Which frames enter the pairwise deviation. all_voiced admits a frame only
// when every singer is voiced there, so every admitted frame averages the
// same C(n,2) pairs; per_pair_voiced admits any frame with at least one
// mutually voiced pair and averages over just those pairs.
enum class FrameAdmission { all_voiced, per_pair_voiced };

// Frame-wise mean absolute pairwise F0 difference for one section.
struct DeviationStats {
  std::string section_label;
  std::vector<double> per_frame_deviations; // cents, admitted frames only
  std::vector<std::size_t> frame_indices;   // source frame of each entry
  double mean_cents = 0.0;
  double std_cents = 0.0;

  // True when no frame was admitted (e.g. disjoint voicing); callers treat
  // this as "no data", not as zero deviation.
  bool empty() const { return per_frame_deviations.empty(); }
};

DeviationStats inter_singer_deviation(
    const UnisonGroup& group,
    FrameAdmission admission = FrameAdmission::all_voiced);

// Maximal runs of frames where the singers disagree on voicing (at least
// one voiced and at least one unvoiced): the stretches around note onsets
// and offsets where the section is not entirely in sync.
struct TransitionStats {
  std::string section_label;
  std::vector<double> region_lengths; // seconds, one per run
  double mean_seconds = 0.0;
  double std_seconds = 0.0;

  std::size_t count() const { return region_lengths.size(); }
};

TransitionStats transition_regions(const UnisonGroup& group);

// Tracks F0 on the mixed clip and scores it against each singer's
// annotation and against their frame-wise mean, all on the group's grid.
struct UnisonCompareReport {
  std::vector<MetricsReport> vs_individual; // one per singer, group order
  MetricsReport vs_mean;
};

UnisonCompareReport compare_unison_f0(const UnisonGroup& group,
                                      const AudioClip& unison_clip,
                                      const TrackerConfig& cfg = {},
                                      double tolerance_cents = 30.0);

} // namespace unison
