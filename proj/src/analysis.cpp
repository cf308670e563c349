#include "unison/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "unison/error.hpp"

namespace unison {

namespace {

void mean_and_std(const std::vector<double>& xs, double& mean, double& sd) {
  if (xs.empty()) {
    mean = 0.0;
    sd = 0.0;
    return;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  mean = sum / double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / double(xs.size()));
}

} // namespace

DeviationStats inter_singer_deviation(const UnisonGroup& group,
                                      FrameAdmission admission) {
  validate_group(group);
  std::size_t n = group.singers();
  if (n < 2)
    throw Error(ErrorCode::invalid_argument,
                "deviation: need at least two singers, got " +
                    std::to_string(n));

  DeviationStats stats;
  stats.section_label = to_string(group.section);
  std::size_t frames = group.frames();

  std::vector<double> cents(n);
  std::vector<bool> voiced(n);
  for (std::size_t k = 0; k < frames; ++k) {
    std::size_t voiced_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      voiced[i] = group.contours[i].voiced(k);
      if (voiced[i]) {
        cents[i] = hz_to_cents(group.contours[i].values_hz[k]);
        ++voiced_count;
      }
    }
    if (admission == FrameAdmission::all_voiced && voiced_count < n) continue;
    if (voiced_count < 2) continue;

    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!voiced[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!voiced[j]) continue;
        acc += std::abs(cents[i] - cents[j]);
        ++pairs;
      }
    }
    stats.per_frame_deviations.push_back(acc / double(pairs));
    stats.frame_indices.push_back(k);
  }

  mean_and_std(stats.per_frame_deviations, stats.mean_cents, stats.std_cents);
  return stats;
}

TransitionStats transition_regions(const UnisonGroup& group) {
  validate_group(group);
  std::size_t n = group.singers();
  std::size_t frames = group.frames();
  double hop = group.contours.front().hop_seconds;

  TransitionStats stats;
  stats.section_label = to_string(group.section);

  std::size_t run = 0;
  for (std::size_t k = 0; k <= frames; ++k) {
    bool mixed = false;
    if (k < frames) {
      std::size_t voiced_count = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (group.contours[i].voiced(k)) ++voiced_count;
      mixed = voiced_count > 0 && voiced_count < n;
    }
    if (mixed) {
      ++run;
    } else if (run > 0) {
      stats.region_lengths.push_back(double(run) * hop);
      run = 0;
    }
  }

  mean_and_std(stats.region_lengths, stats.mean_seconds, stats.std_seconds);
  return stats;
}

namespace {

// Puts est onto the group's grid and pads or trims to its frame count so
// evaluate_melody sees equal-length contours. Padded frames are unvoiced.
F0Contour align_to_group(const F0Contour& est, double hop, std::size_t frames) {
  F0Contour out = resample_contour(est, hop);
  out.values_hz.resize(frames, 0.0);
  return out;
}

} // namespace

UnisonCompareReport compare_unison_f0(const UnisonGroup& group,
                                      const AudioClip& unison_clip,
                                      const TrackerConfig& cfg,
                                      double tolerance_cents) {
  validate_group(group);
  double hop = group.contours.front().hop_seconds;
  std::size_t frames = group.frames();

  F0Contour est = track_f0(unison_clip, cfg);
  F0Contour est_aligned = align_to_group(est, hop, frames);

  UnisonCompareReport report;
  report.vs_individual.reserve(group.singers());
  for (const F0Contour& gt : group.contours)
    report.vs_individual.push_back(
        evaluate_melody(est_aligned, gt, tolerance_cents));
  report.vs_mean =
      evaluate_melody(est_aligned, mean_contour(group), tolerance_cents);
  return report;
}

} // namespace unison
