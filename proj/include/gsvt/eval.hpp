#pragma once

#include <optional>
#include <vector>

#include "gsvt/geom.hpp"
#include "gsvt/track.hpp"

namespace gsvt {

struct GroundTruthTrack {
  std::vector<Vec2> points;
  std::vector<bool> visible;

  int frame_count() const { return static_cast<int>(points.size()); }
};

struct EvalConfig {
  std::vector<double> thresholds = {1, 2, 4, 8, 16}; // pixels at eval resolution
  int stride = 5;
  int eval_width = 256;
  int eval_height = 256;
  // Dimensions the track coordinates live in; positions are rescaled from
  // these to the eval resolution before any distance is measured.
  int src_width = 256;
  int src_height = 256;

  void validate() const; // throws std::invalid_argument
};

/// Mean over thresholds of the fraction of ground-truth-visible frames
/// (query frame excluded) whose rescaled prediction error is within the
/// threshold. nullopt when no such frame exists.
std::optional<double> delta_avg(const Track& pred, const GroundTruthTrack& gt,
                                const EvalConfig& config);

/// Mean over thresholds of TP/(TP+FP+FN), where a visible prediction beyond
/// the threshold counts as both a false positive and a false negative.
/// Query frame excluded. nullopt when every frame is occluded on both sides.
std::optional<double> average_jaccard(const Track& pred, const GroundTruthTrack& gt,
                                      const EvalConfig& config);

/// Fraction of frames (query frame excluded) where the visibility flags agree.
std::optional<double> occlusion_accuracy(const Track& pred, const GroundTruthTrack& gt);

/// One query per stride-grid frame at which the ground truth is visible,
/// positioned at the ground-truth point.
std::vector<Query> strided_queries(const GroundTruthTrack& gt, const EvalConfig& config);

struct EvalReport {
  double aj = 0.0;
  double delta_avg = 0.0;
  double oa = 0.0;
  int pairs = 0; // pairs that entered at least one average
};

/// Averages each metric over the paired lists, skipping undefined entries.
/// Throws std::invalid_argument on empty or mismatched inputs.
EvalReport evaluate(const std::vector<Track>& tracks,
                    const std::vector<GroundTruthTrack>& gts, const EvalConfig& config);

} // namespace gsvt
