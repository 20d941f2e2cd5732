#include "gsvt/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gsvt {

namespace {

void check_pair(const Track& pred, const GroundTruthTrack& gt) {
  const size_t k = gt.points.size();
  if (k == 0) throw std::invalid_argument("empty ground-truth track");
  if (gt.visible.size() != k)
    throw std::invalid_argument("ground-truth flag count does not match points");
  if (pred.points.size() != k || pred.visible.size() != k)
    throw std::invalid_argument("prediction frame count does not match ground truth");
  if (pred.query.t < 0 || pred.query.t >= static_cast<int>(k))
    throw std::invalid_argument("query frame outside the track");
}

/// Per-frame positional errors at eval resolution; NaN where GT is occluded.
std::vector<double> rescaled_errors(const Track& pred, const GroundTruthTrack& gt,
                                    const EvalConfig& config) {
  const double sx = static_cast<double>(config.eval_width) / config.src_width;
  const double sy = static_cast<double>(config.eval_height) / config.src_height;
  const int k = gt.frame_count();
  std::vector<double> err(k, std::numeric_limits<double>::quiet_NaN());
  for (int t = 0; t < k; ++t) {
    if (!gt.visible[t]) continue;
    const double dx = (pred.points[t].x() - gt.points[t].x()) * sx;
    const double dy = (pred.points[t].y() - gt.points[t].y()) * sy;
    err[t] = std::hypot(dx, dy);
  }
  return err;
}

} // namespace

void EvalConfig::validate() const {
  if (thresholds.empty()) throw std::invalid_argument("no thresholds");
  double prev = 0.0;
  for (double t : thresholds) {
    if (!(t > prev)) throw std::invalid_argument("thresholds must be positive ascending");
    prev = t;
  }
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (eval_width < 1 || eval_height < 1 || src_width < 1 || src_height < 1)
    throw std::invalid_argument("resolutions must be positive");
}

std::optional<double> delta_avg(const Track& pred, const GroundTruthTrack& gt,
                                const EvalConfig& config) {
  config.validate();
  check_pair(pred, gt);
  const std::vector<double> err = rescaled_errors(pred, gt, config);
  const int k = gt.frame_count();

  int visible_frames = 0;
  for (int t = 0; t < k; ++t)
    if (t != pred.query.t && gt.visible[t]) ++visible_frames;
  if (visible_frames == 0) return std::nullopt;

  double sum = 0.0;
  for (double tau : config.thresholds) {
    int within = 0;
    for (int t = 0; t < k; ++t)
      if (t != pred.query.t && gt.visible[t] && err[t] <= tau) ++within;
    sum += static_cast<double>(within) / visible_frames;
  }
  return sum / static_cast<double>(config.thresholds.size());
}

std::optional<double> average_jaccard(const Track& pred, const GroundTruthTrack& gt,
                                      const EvalConfig& config) {
  config.validate();
  check_pair(pred, gt);
  const std::vector<double> err = rescaled_errors(pred, gt, config);
  const int k = gt.frame_count();

  // TP+FP+FN is zero exactly when every counted frame is occluded on both
  // sides, which does not depend on the threshold.
  bool any_positive = false;
  for (int t = 0; t < k; ++t)
    if (t != pred.query.t && (gt.visible[t] || pred.visible[t])) any_positive = true;
  if (!any_positive) return std::nullopt;

  double sum = 0.0;
  for (double tau : config.thresholds) {
    int tp = 0, fp = 0, fn = 0;
    for (int t = 0; t < k; ++t) {
      if (t == pred.query.t) continue;
      const bool within = gt.visible[t] && err[t] <= tau;
      if (gt.visible[t] && pred.visible[t] && within) ++tp;
      if (pred.visible[t] && (!gt.visible[t] || !within)) ++fp;
      if (gt.visible[t] && (!pred.visible[t] || !within)) ++fn;
    }
    sum += static_cast<double>(tp) / (tp + fp + fn);
  }
  return sum / static_cast<double>(config.thresholds.size());
}

std::optional<double> occlusion_accuracy(const Track& pred, const GroundTruthTrack& gt) {
  check_pair(pred, gt);
  const int k = gt.frame_count();
  if (k == 1) return std::nullopt; // only the query frame exists
  int agree = 0;
  for (int t = 0; t < k; ++t)
    if (t != pred.query.t && pred.visible[t] == gt.visible[t]) ++agree;
  return static_cast<double>(agree) / (k - 1);
}

std::vector<Query> strided_queries(const GroundTruthTrack& gt, const EvalConfig& config) {
  config.validate();
  if (gt.points.size() != gt.visible.size())
    throw std::invalid_argument("ground-truth flag count does not match points");
  std::vector<Query> out;
  for (int t = 0; t < gt.frame_count(); t += config.stride)
    if (gt.visible[t]) out.push_back(Query{t, gt.points[t]});
  return out;
}

EvalReport evaluate(const std::vector<Track>& tracks,
                    const std::vector<GroundTruthTrack>& gts, const EvalConfig& config) {
  config.validate();
  if (tracks.empty()) throw std::invalid_argument("nothing to evaluate");
  if (tracks.size() != gts.size())
    throw std::invalid_argument("track/ground-truth count mismatch");

  double aj_sum = 0.0, d_sum = 0.0, oa_sum = 0.0;
  int aj_n = 0, d_n = 0, oa_n = 0, pairs = 0;
  for (size_t i = 0; i < tracks.size(); ++i) {
    const auto aj = average_jaccard(tracks[i], gts[i], config);
    const auto d = delta_avg(tracks[i], gts[i], config);
    const auto oa = occlusion_accuracy(tracks[i], gts[i]);
    if (aj) aj_sum += *aj, ++aj_n;
    if (d) d_sum += *d, ++d_n;
    if (oa) oa_sum += *oa, ++oa_n;
    if (aj || d || oa) ++pairs;
  }
  EvalReport report;
  report.aj = aj_n ? aj_sum / aj_n : 0.0;
  report.delta_avg = d_n ? d_sum / d_n : 0.0;
  report.oa = oa_n ? oa_sum / oa_n : 0.0;
  report.pairs = pairs;
  return report;
}

} // namespace gsvt
