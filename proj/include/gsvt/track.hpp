#pragma once

#include <vector>

#include "gsvt/geom.hpp"
#include "gsvt/image.hpp"
#include "gsvt/splat.hpp"

namespace gsvt {

struct TrackerConfig {
  int top_k = 8;
  double tau_vis = 0.5;
  double beta = 0.3; // blend between flow advection (0) and anchor mixture (1)
  double eps = 1e-8;
  bool normalize_flow = true;
  RasterConfig raster;

  /// Throws std::invalid_argument on out-of-range values or top_k > n.
  void validate(int n) const;
};

struct Query {
  int t = 0;
  Vec2 p = Vec2::Zero();
};

struct Track {
  Query query;
  std::vector<Vec2> points;  // one per frame; points[query.t] == query.p
  std::vector<bool> visible; // anchor mass >= tau_vis AND in-bounds, per frame
  std::vector<int> anchor_set;
  int gt_index = -1; // source ground-truth track when queries came from one
};

/// Dense displacement field advecting frame t to t+1, in pixels.
struct FlowField {
  int t = 0;
  Image grid; // H x W x 2

  /// Bilinear lookup, zero outside the image.
  Vec2 sample(const Vec2& p) const;
};

/// Projections of every Gaussian's mean at every frame, plus the per-frame
/// image-plane offsets dx[t][i] = x[t+1][i] - x[t][i]. Gaussians that fall
/// behind the near plane at a frame are inactive there: their position is
/// zero-filled and offsets touching that frame are zero.
struct ProjectedTracks {
  int frames = 0;
  int count = 0;
  std::vector<std::vector<Vec2>> x;      // frames x n
  std::vector<std::vector<bool>> active; // frames x n
  std::vector<std::vector<Vec2>> dx;     // (frames-1) x n
};

ProjectedTracks projected_tracks(const GaussianTrajectory& traj, const Camera& camera);

/// Splats the per-Gaussian offsets dx^(t+1) with frame t's Gaussians. With
/// normalize_flow the composited sum is divided per pixel by the accumulated
/// weight plus eps; otherwise it is the raw weighted sum.
FlowField render_flow_field(const GaussianTrajectory& traj, const Camera& camera,
                            int t, const TrackerConfig& config);

/// The top_k Gaussian indices by composited weight at the query point and
/// frame, descending, ties broken by lower index. Fixed for a whole track.
std::vector<int> select_anchors(const GaussianTrajectory& traj, const Camera& camera,
                                const Query& query, const TrackerConfig& config);

struct AnchorState {
  double omega = 0.0;     // total anchor mass at p
  std::vector<double> pi; // renormalized mixture weights, aligned with anchors
};

AnchorState anchor_state(const GaussianTrajectory& traj, const Camera& camera,
                         const std::vector<int>& anchors, const Vec2& p, int t,
                         const TrackerConfig& config);

/// One tracking step from frame t to t+1.
/// visible_now gates on the anchor mass at frame t only; callers AND it with
/// the bounds test of the current position for the per-frame flag.
struct StepResult {
  Vec2 p_next = Vec2::Zero();
  bool visible_now = false;
};

StepResult step(const GaussianTrajectory& traj, const Camera& camera,
                const std::vector<int>& anchors, const Vec2& p, int t,
                const TrackerConfig& config);

/// Closed-open image box [0,w) x [0,h).
bool in_bounds(const Vec2& p, const Camera& camera);

/// Full track for one query: anchors picked at the query frame, later frames
/// by repeated stepping, earlier frames by stepping through the time-reversed
/// trajectory (deltas negated).
Track track_point(const GaussianTrajectory& traj, const Camera& camera,
                  const Query& query, const TrackerConfig& config);

/// Caches per-frame Gaussians, projections and flow fields so many queries
/// against one trajectory don't recompute them. Read-only after construction.
class Tracker {
 public:
  Tracker(const GaussianTrajectory& traj, const Camera& camera, const TrackerConfig& config);

  Track track(const Query& query) const;

  int frame_count() const { return frames_; }
  const FlowField& forward_flow(int t) const { return fwd_.flow.at(t); }

 private:
  struct Direction {
    std::vector<std::vector<Gaussian>> frames; // materialized per frame
    ProjectedTracks proj;
    std::vector<FlowField> flow;
  };

  StepResult step_in(const Direction& dir, const std::vector<int>& anchors,
                     const Vec2& p, int t) const;
  AnchorState anchor_state_in(const Direction& dir, const std::vector<int>& anchors,
                              const Vec2& p, int t) const;

  Camera camera_;
  TrackerConfig config_;
  int frames_ = 0;
  Direction fwd_;
  Direction bwd_; // time-reversed trajectory, frame u = original frame k-1-u
};

} // namespace gsvt
