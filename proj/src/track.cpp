#include "gsvt/track.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gsvt {

namespace {

void check_query(const Query& query, const Camera& camera, int frame_count) {
  if (query.t < 0 || query.t >= frame_count)
    throw std::invalid_argument("query frame " + std::to_string(query.t) +
                                " outside [0, " + std::to_string(frame_count) + ")");
  if (!in_bounds(query.p, camera))
    throw std::invalid_argument("query point outside the image");
}

void check_anchors(const std::vector<int>& anchors, int n) {
  if (anchors.empty()) throw std::invalid_argument("empty anchor set");
  for (int i : anchors)
    if (i < 0 || i >= n) throw std::invalid_argument("anchor index out of range");
}

ProjectedTracks project_frames(const std::vector<std::vector<Gaussian>>& frames,
                               const Camera& camera) {
  ProjectedTracks out;
  out.frames = static_cast<int>(frames.size());
  out.count = out.frames > 0 ? static_cast<int>(frames[0].size()) : 0;
  out.x.assign(out.frames, std::vector<Vec2>(out.count, Vec2::Zero()));
  out.active.assign(out.frames, std::vector<bool>(out.count, false));
  for (int t = 0; t < out.frames; ++t)
    for (int i = 0; i < out.count; ++i)
      if (auto pp = project_point(camera, frames[t][i].mu)) {
        out.x[t][i] = pp->x;
        out.active[t][i] = true;
      }
  out.dx.assign(std::max(0, out.frames - 1), std::vector<Vec2>(out.count, Vec2::Zero()));
  for (int t = 0; t + 1 < out.frames; ++t)
    for (int i = 0; i < out.count; ++i)
      if (out.active[t][i] && out.active[t + 1][i])
        out.dx[t][i] = out.x[t + 1][i] - out.x[t][i];
  return out;
}

FlowField flow_from(const std::vector<Gaussian>& gaussians,
                    const std::vector<Vec2>& dx, const Camera& camera, int t,
                    const TrackerConfig& config) {
  const int n = static_cast<int>(gaussians.size());
  Eigen::MatrixXd attrs(n, 2);
  for (int i = 0; i < n; ++i) attrs.row(i) = dx[i].transpose();
  RasterConfig rc = config.raster;
  rc.background.clear(); // empty space carries zero flow
  const RasterOutput out = rasterize(gaussians, camera, attrs, rc);

  FlowField field;
  field.t = t;
  field.grid = Image(camera.height, camera.width, 2);
  for (int y = 0; y < camera.height; ++y)
    for (int x = 0; x < camera.width; ++x) {
      double fx = out.image.at(y, x, 0);
      double fy = out.image.at(y, x, 1);
      if (config.normalize_flow) {
        const double denom = out.accum_weight.at(y, x, 0) + config.eps;
        fx /= denom;
        fy /= denom;
      }
      field.grid.at(y, x, 0) = fx;
      field.grid.at(y, x, 1) = fy;
    }
  return field;
}

AnchorState anchor_core(const std::vector<double>& w, const std::vector<int>& anchors,
                        double eps) {
  AnchorState st;
  st.pi.resize(anchors.size());
  for (int i : anchors) st.omega += w[i];
  const double denom = st.omega + eps;
  for (size_t j = 0; j < anchors.size(); ++j) st.pi[j] = w[anchors[j]] / denom;
  return st;
}

StepResult step_core(const FlowField& flow, const std::vector<double>& w,
                     const std::vector<Vec2>& x_t, const std::vector<Vec2>& dx_t,
                     const std::vector<int>& anchors, const Vec2& p,
                     const TrackerConfig& config) {
  const Vec2 a = p + flow.sample(p);
  const AnchorState st = anchor_core(w, anchors, config.eps);
  Vec2 s_vis = Vec2::Zero();
  for (size_t j = 0; j < anchors.size(); ++j)
    s_vis += st.pi[j] * (x_t[anchors[j]] + dx_t[anchors[j]]);
  StepResult r;
  if (st.omega >= config.tau_vis) {
    r.p_next = (1.0 - config.beta) * a + config.beta * s_vis;
    r.visible_now = true;
  } else {
    r.p_next = s_vis;
    r.visible_now = false;
  }
  return r;
}

} // namespace

void TrackerConfig::validate(int n) const {
  if (top_k < 1 || top_k > n)
    throw std::invalid_argument("top_k must be in [1, " + std::to_string(n) + "]");
  if (!(tau_vis >= 0.0 && tau_vis <= 1.0))
    throw std::invalid_argument("tau_vis must be in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("beta must be in [0, 1]");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
}

Vec2 FlowField::sample(const Vec2& p) const {
  Vec2 out;
  for (int c = 0; c < 2; ++c)
    out[c] = bilinear_padded_fetch(grid.height, grid.width, p.x(), p.y(),
                                   [&](int y, int x) { return grid.at(y, x, c); });
  return out;
}

bool in_bounds(const Vec2& p, const Camera& camera) {
  return p.x() >= 0.0 && p.x() < camera.width && p.y() >= 0.0 && p.y() < camera.height;
}

ProjectedTracks projected_tracks(const GaussianTrajectory& traj, const Camera& camera) {
  traj.validate();
  camera.validate();
  return project_frames(integrate_deltas(traj), camera);
}

FlowField render_flow_field(const GaussianTrajectory& traj, const Camera& camera,
                            int t, const TrackerConfig& config) {
  traj.validate();
  camera.validate();
  if (t < 0 || t >= traj.frame_count() - 1)
    throw std::invalid_argument("flow frame " + std::to_string(t) + " outside [0, " +
                                std::to_string(traj.frame_count() - 1) + ")");
  const auto frames = integrate_deltas(traj);
  const ProjectedTracks proj = project_frames(frames, camera);
  return flow_from(frames[t], proj.dx[t], camera, t, config);
}

std::vector<int> select_anchors(const GaussianTrajectory& traj, const Camera& camera,
                                const Query& query, const TrackerConfig& config) {
  traj.validate();
  camera.validate();
  config.validate(traj.gaussian_count());
  check_query(query, camera, traj.frame_count());
  const auto frames = integrate_deltas(traj);
  const std::vector<double> w =
      visibility_at(frames[query.t], camera, query.p, config.raster);
  std::vector<int> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (w[a] != w[b]) return w[a] > w[b];
    return a < b;
  });
  order.resize(config.top_k);
  return order;
}

AnchorState anchor_state(const GaussianTrajectory& traj, const Camera& camera,
                         const std::vector<int>& anchors, const Vec2& p, int t,
                         const TrackerConfig& config) {
  traj.validate();
  camera.validate();
  check_anchors(anchors, traj.gaussian_count());
  if (t < 0 || t >= traj.frame_count())
    throw std::invalid_argument("frame index out of range");
  const auto frames = integrate_deltas(traj);
  const std::vector<double> w = visibility_at(frames[t], camera, p, config.raster);
  return anchor_core(w, anchors, config.eps);
}

StepResult step(const GaussianTrajectory& traj, const Camera& camera,
                const std::vector<int>& anchors, const Vec2& p, int t,
                const TrackerConfig& config) {
  traj.validate();
  camera.validate();
  check_anchors(anchors, traj.gaussian_count());
  if (t < 0 || t >= traj.frame_count() - 1)
    throw std::invalid_argument("step frame out of range");
  const auto frames = integrate_deltas(traj);
  const ProjectedTracks proj = project_frames(frames, camera);
  const FlowField flow = flow_from(frames[t], proj.dx[t], camera, t, config);
  const std::vector<double> w = visibility_at(frames[t], camera, p, config.raster);
  return step_core(flow, w, proj.x[t], proj.dx[t], anchors, p, config);
}

Track track_point(const GaussianTrajectory& traj, const Camera& camera,
                  const Query& query, const TrackerConfig& config) {
  return Tracker(traj, camera, config).track(query);
}

Tracker::Tracker(const GaussianTrajectory& traj, const Camera& camera,
                 const TrackerConfig& config)
    : camera_(camera), config_(config), frames_(traj.frame_count()) {
  traj.validate();
  camera.validate();
  config.validate(traj.gaussian_count());

  auto build = [&](const GaussianTrajectory& t) {
    Direction dir;
    dir.frames = integrate_deltas(t);
    dir.proj = project_frames(dir.frames, camera_);
    dir.flow.reserve(std::max(0, frames_ - 1));
    for (int f = 0; f + 1 < frames_; ++f)
      dir.flow.push_back(flow_from(dir.frames[f], dir.proj.dx[f], camera_, f, config_));
    return dir;
  };
  fwd_ = build(traj);
  bwd_ = build(reverse_trajectory(traj));
}

AnchorState Tracker::anchor_state_in(const Direction& dir, const std::vector<int>& anchors,
                                     const Vec2& p, int t) const {
  const std::vector<double> w = visibility_at(dir.frames[t], camera_, p, config_.raster);
  return anchor_core(w, anchors, config_.eps);
}

StepResult Tracker::step_in(const Direction& dir, const std::vector<int>& anchors,
                            const Vec2& p, int t) const {
  const std::vector<double> w = visibility_at(dir.frames[t], camera_, p, config_.raster);
  return step_core(dir.flow[t], w, dir.proj.x[t], dir.proj.dx[t], anchors, p, config_);
}

Track Tracker::track(const Query& query) const {
  check_query(query, camera_, frames_);
  const int k = frames_;
  const int tq = query.t;

  Track out;
  out.query = query;
  out.points.assign(k, Vec2::Zero());
  out.visible.assign(k, false);
  out.points[tq] = query.p;

  // Anchor mass at the query point, fixed for the whole track.
  {
    const std::vector<double> w =
        visibility_at(fwd_.frames[tq], camera_, query.p, config_.raster);
    std::vector<int> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (w[a] != w[b]) return w[a] > w[b];
      return a < b;
    });
    order.resize(config_.top_k);
    out.anchor_set = order;
  }

  // Forward sweep: flags for [tq, k-2] come with each step, the last frame's
  // flag from the anchor mass at its final position.
  Vec2 p = query.p;
  for (int t = tq; t + 1 < k; ++t) {
    const StepResult r = step_in(fwd_, out.anchor_set, p, t);
    out.visible[t] = r.visible_now && in_bounds(p, camera_);
    out.points[t + 1] = r.p_next;
    p = r.p_next;
  }
  {
    const AnchorState st = anchor_state_in(fwd_, out.anchor_set, p, k - 1);
    out.visible[k - 1] = st.omega >= config_.tau_vis && in_bounds(p, camera_);
  }

  // Backward sweep over the time-reversed trajectory; reversed frame u maps
  // to original frame k-1-u. The query frame's flag stays with the forward
  // orientation.
  if (tq > 0) {
    const int uq = k - 1 - tq;
    p = query.p;
    for (int u = uq; u + 1 < k; ++u) {
      const StepResult r = step_in(bwd_, out.anchor_set, p, u);
      if (u != uq)
        out.visible[k - 1 - u] = r.visible_now && in_bounds(p, camera_);
      out.points[k - 2 - u] = r.p_next;
      p = r.p_next;
    }
    const AnchorState st = anchor_state_in(bwd_, out.anchor_set, p, k - 1);
    out.visible[0] = st.omega >= config_.tau_vis && in_bounds(p, camera_);
  }
  return out;
}

} // namespace gsvt
