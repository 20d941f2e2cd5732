#pragma once

#include <Eigen/Core>
#include <vector>

#include "gsvt/geom.hpp"
#include "gsvt/image.hpp"

namespace gsvt {

/// Knobs of the rasterizer. `background` is composited behind all Gaussians
/// and must be empty (treated as zeros) or match the attribute dimension.
struct RasterConfig {
  double cutoff_sigma = 3.0;    // Mahalanobis extent beyond which a Gaussian contributes nothing
  double alpha_min = 1.0 / 255; // per-sample alpha below which the sample is skipped
  std::vector<double> background;
};

struct RasterOutput {
  Image image;        // H x W x m composited attributes
  Image accum_weight; // H x W x 1, sum of composited weights in [0,1]
  std::vector<int> depth_order;
};

/// Per-Gaussian composited-weight grids w_i(u), n x H x W.
struct WeightGrids {
  int n = 0, height = 0, width = 0;
  std::vector<double> data;

  WeightGrids() = default;
  WeightGrids(int n_, int h, int w)
      : n(n_), height(h), width(w),
        data(static_cast<size_t>(n_) * h * w, 0.0) {}

  double& at(int i, int y, int x) {
    return data[(static_cast<size_t>(i) * height + y) * width + x];
  }
  double at(int i, int y, int x) const {
    return data[(static_cast<size_t>(i) * height + y) * width + x];
  }

  /// Bilinear sample of grid i at continuous p, zero-padded outside.
  double sample(int i, const Vec2& p) const;
};

/// Depth-sorted front-to-back splatting of per-Gaussian attribute rows onto
/// the image plane. Gaussians behind the camera are skipped. When `weights`
/// is non-null it receives every Gaussian's composited-weight grid.
RasterOutput rasterize(const std::vector<Gaussian>& gaussians, const Camera& camera,
                       const Eigen::MatrixXd& attributes, const RasterConfig& config,
                       WeightGrids* weights = nullptr);

/// n x 3 matrix of the Gaussians' colors, for RGB rendering.
Eigen::MatrixXd rgb_attributes(const std::vector<Gaussian>& gaussians);

/// w_i at a continuous pixel position, by bilinear interpolation of each
/// Gaussian's composited-weight grid.
std::vector<double> visibility_at(const std::vector<Gaussian>& gaussians,
                                  const Camera& camera, const Vec2& p,
                                  const RasterConfig& config);

/// Same, against precomputed grids.
std::vector<double> visibility_at(const WeightGrids& grids, const Vec2& p);

/// Gradient of the rendering loss with respect to every free parameter, in
/// unconstrained coordinates: mu raw, s via log, color of g0 via logit,
/// opacity via logit, quaternion raw (through internal normalization).
/// Deltas are raw.
struct GaussianGrad {
  Vec3 mu = Vec3::Zero();
  Vec3 s_log = Vec3::Zero();
  Vec4 phi = Vec4::Zero();
  Vec3 r_logit = Vec3::Zero();
  double o_logit = 0.0;
};

struct DeltaGrad {
  Vec3 dmu = Vec3::Zero();
  Vec3 dr = Vec3::Zero();
};

struct TrajectoryGradients {
  std::vector<GaussianGrad> g0;
  std::vector<std::vector<DeltaGrad>> deltas; // (k-1) x n, mirrors the trajectory
};

/// Mean squared error between the rasterized RGB frames and the target
/// video, plus hand-derived reverse-mode gradients chained through delta
/// integration, projection and compositing.
std::pair<double, TrajectoryGradients>
render_loss_and_gradients(const GaussianTrajectory& traj, const Camera& camera,
                          const Video& target_video, const RasterConfig& config);

/// Forward pass only: the same loss without gradients.
double render_loss(const GaussianTrajectory& traj, const Camera& camera,
                   const Video& target_video, const RasterConfig& config);

} // namespace gsvt
