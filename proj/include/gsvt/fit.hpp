#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gsvt/geom.hpp"
#include "gsvt/image.hpp"
#include "gsvt/splat.hpp"

namespace gsvt {

/// Per-parameter-group Adam step sizes.
struct LearningRates {
  double means = 2e-3;
  double delta_means = 2e-3;
  double colors = 1e-2;
  double delta_colors = 1e-2;
  double scales = 5e-3;
  double opacities = 5e-2;
  double quaternions = 1e-3;
};

struct FitConfig {
  int num_gaussians = 256;
  int iterations = 2000;
  std::uint64_t seed = 0;
  double init_depth = 1.0;
  LearningRates lr;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool freeze_dmu = false; // keep all position deltas pinned at zero
  bool freeze_dr = false;  // keep all color deltas pinned at zero
  RasterConfig raster;
};

struct FitResult {
  GaussianTrajectory trajectory;
  std::vector<double> loss_history;   // one entry per iteration
  std::vector<double> psnr_per_frame; // at the final parameters
  double final_loss = 0.0;
  double wall_seconds = 0.0;
};

/// Optional progress callback: (iteration, loss). Called after each step.
using FitProgressFn = std::function<void(int, double)>;

/// Seeded initialization: means backprojected from uniformly random pixels at
/// init_depth, colors sampled from the first frame, isotropic scales sized so
/// a splat's footprint is about one n-th of the image across, opacity 1/2,
/// identity rotations, zero deltas.
GaussianTrajectory init_trajectory(const Video& video, const Camera& camera,
                                   const FitConfig& config);

/// Full-batch Adam on the photometric loss. Throws std::runtime_error naming
/// the first parameter group to go non-finite if the loss diverges.
FitResult fit(const Video& video, const Camera& camera, const FitConfig& config,
              const FitProgressFn& progress = nullptr);

/// 10*log10(1/MSE); +inf for an exact match. Throws on shape mismatch.
double psnr(const Image& a, const Image& b);

/// PSNR of each rendered frame against the target video.
std::vector<double> psnr_per_frame(const GaussianTrajectory& traj, const Camera& camera,
                                   const Video& video, const RasterConfig& config);

} // namespace gsvt
