#pragma once

#include <cstdint>
#include <vector>

#include "gsvt/eval.hpp"
#include "gsvt/geom.hpp"
#include "gsvt/image.hpp"
#include "gsvt/splat.hpp"

namespace gsvt {

/// One scripted blob, realized as a single Gaussian.
struct BlobSpec {
  Vec3 position = Vec3(0, 0, 1); // at frame 0, world = camera frame by default
  double scale = 0.05;           // isotropic
  Vec3 color = Vec3(0.5, 0.5, 0.5);
  double opacity = 0.9;
  std::vector<Vec3> velocities;       // k-1 per-frame position deltas; empty = static
  std::vector<Vec3> color_velocities; // k-1 per-frame color deltas; empty = constant
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  int k = 16;
  std::vector<BlobSpec> blobs;
  Vec3 background = Vec3::Zero();
  std::uint64_t seed = 0;

  void validate() const; // throws std::invalid_argument
};

struct SynthOutput {
  Video video;
  std::vector<GroundTruthTrack> gt_tracks; // one per blob center
  GaussianTrajectory gt_trajectory;
  Camera camera;
};

/// Renders the blob script into frames and exact ground truth. A blob center
/// counts occluded at a frame when some strictly nearer blob's composited
/// weight at that point exceeds 1/2, or the center projects out of bounds.
/// Throws std::invalid_argument naming the frame if a blob reaches the near
/// plane.
SynthOutput generate_scene(const SceneSpec& spec);

/// Deterministic 20-scene benchmark family: scenes 0-4 pure translation,
/// 5-7 depth change, 8-12 crossing occlusions, 13-15 frame exit (one with
/// re-entry), 16-19 color drift. All 64x64, 16 frames, >= 8 blobs each.
std::vector<SceneSpec> standard_suite(std::uint64_t seed);

} // namespace gsvt
