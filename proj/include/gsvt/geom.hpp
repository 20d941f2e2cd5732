#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace gsvt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Depth below which a point counts as behind the camera (guards the 1/Z
/// singularity).
inline constexpr double kZNear = 1e-4;

/// Additive low-pass floor on projected 2-D covariances, in px^2.
inline constexpr double kLowPassFloor = 0.3;

/// Anisotropic 3-D Gaussian primitive: position, per-axis scale, orientation
/// quaternion (w,x,y,z), RGB color in [0,1], opacity in (0,1).
struct Gaussian {
  Vec3 mu = Vec3::Zero();
  Vec3 s = Vec3::Ones();
  Vec4 phi = Vec4(1, 0, 0, 0);
  Vec3 r = Vec3::Zero();
  double o = 0.5;
};

/// Per-frame residual carried by one Gaussian: position and color change.
struct GaussianDelta {
  Vec3 dmu = Vec3::Zero();
  Vec3 dr = Vec3::Zero();
};

/// First-frame Gaussians plus (k-1) rows of per-Gaussian residuals.
/// Row t-1 of `deltas` produces frame t; column index is Gaussian identity.
struct GaussianTrajectory {
  std::vector<Gaussian> g0;
  std::vector<std::vector<GaussianDelta>> deltas;

  int frame_count() const { return static_cast<int>(deltas.size()) + 1; }
  int gaussian_count() const { return static_cast<int>(g0.size()); }

  /// Throws std::invalid_argument if the delta grid shape or any field
  /// invariant is broken.
  void validate() const;
};

/// Pinhole camera with rigid extrinsics, fixed across frames.
struct Camera {
  double fx = 1, fy = 1, cx = 0, cy = 0;
  Mat3 rot = Mat3::Identity();
  Vec3 trans = Vec3::Zero();
  int width = 0, height = 0;

  /// Default framing: fx = fy = max(w, h), principal point at the image
  /// center, identity extrinsics.
  static Camera default_for(int width, int height);

  void validate() const;
};

struct ProjectedPoint {
  Vec2 x;   // pixel coordinates, possibly outside image bounds
  double z; // camera-frame depth
};

/// Rotation matrix from a quaternion (w,x,y,z); the input is normalized
/// internally. Throws std::domain_error on a (near-)zero-norm quaternion.
Mat3 quat_to_rotation(const Vec4& phi);

/// Sigma = R diag(s)^2 R^T. Throws std::domain_error if any scale is <= 0.
Mat3 covariance3d(const Vec3& s, const Vec4& phi);

/// Perspective projection of a point. Returns nullopt when the camera-frame
/// depth is <= kZNear; the result is not clipped to image bounds.
std::optional<ProjectedPoint> project_point(const Camera& camera, const Vec3& mu);

/// Projected 2-D covariance J W Sigma W^T J^T + lambda_lp I with J the
/// first-order pinhole Jacobian at mu. Returns nullopt when mu is behind
/// the camera.
std::optional<Mat2> project_covariance(const Camera& camera, const Vec3& mu,
                                       const Mat3& sigma);

/// Materializes per-frame Gaussians. Frame 0 equals g0; frame t adds row
/// t-1 of deltas to frame t-1, clamping colors to [0,1]. Scale, orientation
/// and opacity are copied from g0 unchanged.
std::vector<std::vector<Gaussian>> integrate_deltas(const GaussianTrajectory& traj);

/// Time-reversed trajectory: frame u of the result materializes to frame
/// k-1-u of the input (colors may differ where clamping was active, which
/// leaves projected motion and visibility untouched).
GaussianTrajectory reverse_trajectory(const GaussianTrajectory& traj);

} // namespace gsvt
