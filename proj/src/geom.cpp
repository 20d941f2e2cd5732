#include "gsvt/geom.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <string>

namespace gsvt {

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

} // namespace

void GaussianTrajectory::validate() const {
  require(!g0.empty(), "trajectory needs at least one gaussian");
  const size_t n = g0.size();
  for (size_t i = 0; i < n; ++i) {
    const Gaussian& g = g0[i];
    require(finite(g.mu) && finite(g.s) && g.phi.allFinite() && finite(g.r) &&
                std::isfinite(g.o),
            "gaussian " + std::to_string(i) + " has non-finite fields");
    require(g.s.minCoeff() > 0.0, "gaussian " + std::to_string(i) + " has non-positive scale");
    require(g.phi.norm() > 0.0, "gaussian " + std::to_string(i) + " has zero quaternion");
    require(g.r.minCoeff() >= 0.0 && g.r.maxCoeff() <= 1.0,
            "gaussian " + std::to_string(i) + " color outside [0,1]");
    require(g.o > 0.0 && g.o < 1.0,
            "gaussian " + std::to_string(i) + " opacity outside (0,1)");
  }
  for (size_t t = 0; t < deltas.size(); ++t) {
    require(deltas[t].size() == n,
            "delta row " + std::to_string(t) + " has wrong length");
    for (size_t i = 0; i < n; ++i) {
      require(finite(deltas[t][i].dmu) && finite(deltas[t][i].dr),
              "delta (" + std::to_string(t) + "," + std::to_string(i) + ") non-finite");
    }
  }
}

Camera Camera::default_for(int width, int height) {
  Camera c;
  c.width = width;
  c.height = height;
  c.fx = c.fy = static_cast<double>(std::max(width, height));
  c.cx = width / 2.0;
  c.cy = height / 2.0;
  return c;
}

void Camera::validate() const {
  require(width >= 1 && height >= 1, "camera needs positive image size");
  require(std::isfinite(fx) && std::isfinite(fy) && fx > 0 && fy > 0,
          "camera focal lengths must be positive");
  require(std::isfinite(cx) && std::isfinite(cy), "camera principal point non-finite");
  require(rot.allFinite() && trans.allFinite(), "camera extrinsics non-finite");
  require((rot * rot.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6 &&
              std::abs(rot.determinant() - 1.0) < 1e-6,
          "camera rotation is not orthonormal");
}

Mat3 quat_to_rotation(const Vec4& phi) {
  const double norm = phi.norm();
  if (!(norm > 1e-12)) throw std::domain_error("zero-norm quaternion");
  const double w = phi[0] / norm, x = phi[1] / norm, y = phi[2] / norm, z = phi[3] / norm;
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

Mat3 covariance3d(const Vec3& s, const Vec4& phi) {
  if (!(s.minCoeff() > 0.0)) throw std::domain_error("non-positive gaussian scale");
  const Mat3 R = quat_to_rotation(phi);
  return R * s.cwiseProduct(s).asDiagonal() * R.transpose();
}

std::optional<ProjectedPoint> project_point(const Camera& camera, const Vec3& mu) {
  const Vec3 pc = camera.rot * mu + camera.trans;
  if (!(pc.z() > kZNear)) return std::nullopt;
  ProjectedPoint out;
  out.x = Vec2(camera.fx * pc.x() / pc.z() + camera.cx,
               camera.fy * pc.y() / pc.z() + camera.cy);
  out.z = pc.z();
  return out;
}

std::optional<Mat2> project_covariance(const Camera& camera, const Vec3& mu,
                                       const Mat3& sigma) {
  const Vec3 pc = camera.rot * mu + camera.trans;
  if (!(pc.z() > kZNear)) return std::nullopt;
  const double X = pc.x(), Y = pc.y(), Z = pc.z();
  Eigen::Matrix<double, 2, 3> J;
  J << camera.fx / Z, 0, -camera.fx * X / (Z * Z),
      0, camera.fy / Z, -camera.fy * Y / (Z * Z);
  const Eigen::Matrix<double, 2, 3> M = J * camera.rot;
  Mat2 out = M * sigma * M.transpose();
  out(0, 0) += kLowPassFloor;
  out(1, 1) += kLowPassFloor;
  return out;
}

std::vector<std::vector<Gaussian>> integrate_deltas(const GaussianTrajectory& traj) {
  std::vector<std::vector<Gaussian>> frames;
  frames.reserve(traj.deltas.size() + 1);
  frames.push_back(traj.g0);
  for (const auto& row : traj.deltas) {
    std::vector<Gaussian> next = frames.back();
    for (size_t i = 0; i < next.size(); ++i) {
      next[i].mu += row[i].dmu;
      next[i].r = (next[i].r + row[i].dr).cwiseMax(0.0).cwiseMin(1.0);
    }
    frames.push_back(std::move(next));
  }
  return frames;
}

GaussianTrajectory reverse_trajectory(const GaussianTrajectory& traj) {
  const auto frames = integrate_deltas(traj);
  const int k = static_cast<int>(frames.size());
  GaussianTrajectory out;
  out.g0 = frames[k - 1];
  out.deltas.resize(traj.deltas.size());
  for (int u = 1; u < k; ++u) {
    const auto& row = traj.deltas[k - u - 1]; // produced frame k-u from k-u-1
    auto& rev = out.deltas[u - 1];
    rev.resize(row.size());
    for (size_t i = 0; i < row.size(); ++i) {
      rev[i].dmu = -row[i].dmu;
      rev[i].dr = -row[i].dr;
    }
  }
  return out;
}

} // namespace gsvt
