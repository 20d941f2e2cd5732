#include "gsvt/fit.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gsvt/rng.hpp"

namespace gsvt {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double v) { return std::log(v / (1.0 - v)); }

// Keeps logits representable so materialized values stay strictly inside
// (0,1) and scales stay positive after exp.
constexpr double kLogitCap = 25.0;
constexpr double kLogScaleCap = 20.0;

void check_video(const Video& video, const Camera& camera) {
  if (video.empty()) throw std::invalid_argument("fit needs at least one frame");
  for (size_t t = 0; t < video.size(); ++t) {
    if (video[t].height != camera.height || video[t].width != camera.width ||
        video[t].channels != 3)
      throw std::invalid_argument("frame " + std::to_string(t) +
                                  " does not match the camera size");
  }
}

/// Optimization state in unconstrained coordinates, mirrored by Adam moments.
struct Params {
  std::vector<Vec3> mu, s_log, r_logit;
  std::vector<Vec4> phi;
  std::vector<double> o_logit;
  std::vector<std::vector<Vec3>> dmu, dr;

  static Params zeros_like(const Params& other) {
    Params z;
    z.mu.assign(other.mu.size(), Vec3::Zero());
    z.s_log.assign(other.s_log.size(), Vec3::Zero());
    z.r_logit.assign(other.r_logit.size(), Vec3::Zero());
    z.phi.assign(other.phi.size(), Vec4::Zero());
    z.o_logit.assign(other.o_logit.size(), 0.0);
    z.dmu.assign(other.dmu.size(), std::vector<Vec3>(other.mu.size(), Vec3::Zero()));
    z.dr.assign(other.dr.size(), std::vector<Vec3>(other.mu.size(), Vec3::Zero()));
    return z;
  }

  static Params from_trajectory(const GaussianTrajectory& traj) {
    Params p;
    const int n = traj.gaussian_count();
    p.mu.resize(n);
    p.s_log.resize(n);
    p.r_logit.resize(n);
    p.phi.resize(n);
    p.o_logit.resize(n);
    for (int i = 0; i < n; ++i) {
      const Gaussian& g = traj.g0[i];
      p.mu[i] = g.mu;
      p.s_log[i] = g.s.array().log().matrix();
      p.r_logit[i] = Vec3(logit(g.r[0]), logit(g.r[1]), logit(g.r[2]));
      p.phi[i] = g.phi / g.phi.norm();
      p.o_logit[i] = logit(g.o);
    }
    p.dmu.resize(traj.deltas.size(), std::vector<Vec3>(n));
    p.dr.resize(traj.deltas.size(), std::vector<Vec3>(n));
    for (size_t t = 0; t < traj.deltas.size(); ++t)
      for (int i = 0; i < n; ++i) {
        p.dmu[t][i] = traj.deltas[t][i].dmu;
        p.dr[t][i] = traj.deltas[t][i].dr;
      }
    return p;
  }

  GaussianTrajectory materialize() const {
    GaussianTrajectory traj;
    const int n = static_cast<int>(mu.size());
    traj.g0.resize(n);
    for (int i = 0; i < n; ++i) {
      Gaussian& g = traj.g0[i];
      g.mu = mu[i];
      g.s = s_log[i].array().exp().matrix();
      g.phi = phi[i];
      g.r = Vec3(logistic(r_logit[i][0]), logistic(r_logit[i][1]), logistic(r_logit[i][2]));
      g.o = logistic(o_logit[i]);
    }
    traj.deltas.resize(dmu.size(), std::vector<GaussianDelta>(n));
    for (size_t t = 0; t < dmu.size(); ++t)
      for (int i = 0; i < n; ++i) {
        traj.deltas[t][i].dmu = dmu[t][i];
        traj.deltas[t][i].dr = dr[t][i];
      }
    return traj;
  }
};

struct Adam {
  Params m, v;
  double beta1, beta2, eps;
  double bc1 = 1.0, bc2 = 1.0; // running beta^t products

  Adam(const Params& shape, const FitConfig& cfg)
      : m(Params::zeros_like(shape)), v(Params::zeros_like(shape)),
        beta1(cfg.adam_beta1), beta2(cfg.adam_beta2), eps(cfg.adam_eps) {}

  void begin_step() {
    bc1 *= beta1;
    bc2 *= beta2;
  }

  template <class T>
  void update(T& p, T& m_, T& v_, const T& g, double lr) {
    m_ = beta1 * m_ + (1.0 - beta1) * g;
    v_.array() = beta2 * v_.array() + (1.0 - beta2) * g.array().square();
    const T mhat = m_ / (1.0 - bc1);
    const T vhat = v_ / (1.0 - bc2);
    p.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
  }

  void update(double& p, double& m_, double& v_, double g, double lr) {
    m_ = beta1 * m_ + (1.0 - beta1) * g;
    v_ = beta2 * v_ + (1.0 - beta2) * g * g;
    p -= lr * (m_ / (1.0 - bc1)) / (std::sqrt(v_ / (1.0 - bc2)) + eps);
  }
};

/// Name of the first parameter group holding a non-finite value, for the
/// divergence diagnostic. Groups are scanned in a fixed documented order.
std::string first_bad_group(const Params& p) {
  auto bad3 = [](const std::vector<Vec3>& vs) {
    for (const Vec3& v : vs)
      if (!v.allFinite()) return true;
    return false;
  };
  if (bad3(p.mu)) return "means";
  for (const auto& row : p.dmu)
    if (bad3(row)) return "delta_means";
  if (bad3(p.r_logit)) return "colors";
  for (const auto& row : p.dr)
    if (bad3(row)) return "delta_colors";
  if (bad3(p.s_log)) return "scales";
  for (double v : p.o_logit)
    if (!std::isfinite(v)) return "opacities";
  for (const Vec4& v : p.phi)
    if (!v.allFinite()) return "quaternions";
  return "";
}

} // namespace

GaussianTrajectory init_trajectory(const Video& video, const Camera& camera,
                                   const FitConfig& config) {
  check_video(video, camera);
  if (config.num_gaussians < 1) throw std::invalid_argument("num_gaussians must be >= 1");
  const Image& first = video.front();
  std::mt19937_64 rng(config.seed);

  GaussianTrajectory traj;
  traj.g0.resize(config.num_gaussians);
  const double d = config.init_depth;
  // A 1-sigma footprint of about width/sqrt(n) pixels tiles the image.
  const double sigma_px = camera.width / std::sqrt(static_cast<double>(config.num_gaussians));
  const double sigma_scene = sigma_px * d / camera.fx;
  for (Gaussian& g : traj.g0) {
    const int px = uniform_int(rng, 0, camera.width - 1);
    const int py = uniform_int(rng, 0, camera.height - 1);
    const Vec3 pc((px - camera.cx) / camera.fx * d, (py - camera.cy) / camera.fy * d, d);
    g.mu = camera.rot.transpose() * (pc - camera.trans);
    // Keep sampled colors strictly inside (0,1) so their logits exist.
    for (int c = 0; c < 3; ++c)
      g.r[c] = std::min(1.0 - 1e-4, std::max(1e-4, first.at(py, px, c)));
    g.s = Vec3::Constant(sigma_scene);
    g.phi = Vec4(1, 0, 0, 0);
    g.o = 0.5;
  }
  traj.deltas.assign(std::max(0, static_cast<int>(video.size()) - 1),
                     std::vector<GaussianDelta>(config.num_gaussians));
  return traj;
}

FitResult fit(const Video& video, const Camera& camera, const FitConfig& config,
              const FitProgressFn& progress) {
  const auto t_start = std::chrono::steady_clock::now();
  check_video(video, camera);
  if (config.iterations < 0) throw std::invalid_argument("iterations must be >= 0");

  FitResult result;
  const GaussianTrajectory init = init_trajectory(video, camera, config);

  if (config.iterations == 0) {
    result.trajectory = init; // bitwise the initialization, no reparameterization
  } else {
    Params params = Params::from_trajectory(init);
    Adam adam(params, config);
    const int n = static_cast<int>(params.mu.size());
    const int rows = static_cast<int>(params.dmu.size());

    for (int iter = 1; iter <= config.iterations; ++iter) {
      const GaussianTrajectory traj = params.materialize();
      auto [loss, grads] = render_loss_and_gradients(traj, camera, video, config.raster);
      if (!std::isfinite(loss)) {
        std::string group = first_bad_group(params);
        if (group.empty()) group = "means";
        throw std::runtime_error("non-finite loss at iteration " + std::to_string(iter) +
                                 "; first non-finite parameter group: " + group);
      }
      result.loss_history.push_back(loss);

      if (config.freeze_dmu)
        for (auto& row : grads.deltas)
          for (auto& g : row) g.dmu.setZero();
      if (config.freeze_dr)
        for (auto& row : grads.deltas)
          for (auto& g : row) g.dr.setZero();

      adam.begin_step();
      for (int i = 0; i < n; ++i) {
        adam.update(params.mu[i], adam.m.mu[i], adam.v.mu[i], grads.g0[i].mu,
                    config.lr.means);
        adam.update(params.s_log[i], adam.m.s_log[i], adam.v.s_log[i], grads.g0[i].s_log,
                    config.lr.scales);
        adam.update(params.r_logit[i], adam.m.r_logit[i], adam.v.r_logit[i],
                    grads.g0[i].r_logit, config.lr.colors);
        adam.update(params.phi[i], adam.m.phi[i], adam.v.phi[i], grads.g0[i].phi,
                    config.lr.quaternions);
        adam.update(params.o_logit[i], adam.m.o_logit[i], adam.v.o_logit[i],
                    grads.g0[i].o_logit, config.lr.opacities);
        params.s_log[i] = params.s_log[i].cwiseMax(-kLogScaleCap).cwiseMin(kLogScaleCap);
        params.r_logit[i] = params.r_logit[i].cwiseMax(-kLogitCap).cwiseMin(kLogitCap);
        params.o_logit[i] =
            std::min(kLogitCap, std::max(-kLogitCap, params.o_logit[i]));
        params.phi[i] /= params.phi[i].norm();
      }
      for (int t = 0; t < rows; ++t) {
        for (int i = 0; i < n; ++i) {
          adam.update(params.dmu[t][i], adam.m.dmu[t][i], adam.v.dmu[t][i],
                      grads.deltas[t][i].dmu, config.lr.delta_means);
          adam.update(params.dr[t][i], adam.m.dr[t][i], adam.v.dr[t][i],
                      grads.deltas[t][i].dr, config.lr.delta_colors);
        }
      }
      if (progress) progress(iter, loss);
    }
    result.trajectory = params.materialize();
  }

  result.final_loss = render_loss(result.trajectory, camera, video, config.raster);
  result.psnr_per_frame = psnr_per_frame(result.trajectory, camera, video, config.raster);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr needs equal shapes");
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

std::vector<double> psnr_per_frame(const GaussianTrajectory& traj, const Camera& camera,
                                   const Video& video, const RasterConfig& config) {
  if (static_cast<int>(video.size()) != traj.frame_count())
    throw std::invalid_argument("video length does not match trajectory");
  const auto frames = integrate_deltas(traj);
  std::vector<double> out;
  out.reserve(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) {
    const RasterOutput r = rasterize(frames[t], camera, rgb_attributes(frames[t]), config);
    out.push_back(psnr(r.image, video[t]));
  }
  return out;
}

} // namespace gsvt
