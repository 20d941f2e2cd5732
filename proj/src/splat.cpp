#include "gsvt/splat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gsvt {

namespace {

constexpr double kAlphaCeil = 0.999;

/// Screen-space form of one in-front Gaussian, ready for per-pixel sampling.
struct Splat {
  int index = 0;
  Vec2 x = Vec2::Zero();
  double z = 0.0;
  double opacity = 0.0;
  double a = 0, b = 0, c = 0;       // inverse 2-D covariance entries (00, 01, 11)
  double c00 = 0, c01 = 0, c11 = 0; // 2-D covariance itself
  int x_lo = 0, x_hi = -1, y_lo = 0, y_hi = -1;
};

std::vector<Splat> prepare_splats(const std::vector<Gaussian>& gaussians,
                                  const Camera& camera, const RasterConfig& config) {
  std::vector<Splat> splats;
  splats.reserve(gaussians.size());
  for (int i = 0; i < static_cast<int>(gaussians.size()); ++i) {
    const Gaussian& g = gaussians[i];
    const auto p = project_point(camera, g.mu);
    if (!p) continue; // behind the camera on this frame
    const auto cov = project_covariance(camera, g.mu, covariance3d(g.s, g.phi));
    Splat sp;
    sp.index = i;
    sp.x = p->x;
    sp.z = p->z;
    sp.opacity = g.o;
    sp.c00 = (*cov)(0, 0);
    sp.c01 = (*cov)(0, 1);
    sp.c11 = (*cov)(1, 1);
    const double det = sp.c00 * sp.c11 - sp.c01 * sp.c01;
    sp.a = sp.c11 / det;
    sp.b = -sp.c01 / det;
    sp.c = sp.c00 / det;
    // The cutoff ellipse fits in an axis-aligned box of half-extents
    // cutoff * sqrt(diag(cov)).
    const double rx = config.cutoff_sigma * std::sqrt(sp.c00);
    const double ry = config.cutoff_sigma * std::sqrt(sp.c11);
    sp.x_lo = std::max(0, static_cast<int>(std::ceil(sp.x.x() - rx)));
    sp.x_hi = std::min(camera.width - 1, static_cast<int>(std::floor(sp.x.x() + rx)));
    sp.y_lo = std::max(0, static_cast<int>(std::ceil(sp.x.y() - ry)));
    sp.y_hi = std::min(camera.height - 1, static_cast<int>(std::floor(sp.x.y() + ry)));
    splats.push_back(sp);
  }
  std::sort(splats.begin(), splats.end(), [](const Splat& l, const Splat& r) {
    return l.z != r.z ? l.z < r.z : l.index < r.index;
  });
  return splats;
}

/// One composited sample along a pixel's depth walk.
struct WalkEntry {
  int slot;        // position in the prepared splat list
  double alpha;    // post-clamp sample alpha
  double t_before; // transmittance in front of this sample
  bool clamped;
};

/// Front-to-back walk at integer pixel (px, py). Appends contributing samples
/// and returns the final transmittance.
double walk_pixel(const std::vector<Splat>& splats, const RasterConfig& config,
                  int px, int py, std::vector<WalkEntry>& out) {
  const double cut2 = config.cutoff_sigma * config.cutoff_sigma;
  double T = 1.0;
  for (size_t s = 0; s < splats.size(); ++s) {
    const Splat& sp = splats[s];
    if (px < sp.x_lo || px > sp.x_hi || py < sp.y_lo || py > sp.y_hi) continue;
    const double dx = px - sp.x.x();
    const double dy = py - sp.x.y();
    const double q = sp.a * dx * dx + 2.0 * sp.b * dx * dy + sp.c * dy * dy;
    if (q > cut2) continue;
    const double raw = sp.opacity * std::exp(-0.5 * q);
    const bool clamped = raw > kAlphaCeil;
    const double alpha = clamped ? kAlphaCeil : raw;
    if (alpha < config.alpha_min) continue;
    out.push_back({static_cast<int>(s), alpha, T, clamped});
    T *= 1.0 - alpha;
  }
  return T;
}

void check_background(const RasterConfig& config, int m) {
  if (!config.background.empty() && static_cast<int>(config.background.size()) != m)
    throw std::invalid_argument("background size does not match attribute count");
}

} // namespace

double WeightGrids::sample(int i, const Vec2& p) const {
  return bilinear_padded_fetch(height, width, p.x(), p.y(),
                               [&](int yy, int xx) { return at(i, yy, xx); });
}

Eigen::MatrixXd rgb_attributes(const std::vector<Gaussian>& gaussians) {
  Eigen::MatrixXd attrs(gaussians.size(), 3);
  for (size_t i = 0; i < gaussians.size(); ++i) attrs.row(i) = gaussians[i].r;
  return attrs;
}

RasterOutput rasterize(const std::vector<Gaussian>& gaussians, const Camera& camera,
                       const Eigen::MatrixXd& attributes, const RasterConfig& config,
                       WeightGrids* weights) {
  camera.validate();
  if (attributes.rows() != static_cast<Eigen::Index>(gaussians.size()))
    throw std::invalid_argument("attribute rows must match gaussian count");
  const int m = static_cast<int>(attributes.cols());
  check_background(config, m);
  const int H = camera.height, W = camera.width;

  const std::vector<Splat> splats = prepare_splats(gaussians, camera, config);

  RasterOutput out;
  out.image = Image(H, W, m);
  out.accum_weight = Image(H, W, 1);
  out.depth_order.reserve(splats.size());
  for (const Splat& sp : splats) out.depth_order.push_back(sp.index);
  if (weights) *weights = WeightGrids(static_cast<int>(gaussians.size()), H, W);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < H; ++y) {
    std::vector<WalkEntry> walk;
    walk.reserve(splats.size());
    for (int x = 0; x < W; ++x) {
      walk.clear();
      const double t_final = walk_pixel(splats, config, x, y, walk);
      double* px = out.image.px(y, x);
      for (const WalkEntry& e : walk) {
        const Splat& sp = splats[e.slot];
        const double w = e.alpha * e.t_before;
        for (int c = 0; c < m; ++c) px[c] += w * attributes(sp.index, c);
        if (weights) weights->at(sp.index, y, x) = w;
      }
      if (!config.background.empty()) {
        for (int c = 0; c < m; ++c) px[c] += t_final * config.background[c];
      }
      out.accum_weight.at(y, x, 0) = 1.0 - t_final;
    }
  }
  return out;
}

std::vector<double> visibility_at(const std::vector<Gaussian>& gaussians,
                                  const Camera& camera, const Vec2& p,
                                  const RasterConfig& config) {
  camera.validate();
  const int n = static_cast<int>(gaussians.size());
  const std::vector<Splat> splats = prepare_splats(gaussians, camera, config);

  // Composite the (up to four) stencil pixels once each, then run every
  // Gaussian through the shared bilinear stencil so the result matches a
  // full weight-grid lookup bit for bit.
  struct Node {
    long key = -1;
    std::vector<double> w;
  };
  std::array<Node, 4> cache;
  int cached = 0;
  auto weights_at = [&](int yy, int xx) -> const std::vector<double>& {
    const long key = static_cast<long>(yy) * camera.width + xx;
    for (int i = 0; i < cached; ++i)
      if (cache[i].key == key) return cache[i].w;
    Node& node = cache[cached++];
    node.key = key;
    node.w.assign(n, 0.0);
    std::vector<WalkEntry> walk;
    walk_pixel(splats, config, xx, yy, walk);
    for (const WalkEntry& e : walk)
      node.w[splats[e.slot].index] = e.alpha * e.t_before;
    return node.w;
  };

  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    out[i] = bilinear_padded_fetch(camera.height, camera.width, p.x(), p.y(),
                                   [&](int yy, int xx) { return weights_at(yy, xx)[i]; });
  }
  return out;
}

std::vector<double> visibility_at(const WeightGrids& grids, const Vec2& p) {
  std::vector<double> out(grids.n, 0.0);
  for (int i = 0; i < grids.n; ++i) out[i] = grids.sample(i, p);
  return out;
}

double render_loss(const GaussianTrajectory& traj, const Camera& camera,
                   const Video& target_video, const RasterConfig& config) {
  if (static_cast<int>(target_video.size()) != traj.frame_count())
    throw std::invalid_argument("target frame count does not match trajectory");
  const auto frames = integrate_deltas(traj);
  double sum = 0.0;
  for (size_t t = 0; t < frames.size(); ++t) {
    const Image& target = target_video[t];
    if (target.height != camera.height || target.width != camera.width ||
        target.channels != 3)
      throw std::invalid_argument("target frame " + std::to_string(t) +
                                  " does not match camera size");
    const RasterOutput r = rasterize(frames[t], camera, rgb_attributes(frames[t]), config);
    for (size_t j = 0; j < r.image.data.size(); ++j) {
      const double d = r.image.data[j] - target.data[j];
      sum += d * d;
    }
  }
  return sum / (static_cast<double>(frames.size()) * camera.height * camera.width * 3);
}

namespace {

/// Per-Gaussian accumulators for one frame's backward pass.
struct FrameGrad {
  Vec2 gx = Vec2::Zero();              // d loss / d projected center
  double gs00 = 0, gs01 = 0, gs11 = 0; // d loss / d 2-D covariance (symmetric)
  double go = 0;                       // d loss / d opacity (through alpha)
  Vec3 gr = Vec3::Zero();              // d loss / d this frame's color
};

/// Gradient of R(u) contraction: returns d(sum(gR .* R))/du for unit u.
Vec4 rotation_backward(const Vec4& u, const Mat3& gR) {
  const double w = u[0], x = u[1], y = u[2], z = u[3];
  Mat3 dw, dx, dy, dz;
  dw << 0, -2 * z, 2 * y,
      2 * z, 0, -2 * x,
      -2 * y, 2 * x, 0;
  dx << 0, 2 * y, 2 * z,
      2 * y, -4 * x, -2 * w,
      2 * z, 2 * w, -4 * x;
  dy << -4 * y, 2 * x, 2 * w,
      2 * x, 0, 2 * z,
      -2 * w, 2 * z, -4 * y;
  dz << -4 * z, -2 * w, 2 * x,
      2 * w, -4 * z, 2 * y,
      2 * x, 2 * y, 0;
  return Vec4(gR.cwiseProduct(dw).sum(), gR.cwiseProduct(dx).sum(),
              gR.cwiseProduct(dy).sum(), gR.cwiseProduct(dz).sum());
}

double logistic_slope(double v) { return v * (1.0 - v); } // dv/d logit(v)

} // namespace

std::pair<double, TrajectoryGradients>
render_loss_and_gradients(const GaussianTrajectory& traj, const Camera& camera,
                          const Video& target_video, const RasterConfig& config) {
  camera.validate();
  const int k = traj.frame_count();
  const int n = traj.gaussian_count();
  if (static_cast<int>(target_video.size()) != k)
    throw std::invalid_argument("target frame count does not match trajectory");
  check_background(config, 3);
  const int H = camera.height, W = camera.width;
  for (int t = 0; t < k; ++t) {
    if (target_video[t].height != H || target_video[t].width != W ||
        target_video[t].channels != 3)
      throw std::invalid_argument("target frame " + std::to_string(t) +
                                  " does not match camera size");
  }

  const auto frames = integrate_deltas(traj);
  const double inv_count = 1.0 / (static_cast<double>(k) * H * W * 3);
  const double bg[3] = {config.background.empty() ? 0.0 : config.background[0],
                        config.background.empty() ? 0.0 : config.background[1],
                        config.background.empty() ? 0.0 : config.background[2]};

  TrajectoryGradients grads;
  grads.g0.assign(n, GaussianGrad{});
  grads.deltas.assign(traj.deltas.size(), std::vector<DeltaGrad>(n));

  // Cross-frame accumulators for the parameters shared by every frame.
  std::vector<Mat3> g_sigma3(n, Mat3::Zero());
  std::vector<double> g_opacity(n, 0.0);
  // Per-frame gradients of the materialized means and colors.
  std::vector<std::vector<Vec3>> g_mu(k, std::vector<Vec3>(n, Vec3::Zero()));
  std::vector<std::vector<Vec3>> g_color(k, std::vector<Vec3>(n, Vec3::Zero()));

  double loss_sum = 0.0;

  for (int t = 0; t < k; ++t) {
    const std::vector<Gaussian>& fg = frames[t];
    const std::vector<Splat> splats = prepare_splats(fg, camera, config);
    const Eigen::MatrixXd attrs = rgb_attributes(fg);
    const Image& target = target_video[t];
    const int ns = static_cast<int>(splats.size());

    // Row-local accumulators merged in row order, so the reduction is
    // deterministic under any thread count.
    std::vector<std::vector<FrameGrad>> row_grads(H, std::vector<FrameGrad>(ns));
    std::vector<double> row_err2(H, 0.0);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
      std::vector<WalkEntry> walk;
      walk.reserve(splats.size());
      std::vector<FrameGrad>& acc = row_grads[y];
      for (int x = 0; x < W; ++x) {
        walk.clear();
        const double t_final = walk_pixel(splats, config, x, y, walk);

        double value[3] = {t_final * bg[0], t_final * bg[1], t_final * bg[2]};
        for (const WalkEntry& e : walk) {
          const double w = e.alpha * e.t_before;
          const int gi = splats[e.slot].index;
          for (int c = 0; c < 3; ++c) value[c] += w * attrs(gi, c);
        }
        double gbar[3];
        for (int c = 0; c < 3; ++c) {
          const double d = value[c] - target.at(y, x, c);
          row_err2[y] += d * d;
          gbar[c] = 2.0 * d * inv_count;
        }

        // Reverse sweep: s_behind accumulates the color contributed by
        // everything behind the current sample (background included).
        double s_behind[3] = {t_final * bg[0], t_final * bg[1], t_final * bg[2]};
        for (size_t j = walk.size(); j-- > 0;) {
          const WalkEntry& e = walk[j];
          const Splat& sp = splats[e.slot];
          const double w = e.alpha * e.t_before;
          FrameGrad& fgd = acc[e.slot];

          double g_alpha = 0.0;
          for (int c = 0; c < 3; ++c) {
            const double ac = attrs(sp.index, c);
            fgd.gr[c] += gbar[c] * w;
            g_alpha += gbar[c] * (e.t_before * ac - s_behind[c] / (1.0 - e.alpha));
            s_behind[c] += w * ac;
          }
          if (e.clamped) continue; // alpha pinned at the ceiling

          const double dx = x - sp.x.x();
          const double dy = y - sp.x.y();
          // alpha = o * exp(-q/2)
          fgd.go += g_alpha * (e.alpha / sp.opacity);
          const double gq = -0.5 * g_alpha * e.alpha;
          const double adx = sp.a * dx + sp.b * dy; // (Sigma^-1 d)
          const double ady = sp.b * dx + sp.c * dy;
          fgd.gx[0] += gq * (-2.0 * adx);
          fgd.gx[1] += gq * (-2.0 * ady);
          fgd.gs00 += gq * (-adx * adx);
          fgd.gs01 += gq * (-2.0 * adx * ady); // carries both off-diagonals
          fgd.gs11 += gq * (-ady * ady);
        }
      }
    }

    std::vector<FrameGrad> total(ns);
    for (int y = 0; y < H; ++y) {
      loss_sum += row_err2[y];
      for (int s = 0; s < ns; ++s) {
        total[s].gx += row_grads[y][s].gx;
        total[s].gs00 += row_grads[y][s].gs00;
        total[s].gs01 += row_grads[y][s].gs01;
        total[s].gs11 += row_grads[y][s].gs11;
        total[s].go += row_grads[y][s].go;
        total[s].gr += row_grads[y][s].gr;
      }
    }

    // Chain each splat's screen-space gradients back to the frame means and
    // the shared covariance/opacity.
    for (int s = 0; s < ns; ++s) {
      const Splat& sp = splats[s];
      const int i = sp.index;
      const Gaussian& g = fg[i];
      g_color[t][i] = total[s].gr;
      g_opacity[i] += total[s].go;

      const Vec3 pc = camera.rot * g.mu + camera.trans;
      const double X = pc.x(), Y = pc.y(), Z = pc.z();
      Eigen::Matrix<double, 2, 3> J;
      J << camera.fx / Z, 0, -camera.fx * X / (Z * Z),
          0, camera.fy / Z, -camera.fy * Y / (Z * Z);
      const Eigen::Matrix<double, 2, 3> M = J * camera.rot;

      Mat2 gcov;
      gcov << total[s].gs00, 0.5 * total[s].gs01, 0.5 * total[s].gs01, total[s].gs11;

      const Mat3 sigma3 = covariance3d(g.s, g.phi);
      g_sigma3[i] += M.transpose() * gcov * M;

      // J carries the remaining dependence of the 2-D covariance on the mean.
      const Eigen::Matrix<double, 2, 3> gM = 2.0 * gcov * M * sigma3;
      const Eigen::Matrix<double, 2, 3> gJ = gM * camera.rot.transpose();
      Vec3 g_pc = J.transpose() * total[s].gx;
      const double z2 = Z * Z, z3 = z2 * Z;
      g_pc.x() += gJ(0, 2) * (-camera.fx / z2);
      g_pc.y() += gJ(1, 2) * (-camera.fy / z2);
      g_pc.z() += gJ(0, 0) * (-camera.fx / z2) + gJ(1, 1) * (-camera.fy / z2) +
                  gJ(0, 2) * (2.0 * camera.fx * X / z3) +
                  gJ(1, 2) * (2.0 * camera.fy * Y / z3);
      g_mu[t][i] = camera.rot.transpose() * g_pc;
    }
  }

  // Shared-parameter chains: covariance to (s, phi), opacity to its logit.
  for (int i = 0; i < n; ++i) {
    const Gaussian& g = traj.g0[i];
    const double norm = g.phi.norm();
    const Vec4 u = g.phi / norm;
    const Mat3 R = quat_to_rotation(g.phi);
    const Mat3 sym = g_sigma3[i] + g_sigma3[i].transpose(); // = 2 * G for symmetric G
    const Mat3 gR = sym * R * g.s.cwiseProduct(g.s).asDiagonal();
    const Mat3 rtgr = R.transpose() * g_sigma3[i] * R;
    for (int a = 0; a < 3; ++a)
      grads.g0[i].s_log[a] = 2.0 * g.s[a] * rtgr(a, a) * g.s[a];
    const Vec4 gu = rotation_backward(u, gR);
    grads.g0[i].phi = (gu - u * u.dot(gu)) / norm;
    grads.g0[i].o_logit = g_opacity[i] * logistic_slope(g.o);
  }

  // Means: a delta's gradient aggregates every frame at or after its own.
  {
    std::vector<Vec3> suffix(n, Vec3::Zero());
    for (int t = k - 1; t >= 1; --t) {
      for (int i = 0; i < n; ++i) {
        suffix[i] += g_mu[t][i];
        grads.deltas[t - 1][i].dmu = suffix[i];
      }
    }
    for (int i = 0; i < n; ++i) grads.g0[i].mu = suffix[i] + g_mu[0][i];
  }

  // Colors: walk the clamp chain backward; a clamped channel blocks flow.
  {
    std::vector<Vec3> g_total(n);
    for (int i = 0; i < n; ++i) g_total[i] = g_color[k - 1][i];
    for (int t = k - 1; t >= 1; --t) {
      for (int i = 0; i < n; ++i) {
        const Vec3 pre = frames[t - 1][i].r + traj.deltas[t - 1][i].dr;
        Vec3 gz = Vec3::Zero();
        for (int c = 0; c < 3; ++c)
          if (pre[c] > 0.0 && pre[c] < 1.0) gz[c] = g_total[i][c];
        grads.deltas[t - 1][i].dr = gz;
        g_total[i] = g_color[t - 1][i] + gz;
      }
    }
    for (int i = 0; i < n; ++i) {
      const Vec3 r0 = traj.g0[i].r;
      for (int c = 0; c < 3; ++c)
        grads.g0[i].r_logit[c] = g_total[i][c] * logistic_slope(r0[c]);
    }
  }

  const double loss = loss_sum / (static_cast<double>(k) * H * W * 3);
  return {loss, std::move(grads)};
}

} // namespace gsvt
