#include "gsvt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gsvt/rng.hpp"

namespace gsvt {

namespace {

Vec3 scene_from_px(double px, double py, double z, const Camera& cam) {
  return Vec3((px - cam.cx) / cam.fx * z, (py - cam.cy) / cam.fy * z, z);
}

Vec3 vel_from_px(double vx, double vy, double z, const Camera& cam) {
  return Vec3(vx * z / cam.fx, vy * z / cam.fy, 0.0);
}

/// Projected center per frame, ignoring occlusion. Assumes the blob stays in
/// front of the camera (suite construction guarantees it).
std::vector<Vec2> pixel_path(const BlobSpec& b, int k, const Camera& cam) {
  std::vector<Vec2> out;
  out.reserve(k);
  Vec3 mu = b.position;
  for (int t = 0; t < k; ++t) {
    const auto pp = project_point(cam, mu);
    out.push_back(pp ? pp->x : Vec2::Zero());
    if (t + 1 < k && !b.velocities.empty()) mu += b.velocities[t];
  }
  return out;
}

/// Largest on-screen sigma the blob reaches over the clip, in pixels.
double sigma_px_max(const BlobSpec& b, int k, const Camera& cam) {
  double z_min = b.position.z();
  Vec3 mu = b.position;
  for (int t = 0; t + 1 < k && !b.velocities.empty(); ++t) {
    mu += b.velocities[t];
    z_min = std::min(z_min, mu.z());
  }
  return cam.fx * b.scale / std::max(z_min, kZNear);
}

struct Placed {
  std::vector<Vec2> path;
  double sigma_px = 0.0;
};

Placed place(const BlobSpec& b, int k, const Camera& cam) {
  return Placed{pixel_path(b, k, cam), sigma_px_max(b, k, cam)};
}

/// Distance below which blob footprints could touch: the 3-sigma cutoff of
/// the wider blob (low-pass floor included) plus a safety band.
double required_distance(double sig_a, double sig_b, double safety) {
  const double s = std::max(sig_a, sig_b);
  return 3.0 * std::sqrt(s * s + kLowPassFloor) + safety;
}

bool clear_of(const std::vector<Placed>& placed, const Vec2& p, double sigma_px,
              double safety) {
  for (const Placed& q : placed)
    for (const Vec2& c : q.path)
      if ((c - p).norm() < required_distance(sigma_px, q.sigma_px, safety)) return false;
  return true;
}

BlobSpec make_blob(std::mt19937_64& rng, double px, double py, double z,
                   double sigma_px, const Camera& cam) {
  BlobSpec b;
  b.position = scene_from_px(px, py, z, cam);
  b.scale = sigma_px * z / cam.fx;
  for (int c = 0; c < 3; ++c) b.color[c] = uniform_range(rng, 0.2, 0.95);
  b.opacity = uniform_range(rng, 0.88, 0.92);
  return b;
}

/// Static distractor blobs on a jittered grid, kept out of every actor's
/// footprint for the whole clip (their composited weight at any tracked
/// point is exactly zero) and away from the image origin.
void add_fillers(SceneSpec& spec, std::vector<Placed>& placed, int want,
                 std::mt19937_64& rng, const Camera& cam) {
  constexpr double kSigma = 3.2;
  for (double safety : {1.5, 0.5}) {
    for (int a = 0; a < 5 && want > 0; ++a)
      for (int bI = 0; bI < 5 && want > 0; ++bI) {
        const double gx = 4.0 + 14.0 * a, gy = 4.0 + 14.0 * bI;
        if (std::hypot(gx, gy) < 16.0) continue; // origin corner stays empty
        const double px = gx + uniform_range(rng, -0.5, 0.5);
        const double py = gy + uniform_range(rng, -0.5, 0.5);
        if (!clear_of(placed, Vec2(px, py), kSigma, safety)) continue;
        const double z = 1.0 + uniform_range(rng, -0.02, 0.02);
        BlobSpec f = make_blob(rng, px, py, z, kSigma, cam);
        placed.push_back(place(f, spec.k, cam));
        spec.blobs.push_back(std::move(f));
        --want;
      }
    if (want == 0) return;
  }
  throw std::logic_error("could not place enough filler blobs");
}

std::vector<Vec3> constant_velocity(int k, const Vec3& v) {
  return std::vector<Vec3>(k - 1, v);
}

SceneSpec base_spec(std::uint64_t seed) {
  SceneSpec s;
  s.width = 64;
  s.height = 64;
  s.k = 16;
  s.background = Vec3(0.05, 0.05, 0.07);
  s.seed = seed;
  return s;
}

/// Eight same-depth blobs sharing one pixel-space velocity.
SceneSpec translation_scene(std::uint64_t seed, std::mt19937_64& rng, double vx,
                            double vy) {
  SceneSpec spec = base_spec(seed);
  const Camera cam = Camera::default_for(spec.width, spec.height);
  const double tx = (spec.k - 1) * vx, ty = (spec.k - 1) * vy;
  const double mx = 4.0 + std::max(0.0, -tx), my = 4.0 + std::max(0.0, -ty);
  for (int a = 0; a < 3; ++a)
    for (int bI = 0; bI < 3; ++bI) {
      if (a == 1 && bI == 1) continue; // center slot unused: 8 blobs
      const double px = mx + 16.0 * a + uniform_range(rng, -1.5, 1.5);
      const double py = my + 16.0 * bI + uniform_range(rng, -1.5, 1.5);
      const double z = 1.0 + uniform_range(rng, -0.02, 0.02);
      BlobSpec b = make_blob(rng, px, py, z, 3.4, cam);
      b.velocities = constant_velocity(spec.k, vel_from_px(vx, vy, z, cam));
      spec.blobs.push_back(std::move(b));
    }
  return spec;
}

struct DepthActor {
  double px, py, dz, vx;
};

/// Three actors ramping in depth (or translating at fixed depth) plus five
/// static fillers.
SceneSpec depth_scene(std::uint64_t seed, std::mt19937_64& rng,
                      const std::vector<DepthActor>& actors) {
  SceneSpec spec = base_spec(seed);
  const Camera cam = Camera::default_for(spec.width, spec.height);
  std::vector<Placed> placed;
  for (const DepthActor& a : actors) {
    BlobSpec b = make_blob(rng, a.px, a.py, 1.0, 3.4, cam);
    b.velocities.assign(spec.k - 1, Vec3::Zero());
    Vec3 mu = b.position;
    for (int t = 0; t + 1 < spec.k; ++t) {
      // Keep the pixel velocity constant while depth ramps.
      const double z = mu.z();
      Vec3 v = vel_from_px(a.vx, 0.0, z, cam);
      v.z() = a.dz;
      b.velocities[t] = v;
      mu += v;
    }
    placed.push_back(place(b, spec.k, cam));
    spec.blobs.push_back(std::move(b));
  }
  add_fillers(spec, placed, 5, rng, cam);
  return spec;
}

struct CrossSpec {
  Vec2 target, target_v; // pixels, pixels/frame at depth 1.15
  Vec2 occ_start, occ_v; // pixels, pixels/frame at depth 0.85
};

/// A far target crossed by a near occluder; eight fillers in between indices
/// so the occluder sits last (out of zero-weight anchor tie-breaks).
SceneSpec crossing_scene(std::uint64_t seed, std::mt19937_64& rng, const CrossSpec& cs) {
  SceneSpec spec = base_spec(seed);
  const Camera cam = Camera::default_for(spec.width, spec.height);
  const double z_far = 1.15, z_near = 0.85;

  BlobSpec target = make_blob(rng, cs.target.x(), cs.target.y(), z_far, 3.6, cam);
  if (!cs.target_v.isZero())
    target.velocities =
        constant_velocity(spec.k, vel_from_px(cs.target_v.x(), cs.target_v.y(), z_far, cam));
  BlobSpec occ = make_blob(rng, cs.occ_start.x(), cs.occ_start.y(), z_near, 3.8, cam);
  occ.opacity = 0.92;
  occ.velocities =
      constant_velocity(spec.k, vel_from_px(cs.occ_v.x(), cs.occ_v.y(), z_near, cam));

  std::vector<Placed> placed = {place(target, spec.k, cam), place(occ, spec.k, cam)};
  spec.blobs.push_back(std::move(target));
  add_fillers(spec, placed, 8, rng, cam);
  spec.blobs.push_back(std::move(occ));
  return spec;
}

struct ExitActor {
  Vec2 start, v;
  int reverse_row = -1; // velocity negated from this delta row on
};

/// One actor scripted to leave the image plus nine fillers.
SceneSpec exit_scene(std::uint64_t seed, std::mt19937_64& rng, const ExitActor& ea) {
  SceneSpec spec = base_spec(seed);
  const Camera cam = Camera::default_for(spec.width, spec.height);
  const double z = 1.0;
  BlobSpec b = make_blob(rng, ea.start.x(), ea.start.y(), z, 3.5, cam);
  b.velocities.assign(spec.k - 1, vel_from_px(ea.v.x(), ea.v.y(), z, cam));
  if (ea.reverse_row >= 0)
    for (int t = ea.reverse_row; t + 1 < spec.k; ++t) b.velocities[t] = -b.velocities[t];
  std::vector<Placed> placed = {place(b, spec.k, cam)};
  spec.blobs.push_back(std::move(b));
  add_fillers(spec, placed, 9, rng, cam);
  return spec;
}

struct ColorActor {
  Vec2 start, v;
  Vec3 color, dr;
};

/// Three slowly translating actors with scripted color ramps plus fillers.
SceneSpec color_scene(std::uint64_t seed, std::mt19937_64& rng,
                      const std::vector<ColorActor>& actors) {
  SceneSpec spec = base_spec(seed);
  const Camera cam = Camera::default_for(spec.width, spec.height);
  std::vector<Placed> placed;
  for (const ColorActor& a : actors) {
    const double z = 1.0;
    BlobSpec b = make_blob(rng, a.start.x(), a.start.y(), z, 3.4, cam);
    b.color = a.color;
    b.velocities = constant_velocity(spec.k, vel_from_px(a.v.x(), a.v.y(), z, cam));
    b.color_velocities = constant_velocity(spec.k, a.dr);
    placed.push_back(place(b, spec.k, cam));
    spec.blobs.push_back(std::move(b));
  }
  add_fillers(spec, placed, 5, rng, cam);
  return spec;
}

} // namespace

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("degenerate scene size");
  if (k < 2) throw std::invalid_argument("scenes need at least two frames");
  for (size_t i = 0; i < blobs.size(); ++i) {
    const BlobSpec& b = blobs[i];
    const std::string tag = "blob " + std::to_string(i);
    if (!(b.scale > 0)) throw std::invalid_argument(tag + ": scale must be positive");
    if (!(b.opacity > 0 && b.opacity < 1))
      throw std::invalid_argument(tag + ": opacity must be in (0,1)");
    for (int c = 0; c < 3; ++c)
      if (!(b.color[c] >= 0 && b.color[c] <= 1))
        throw std::invalid_argument(tag + ": color must be in [0,1]");
    if (!b.velocities.empty() && static_cast<int>(b.velocities.size()) != k - 1)
      throw std::invalid_argument(tag + ": velocity script must have k-1 rows");
    if (!b.color_velocities.empty() &&
        static_cast<int>(b.color_velocities.size()) != k - 1)
      throw std::invalid_argument(tag + ": color script must have k-1 rows");
  }
  for (int c = 0; c < 3; ++c)
    if (!(background[c] >= 0 && background[c] <= 1))
      throw std::invalid_argument("background must be in [0,1]");
}

SynthOutput generate_scene(const SceneSpec& spec) {
  spec.validate();
  SynthOutput out;
  out.camera = Camera::default_for(spec.width, spec.height);

  const int n = static_cast<int>(spec.blobs.size());
  const int k = spec.k;
  GaussianTrajectory traj;
  traj.g0.resize(n);
  for (int i = 0; i < n; ++i) {
    const BlobSpec& b = spec.blobs[i];
    Gaussian& g = traj.g0[i];
    g.mu = b.position;
    g.s = Vec3::Constant(b.scale);
    g.phi = Vec4(1, 0, 0, 0);
    g.r = b.color;
    g.o = b.opacity;
  }
  traj.deltas.assign(k - 1, std::vector<GaussianDelta>(n));
  for (int t = 0; t + 1 < k; ++t)
    for (int i = 0; i < n; ++i) {
      const BlobSpec& b = spec.blobs[i];
      if (!b.velocities.empty()) traj.deltas[t][i].dmu = b.velocities[t];
      if (!b.color_velocities.empty()) traj.deltas[t][i].dr = b.color_velocities[t];
    }
  out.gt_trajectory = traj;

  const auto frames = integrate_deltas(traj);
  std::vector<std::vector<ProjectedPoint>> proj(k, std::vector<ProjectedPoint>(n));
  for (int t = 0; t < k; ++t)
    for (int i = 0; i < n; ++i) {
      const auto pp = project_point(out.camera, frames[t][i].mu);
      if (!pp)
        throw std::invalid_argument("blob " + std::to_string(i) +
                                    " behind the camera at frame " + std::to_string(t));
      proj[t][i] = *pp;
    }

  RasterConfig rc;
  rc.background = {spec.background[0], spec.background[1], spec.background[2]};
  out.video.reserve(k);
  for (int t = 0; t < k; ++t)
    out.video.push_back(rasterize(frames[t], out.camera, rgb_attributes(frames[t]), rc).image);

  out.gt_tracks.assign(n, GroundTruthTrack{});
  for (int i = 0; i < n; ++i) {
    out.gt_tracks[i].points.resize(k);
    out.gt_tracks[i].visible.resize(k);
  }
  for (int t = 0; t < k; ++t)
    for (int i = 0; i < n; ++i) {
      const Vec2 c = proj[t][i].x;
      out.gt_tracks[i].points[t] = c;
      bool visible = in_bounds(c, out.camera);
      if (visible) {
        const std::vector<double> w = visibility_at(frames[t], out.camera, c, rc);
        for (int j = 0; j < n && visible; ++j)
          if (j != i && proj[t][j].z < proj[t][i].z && w[j] > 0.5) visible = false;
      }
      out.gt_tracks[i].visible[t] = visible;
    }
  return out;
}

std::vector<SceneSpec> standard_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SceneSpec> suite;
  suite.reserve(20);

  // Pure translation.
  const double tv[5][2] = {{1.2, 0.0}, {-1.1, 0.15}, {0.0, 1.3}, {0.9, 0.8}, {-0.7, 1.0}};
  for (const auto& v : tv) suite.push_back(translation_scene(seed, rng, v[0], v[1]));

  // Depth change (on-screen scale change).
  suite.push_back(depth_scene(seed, rng,
                              {{16, 16, -0.28 / 15, 0}, {48, 16, -0.28 / 15, 0},
                               {32, 48, -0.28 / 15, 0}}));
  suite.push_back(depth_scene(seed, rng,
                              {{16, 16, 0.36 / 15, 0}, {48, 16, 0.36 / 15, 0},
                               {32, 48, 0.36 / 15, 0}}));
  suite.push_back(depth_scene(seed, rng,
                              {{16, 16, -0.25 / 15, 0}, {48, 16, 0.3 / 15, 0},
                               {32, 48, 0, 1.0}}));

  // Crossing occlusions.
  suite.push_back(crossing_scene(seed, rng,
                                 {{32, 32}, {0, 0}, {10, 32}, {3.0, 0}}));
  suite.push_back(crossing_scene(seed, rng,
                                 {{32, 32}, {0, 0}, {54, 32}, {-2.8, 0}}));
  suite.push_back(crossing_scene(seed, rng,
                                 {{32, 32}, {0, 0}, {32, 8}, {0, 3.2}}));
  suite.push_back(crossing_scene(seed, rng,
                                 {{30, 32}, {0.3, 0}, {8, 30}, {3.4, 0.25}}));
  suite.push_back(crossing_scene(seed, rng,
                                 {{30, 30}, {-0.3, 0.2}, {12, 12}, {2.2, 2.2}}));

  // Frame exit; the first leaves for good at frame 10, the second re-enters.
  suite.push_back(exit_scene(seed, rng, {{34, 30}, {3.1, 0}, -1}));
  suite.push_back(exit_scene(seed, rng, {{36, 26}, {3.4, 0}, 9}));
  suite.push_back(exit_scene(seed, rng, {{30, 44.5}, {0, 2.7}, -1}));

  // Color drift.
  suite.push_back(color_scene(seed, rng,
                              {{{14, 20}, {0.5, 0.35}, {0.15, 0.6, 0.4}, {0.05, 0, 0}},
                               {{44, 14}, {0.5, 0.35}, {0.15, 0.3, 0.7}, {0.05, 0, 0}},
                               {{32, 44}, {0.5, 0.35}, {0.15, 0.8, 0.25}, {0.05, 0, 0}}}));
  suite.push_back(color_scene(seed, rng,
                              {{{14, 20}, {-0.45, 0.4}, {0.5, 0.85, 0.3}, {0, -0.05, 0}},
                               {{44, 14}, {-0.45, 0.4}, {0.7, 0.85, 0.5}, {0, -0.05, 0}},
                               {{32, 44}, {-0.45, 0.4}, {0.3, 0.85, 0.6}, {0, -0.05, 0}}}));
  suite.push_back(color_scene(seed, rng,
                              {{{14, 20}, {0.5, 0.35}, {0.75, 0.7, 0.3}, {0.04, 0.04, 0}},
                               {{44, 14}, {0.5, 0.35}, {0.4, 0.5, 0.6}, {0.01, -0.01, 0.02}},
                               {{32, 44}, {0.5, 0.35}, {0.6, 0.4, 0.3}, {0, 0, 0.03}}}));
  suite.push_back(color_scene(seed, rng,
                              {{{14, 20}, {-0.45, 0.4}, {0.6, 0.3, 0.4}, {-0.05, 0.02, 0.02}},
                               {{44, 14}, {-0.45, 0.4}, {0.5, 0.7, 0.3}, {0.02, -0.03, 0.01}},
                               {{32, 44}, {-0.45, 0.4}, {0.45, 0.3, 0.7}, {-0.01, 0.03, -0.02}}}));
  return suite;
}

} // namespace gsvt
