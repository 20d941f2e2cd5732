#include "gsvt/fit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gsvt/io.hpp"
#include "gsvt/rng.hpp"
#include "gsvt/synth.hpp"
#include "oracles.hpp"

using namespace gsvt;

namespace {

/// Small seeded target: one moving blob near the image center.
Video small_target(const Camera& cam, int k) {
  SceneSpec spec;
  spec.width = cam.width;
  spec.height = cam.height;
  spec.k = k;
  BlobSpec b;
  b.position = Vec3(-0.08, 0.02, 1.0);
  b.color = Vec3(0.9, 0.5, 0.2);
  b.velocities.assign(k - 1, Vec3(0.02, 0.008, 0));
  spec.blobs = {b};
  spec.background = Vec3(0.05, 0.05, 0.08);
  return generate_scene(spec).video;
}

bool same_trajectory(const GaussianTrajectory& a, const GaussianTrajectory& b) {
  if (a.g0.size() != b.g0.size() || a.deltas.size() != b.deltas.size()) return false;
  for (size_t i = 0; i < a.g0.size(); ++i) {
    if (a.g0[i].mu != b.g0[i].mu || a.g0[i].s != b.g0[i].s || a.g0[i].phi != b.g0[i].phi ||
        a.g0[i].r != b.g0[i].r || a.g0[i].o != b.g0[i].o)
      return false;
  }
  for (size_t t = 0; t < a.deltas.size(); ++t)
    for (size_t i = 0; i < a.deltas[t].size(); ++i)
      if (a.deltas[t][i].dmu != b.deltas[t][i].dmu || a.deltas[t][i].dr != b.deltas[t][i].dr)
        return false;
  return true;
}

} // namespace

TEST(InitTrajectory, ShapeSeedingAndDefaults) {
  const Camera cam = Camera::default_for(24, 24);
  const Video video = small_target(cam, 3);
  FitConfig cfg;
  cfg.num_gaussians = 12;
  cfg.seed = 5;
  cfg.init_depth = 1.5;
  const GaussianTrajectory traj = init_trajectory(video, cam, cfg);
  traj.validate();
  ASSERT_EQ(traj.g0.size(), 12u);
  ASSERT_EQ(traj.deltas.size(), 2u);
  for (const auto& g : traj.g0) {
    EXPECT_NEAR(g.mu.z(), 1.5, 1e-12);
    EXPECT_EQ(g.o, 0.5);
    EXPECT_EQ(g.phi, Vec4(1, 0, 0, 0));
    EXPECT_GT(g.s.minCoeff(), 0.0);
  }
  for (const auto& row : traj.deltas)
    for (const auto& d : row) {
      EXPECT_EQ(d.dmu, Vec3::Zero());
      EXPECT_EQ(d.dr, Vec3::Zero());
    }
  // Same seed reproduces; a different seed does not.
  EXPECT_TRUE(same_trajectory(traj, init_trajectory(video, cam, cfg)));
  FitConfig other = cfg;
  other.seed = 6;
  EXPECT_FALSE(same_trajectory(traj, init_trajectory(video, cam, other)));
}

TEST(Fit, ZeroIterationsReturnsInitialization) {
  const Camera cam = Camera::default_for(24, 24);
  const Video video = small_target(cam, 3);
  FitConfig cfg;
  cfg.num_gaussians = 8;
  cfg.iterations = 0;
  cfg.seed = 11;
  const FitResult res = fit(video, cam, cfg);
  EXPECT_TRUE(same_trajectory(res.trajectory, init_trajectory(video, cam, cfg)));
  EXPECT_TRUE(res.loss_history.empty());
  EXPECT_EQ(res.final_loss, render_loss(res.trajectory, cam, video, cfg.raster));
}

TEST(Fit, LossDecreasesOnSmallScene) {
  const Camera cam = Camera::default_for(24, 24);
  const Video video = small_target(cam, 3);
  FitConfig cfg;
  cfg.num_gaussians = 8;
  cfg.iterations = 300;
  cfg.seed = 2;
  const double initial = render_loss(init_trajectory(video, cam, cfg), cam, video, cfg.raster);
  const FitResult res = fit(video, cam, cfg);
  ASSERT_EQ(res.loss_history.size(), 300u);
  EXPECT_LT(res.final_loss, 0.5 * initial);
  // loss_history holds the pre-step loss of each iteration; final_loss is
  // rendered at the returned parameters.
  EXPECT_EQ(res.final_loss, render_loss(res.trajectory, cam, video, cfg.raster));
  EXPECT_LT(res.final_loss, res.loss_history.front());
  EXPECT_EQ(res.psnr_per_frame.size(), 3u);
  res.trajectory.validate(); // constraints hold after optimization
}

TEST(Fit, DeterministicAcrossRuns) {
  const Camera cam = Camera::default_for(20, 20);
  const Video video = small_target(cam, 2);
  FitConfig cfg;
  cfg.num_gaussians = 6;
  cfg.iterations = 25;
  cfg.seed = 3;
  const FitResult a = fit(video, cam, cfg);
  const FitResult b = fit(video, cam, cfg);
  EXPECT_TRUE(same_trajectory(a.trajectory, b.trajectory));
  EXPECT_EQ(a.final_loss, b.final_loss);
  const TrajectoryFile fa{1, cam, a.trajectory}, fb{1, cam, b.trajectory};
  EXPECT_EQ(serialize_trajectory(fa), serialize_trajectory(fb));
}

TEST(Fit, FrozenDeltaStreamsStayExactlyZero) {
  const Camera cam = Camera::default_for(20, 20);
  const Video video = small_target(cam, 3);
  FitConfig cfg;
  cfg.num_gaussians = 6;
  cfg.iterations = 30;
  cfg.seed = 4;
  cfg.freeze_dmu = true;
  const FitResult a = fit(video, cam, cfg);
  for (const auto& row : a.trajectory.deltas)
    for (const auto& d : row) EXPECT_EQ(d.dmu, Vec3::Zero());

  cfg.freeze_dmu = false;
  cfg.freeze_dr = true;
  const FitResult b = fit(video, cam, cfg);
  for (const auto& row : b.trajectory.deltas)
    for (const auto& d : row) EXPECT_EQ(d.dr, Vec3::Zero());
  // The unfrozen stream did move.
  double moved = 0.0;
  for (const auto& row : b.trajectory.deltas)
    for (const auto& d : row) moved += d.dmu.norm();
  EXPECT_GT(moved, 0.0);
}

TEST(Fit, ProgressCallbackSeesEveryIteration) {
  const Camera cam = Camera::default_for(16, 16);
  const Video video = small_target(cam, 2);
  FitConfig cfg;
  cfg.num_gaussians = 4;
  cfg.iterations = 10;
  std::vector<int> iters;
  std::vector<double> losses;
  const FitResult res = fit(video, cam, cfg, [&](int it, double loss) {
    iters.push_back(it);
    losses.push_back(loss);
  });
  ASSERT_EQ(iters.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(iters[i], i + 1);
  EXPECT_EQ(losses, res.loss_history);
}

TEST(Fit, NonFiniteTargetAbortsWithNamedGroup) {
  const Camera cam = Camera::default_for(16, 16);
  Video video = small_target(cam, 2);
  video[0].at(3, 3, 0) = std::numeric_limits<double>::quiet_NaN();
  FitConfig cfg;
  cfg.num_gaussians = 4;
  cfg.iterations = 5;
  try {
    fit(video, cam, cfg);
    FAIL() << "expected std::runtime_error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos) << e.what();
  }
}

TEST(Psnr, HandValuesAndMonotonicity) {
  Image a(4, 4, 1), b(4, 4, 1);
  EXPECT_TRUE(std::isinf(psnr(a, b)));
  b.data.assign(b.data.size(), 0.1); // MSE = 0.01 -> 20 dB
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
  Image c = b;
  c.data.assign(c.data.size(), 0.2); // MSE = 0.04 -> ~13.98 dB
  EXPECT_NEAR(psnr(a, c), 10.0 * std::log10(1.0 / 0.04), 1e-9);
  EXPECT_LT(psnr(a, c), psnr(a, b));
  Image d(4, 5, 1);
  EXPECT_THROW(psnr(a, d), std::invalid_argument);
}

TEST(PsnrPerFrame, MatchesDirectRenderComparison) {
  std::mt19937_64 rng(77);
  const Camera cam = Camera::default_for(20, 20);
  const GaussianTrajectory traj = oracles::smooth_trajectory(rng, 4, 3, cam);
  RasterConfig rc;
  rc.background = {0.1, 0.1, 0.1};
  const auto frames = integrate_deltas(traj);
  Video target;
  for (const auto& g : frames)
    target.push_back(rasterize(g, cam, rgb_attributes(g), rc).image);
  const auto values = psnr_per_frame(traj, cam, target, rc);
  ASSERT_EQ(values.size(), 3u);
  for (double v : values) EXPECT_TRUE(std::isinf(v)); // renders equal target

  target[1].at(0, 0, 0) += 0.5;
  const auto bumped = psnr_per_frame(traj, cam, target, rc);
  EXPECT_TRUE(std::isinf(bumped[0]));
  EXPECT_FALSE(std::isinf(bumped[1]));
  EXPECT_NEAR(bumped[1], 10.0 * std::log10(1.0 / (0.25 / (20 * 20 * 3))), 1e-9);
}
