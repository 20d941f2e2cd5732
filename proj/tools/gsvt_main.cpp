#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsvt/eval.hpp"
#include "gsvt/fit.hpp"
#include "gsvt/io.hpp"
#include "gsvt/synth.hpp"
#include "gsvt/track.hpp"

namespace fs = std::filesystem;
using namespace gsvt;

namespace {

constexpr int kExitUsage = 2;   // bad flags or contract violations
constexpr int kExitFormat = 3;  // unreadable or malformed input files
constexpr int kExitNumeric = 4; // optimization diverged

Camera camera_from_flag(const std::string& flag, int width, int height) {
  Camera cam = Camera::default_for(width, height);
  if (flag.empty()) return cam;
  double v[4];
  if (std::sscanf(flag.c_str(), "%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]) != 4)
    throw std::invalid_argument("--camera expects fx,fy,cx,cy");
  cam.fx = v[0];
  cam.fy = v[1];
  cam.cx = v[2];
  cam.cy = v[3];
  return cam;
}

Vec3 rgb_from_flag(const std::string& flag) {
  Vec3 c = Vec3::Zero();
  if (flag.empty()) return c;
  if (std::sscanf(flag.c_str(), "%lf,%lf,%lf", &c[0], &c[1], &c[2]) != 3)
    throw std::invalid_argument("--background expects r,g,b");
  return c;
}

Vec3 palette(int i) {
  const double h = std::fmod(0.61803398875 * (i + 1), 1.0) * 6.0;
  const double s = 0.75, v = 0.95;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return Vec3(v, t, p);
    case 1: return Vec3(q, v, p);
    case 2: return Vec3(p, v, t);
    case 3: return Vec3(p, q, v);
    case 4: return Vec3(t, p, v);
    default: return Vec3(v, p, q);
  }
}

void draw_circle(Image& img, const Vec2& center, const Vec3& color, bool filled) {
  const double radius = 2.5, ring = 0.7;
  const int x0 = static_cast<int>(std::floor(center.x() - radius - 1));
  const int x1 = static_cast<int>(std::ceil(center.x() + radius + 1));
  const int y0 = static_cast<int>(std::floor(center.y() - radius - 1));
  const int y1 = static_cast<int>(std::ceil(center.y() + radius + 1));
  for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) {
      const double d = std::hypot(x - center.x(), y - center.y());
      const bool hit = filled ? d <= radius : std::abs(d - radius) <= ring / 2;
      if (hit)
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
    }
}

std::string text_report(const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "aj = %.6f\ndelta_avg = %.6f\noa = %.6f\npairs = %d\n",
                r.aj, r.delta_avg, r.oa, r.pairs);
  return buf;
}

// ---- synth ----

struct SynthArgs {
  std::string spec_path, out_dir;
  int suite_index = -1;
  std::uint64_t suite_seed = 0;
};

void cmd_synth(const SynthArgs& a) {
  SceneSpec spec;
  if (!a.spec_path.empty()) {
    spec = parse_scene(read_text_file(a.spec_path));
  } else if (a.suite_index >= 0) {
    const auto suite = standard_suite(a.suite_seed);
    if (a.suite_index >= static_cast<int>(suite.size()))
      throw std::invalid_argument("--suite index out of range");
    spec = suite[a.suite_index];
  } else {
    throw std::invalid_argument("synth needs --spec or --suite");
  }
  const SynthOutput out = generate_scene(spec);
  write_frames(a.out_dir, out.video);

  GroundTruthFile gt;
  gt.width = spec.width;
  gt.height = spec.height;
  gt.k = spec.k;
  gt.tracks = out.gt_tracks;
  write_text_file((fs::path(a.out_dir) / "gt_tracks.json").string(),
                  serialize_ground_truth(gt));
  write_text_file((fs::path(a.out_dir) / "gt_trajectory.json").string(),
                  serialize_trajectory({1, out.camera, out.gt_trajectory}));
  write_text_file((fs::path(a.out_dir) / "scene.json").string(), serialize_scene(spec));
}

// ---- fit ----

struct FitArgs {
  std::string frames_dir, out_path, report_path, camera_flag;
  FitConfig config;
  bool progress = false;
};

void cmd_fit(const FitArgs& a) {
  const Video video = read_frames(a.frames_dir);
  const Camera camera =
      camera_from_flag(a.camera_flag, video.front().width, video.front().height);
  FitProgressFn progress;
  if (a.progress)
    progress = [](int iter, double loss) {
      if (iter % 50 == 0 || iter == 1)
        std::fprintf(stderr, "iter %d loss %.8g\n", iter, loss);
    };
  const FitResult result = fit(video, camera, a.config, progress);
  write_text_file(a.out_path, serialize_trajectory({1, camera, result.trajectory}));

  FitReport report;
  report.final_loss = result.final_loss;
  report.psnr_per_frame = result.psnr_per_frame;
  report.wall_seconds = result.wall_seconds;
  report.seed = a.config.seed;
  report.iterations = a.config.iterations;
  const std::string rp =
      a.report_path.empty() ? a.out_path + ".report.json" : a.report_path;
  write_text_file(rp, serialize_fit_report(report));
}

// ---- track ----

struct TrackArgs {
  std::string trajectory_path, out_path, gt_path;
  std::vector<std::string> query_flags;
  int stride = 5;
  TrackerConfig config;
};

void cmd_track(const TrackArgs& a) {
  const TrajectoryFile tf = parse_trajectory(read_text_file(a.trajectory_path));
  std::vector<Query> queries;
  std::vector<int> gt_index;
  if (!a.gt_path.empty()) {
    const GroundTruthFile gt = parse_ground_truth(read_text_file(a.gt_path));
    if (gt.k != tf.trajectory.frame_count())
      throw std::invalid_argument("ground truth and trajectory disagree on frame count");
    EvalConfig ec;
    ec.stride = a.stride;
    for (size_t i = 0; i < gt.tracks.size(); ++i)
      for (const Query& q : strided_queries(gt.tracks[i], ec)) {
        queries.push_back(q);
        gt_index.push_back(static_cast<int>(i));
      }
  }
  for (const std::string& flag : a.query_flags) {
    Query q;
    if (std::sscanf(flag.c_str(), "%d,%lf,%lf", &q.t, &q.p.x(), &q.p.y()) != 3)
      throw std::invalid_argument("--query expects t,x,y");
    queries.push_back(q);
    gt_index.push_back(-1);
  }
  if (queries.empty()) throw std::invalid_argument("track needs --gt or --query");

  const Tracker tracker(tf.trajectory, tf.camera, a.config);
  TrackFile out;
  out.k = tf.trajectory.frame_count();
  out.top_k = a.config.top_k;
  out.tau_vis = a.config.tau_vis;
  out.beta = a.config.beta;
  out.eps = a.config.eps;
  out.normalize_flow = a.config.normalize_flow;
  for (size_t i = 0; i < queries.size(); ++i) {
    Track tr = tracker.track(queries[i]);
    tr.gt_index = gt_index[i];
    out.tracks.push_back(std::move(tr));
  }
  write_text_file(a.out_path, serialize_tracks(out));
}

// ---- eval ----

struct EvalArgs {
  std::string tracks_path, gt_path, out_path;
  EvalConfig config;
};

void cmd_eval(const EvalArgs& a) {
  const TrackFile tf = parse_tracks(read_text_file(a.tracks_path));
  const GroundTruthFile gt = parse_ground_truth(read_text_file(a.gt_path));
  if (tf.k != gt.k)
    throw std::invalid_argument("tracks and ground truth disagree on frame count");

  EvalConfig ec = a.config;
  ec.src_width = gt.width;
  ec.src_height = gt.height;

  std::vector<Track> tracks;
  std::vector<GroundTruthTrack> gts;
  for (const Track& tr : tf.tracks) {
    if (tr.gt_index < 0 || tr.gt_index >= static_cast<int>(gt.tracks.size()))
      throw std::invalid_argument("track without a ground-truth pairing");
    tracks.push_back(tr);
    gts.push_back(gt.tracks[tr.gt_index]);
  }
  const EvalReport report = evaluate(tracks, gts, ec);

  write_text_file(a.out_path, serialize_eval_report(report));
  fs::path txt(a.out_path);
  txt.replace_extension(".txt");
  write_text_file(txt.string(), text_report(report));
  std::fputs(text_report(report).c_str(), stdout);
}

// ---- render ----

struct RenderArgs {
  std::string trajectory_path, out_dir, overlay_path, background_flag;
  int flow_t = -1;
  bool flow_set = false;
};

void cmd_render(const RenderArgs& a) {
  const TrajectoryFile tf = parse_trajectory(read_text_file(a.trajectory_path));
  const auto frames = integrate_deltas(tf.trajectory);
  const int k = tf.trajectory.frame_count();
  fs::create_directories(a.out_dir);

  RasterConfig rc;
  const Vec3 bg = rgb_from_flag(a.background_flag);
  rc.background = {bg[0], bg[1], bg[2]};

  if (a.flow_set) {
    if (a.flow_t < 0 || a.flow_t >= k - 1)
      throw std::invalid_argument("--flow frame out of range");
    TrackerConfig tc;
    tc.raster = rc;
    const FlowField field = render_flow_field(tf.trajectory, tf.camera, a.flow_t, tc);
    double m = 1e-12;
    for (double v : field.grid.data) m = std::max(m, std::abs(v));
    Image img(field.grid.height, field.grid.width, 3);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        img.at(y, x, 0) = 0.5 + field.grid.at(y, x, 0) / (2 * m);
        img.at(y, x, 1) = 0.5 + field.grid.at(y, x, 1) / (2 * m);
        img.at(y, x, 2) = 0.5;
      }
    char name[32];
    std::snprintf(name, sizeof name, "flow_%04d", a.flow_t);
    write_ppm((fs::path(a.out_dir) / (std::string(name) + ".ppm")).string(), img);
    std::string params = "{\"t\":" + std::to_string(a.flow_t) + ",\"offset\":0.5,\"scale\":";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", 1.0 / (2 * m));
    params += buf;
    params += "}\n"; // pixel01 = offset + scale * flow
    write_text_file((fs::path(a.out_dir) / (std::string(name) + ".json")).string(), params);
    return;
  }

  std::vector<Track> overlay;
  if (!a.overlay_path.empty()) {
    const TrackFile trf = parse_tracks(read_text_file(a.overlay_path));
    if (trf.k != k)
      throw std::invalid_argument("overlay tracks disagree on frame count");
    overlay = trf.tracks;
  }

  for (int t = 0; t < k; ++t) {
    Image img = rasterize(frames[t], tf.camera, rgb_attributes(frames[t]), rc).image;
    for (size_t i = 0; i < overlay.size(); ++i)
      draw_circle(img, overlay[i].points[t], palette(static_cast<int>(i)),
                  overlay[i].visible[t]);
    const char* prefix = overlay.empty() ? "frame" : "overlay";
    char name[32];
    std::snprintf(name, sizeof name, "%s_%04d.ppm", prefix, t);
    write_ppm((fs::path(a.out_dir) / name).string(), img);
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic 3-D gaussian video fitting and any-point tracking"};
  app.require_subcommand(1);

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "render a scripted scene with ground truth");
  synth->add_option("--spec", sa.spec_path, "scene file");
  synth->add_option("--suite", sa.suite_index, "index into the built-in scene suite");
  synth->add_option("--suite-seed", sa.suite_seed, "seed for the built-in suite");
  synth->add_option("--out", sa.out_dir, "output directory")->required();
  synth->callback([&] { cmd_synth(sa); });

  FitArgs fa;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a gaussian trajectory to frames");
  fit_cmd->add_option("--frames", fa.frames_dir, "input frame directory")->required();
  fit_cmd->add_option("--out", fa.out_path, "output trajectory file")->required();
  fit_cmd->add_option("--report", fa.report_path, "report file (default <out>.report.json)");
  fit_cmd->add_option("--camera", fa.camera_flag, "fx,fy,cx,cy");
  fit_cmd->add_option("--n", fa.config.num_gaussians, "number of gaussians");
  fit_cmd->add_option("--iters", fa.config.iterations, "optimization iterations");
  fit_cmd->add_option("--seed", fa.config.seed, "initialization seed");
  fit_cmd->add_option("--init-depth", fa.config.init_depth, "initial depth of gaussians");
  fit_cmd->add_option("--lr-means", fa.config.lr.means, "step size for static positions");
  fit_cmd->add_option("--lr-dmu", fa.config.lr.delta_means, "step size for position deltas");
  fit_cmd->add_option("--lr-colors", fa.config.lr.colors, "step size for colors");
  fit_cmd->add_option("--lr-scales", fa.config.lr.scales, "step size for scales");
  fit_cmd->add_option("--lr-opacities", fa.config.lr.opacities, "step size for opacities");
  fit_cmd->add_flag("--freeze-dmu", fa.config.freeze_dmu, "keep position residuals zero");
  fit_cmd->add_flag("--freeze-dr", fa.config.freeze_dr, "keep color residuals zero");
  fit_cmd->add_flag("--progress", fa.progress, "log loss to stderr");
  fit_cmd->callback([&] { cmd_fit(fa); });

  TrackArgs ta;
  CLI::App* track_cmd = app.add_subcommand("track", "track query points through a trajectory");
  track_cmd->add_option("--trajectory", ta.trajectory_path, "trajectory file")->required();
  track_cmd->add_option("--out", ta.out_path, "output track file")->required();
  track_cmd->add_option("--gt", ta.gt_path, "ground-truth file for strided queries");
  track_cmd->add_option("--stride", ta.stride, "query stride with --gt");
  track_cmd->add_option("--query", ta.query_flags, "manual query t,x,y (repeatable)");
  track_cmd->add_option("--top-k", ta.config.top_k, "anchor count");
  track_cmd->add_option("--tau-vis", ta.config.tau_vis, "visibility threshold");
  track_cmd->add_option("--beta", ta.config.beta, "mixture blend weight");
  track_cmd->add_option("--eps", ta.config.eps, "normalization epsilon");
  track_cmd->add_option("--normalize-flow", ta.config.normalize_flow,
                        "divide flow by accumulated weight");
  track_cmd->callback([&] { cmd_track(ta); });

  EvalArgs ea;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score tracks against ground truth");
  eval_cmd->add_option("--tracks", ea.tracks_path, "track file")->required();
  eval_cmd->add_option("--gt", ea.gt_path, "ground-truth file")->required();
  eval_cmd->add_option("--out", ea.out_path, "report file")->required();
  eval_cmd->add_option("--stride", ea.config.stride, "stride echoed into the config");
  eval_cmd->add_option("--eval-width", ea.config.eval_width, "metric resolution width");
  eval_cmd->add_option("--eval-height", ea.config.eval_height, "metric resolution height");
  eval_cmd->callback([&] { cmd_eval(ea); });

  RenderArgs ra;
  CLI::App* render_cmd = app.add_subcommand("render", "render frames, flow or overlays");
  render_cmd->add_option("--trajectory", ra.trajectory_path, "trajectory file")->required();
  render_cmd->add_option("--out", ra.out_dir, "output directory")->required();
  render_cmd->add_option("--background", ra.background_flag, "r,g,b background");
  render_cmd->add_option("--flow", ra.flow_t, "emit the flow field advecting this frame");
  render_cmd->add_option("--overlay", ra.overlay_path, "track file drawn onto the frames");
  render_cmd->callback([&] {
    ra.flow_set = render_cmd->count("--flow") > 0;
    cmd_render(ra);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFormat;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return std::string(e.what()).find("non-finite") != std::string::npos ? kExitNumeric
                                                                         : kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return 0;
}
