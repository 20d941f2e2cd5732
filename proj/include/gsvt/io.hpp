#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gsvt/eval.hpp"
#include "gsvt/geom.hpp"
#include "gsvt/image.hpp"
#include "gsvt/synth.hpp"
#include "gsvt/track.hpp"

namespace gsvt {

/// Malformed or inconsistent input file.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- PPM frames (binary P6, 8-bit, values mapped by round(255*v)) ----

std::string encode_ppm(const Image& image);
Image decode_ppm(const std::string& bytes); // throws FormatError

void write_ppm(const std::string& path, const Image& image);
Image read_ppm(const std::string& path);

/// frame_0000.ppm, frame_0001.ppm, ... inside dir.
std::string frame_filename(int index);
void write_frames(const std::string& dir, const Video& video);
/// Loads all frame_*.ppm in index order; throws FormatError on gaps or
/// mismatched sizes (the message names the file).
Video read_frames(const std::string& dir);

// ---- Structured text formats (JSON syntax, 17 significant digits) ----

struct TrajectoryFile {
  int version = 1;
  Camera camera; // carries width/height
  GaussianTrajectory trajectory;
};

struct TrackFile {
  int version = 1;
  int k = 0;
  int top_k = 8;
  double tau_vis = 0.5;
  double beta = 0.3;
  double eps = 1e-8;
  bool normalize_flow = true;
  std::vector<Track> tracks; // query, per-frame points/flags, gt_index
};

struct GroundTruthFile {
  int version = 1;
  int width = 0, height = 0, k = 0;
  std::vector<GroundTruthTrack> tracks;
};

struct FitReport {
  double final_loss = 0.0;
  std::vector<double> psnr_per_frame; // +inf serialized as null
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
};

std::string serialize_trajectory(const TrajectoryFile& f);
TrajectoryFile parse_trajectory(const std::string& text);

std::string serialize_tracks(const TrackFile& f);
TrackFile parse_tracks(const std::string& text);

std::string serialize_ground_truth(const GroundTruthFile& f);
GroundTruthFile parse_ground_truth(const std::string& text);

std::string serialize_scene(const SceneSpec& s);
SceneSpec parse_scene(const std::string& text);

std::string serialize_eval_report(const EvalReport& r);
EvalReport parse_eval_report(const std::string& text);

std::string serialize_fit_report(const FitReport& r);
FitReport parse_fit_report(const std::string& text);

// Path wrappers; throw FormatError (parse) or std::runtime_error (I/O).
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace gsvt
