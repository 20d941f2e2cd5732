#include "gsvt/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace gsvt {

namespace {

// ---- deterministic serialization helpers ----

void put(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

void put(std::string& s, int v) { s += std::to_string(v); }
void put(std::string& s, std::uint64_t v) { s += std::to_string(v); }
void put(std::string& s, bool v) { s += v ? "true" : "false"; }

template <class Vec>
void put_vec(std::string& s, const Vec& v, int n) {
  s += '[';
  for (int i = 0; i < n; ++i) {
    if (i) s += ',';
    put(s, static_cast<double>(v[i]));
  }
  s += ']';
}

void put_mat3(std::string& s, const Mat3& m) {
  s += '[';
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (r || c) s += ',';
      put(s, m(r, c));
    }
  s += ']';
}

// ---- parsing helpers (nlohmann used for reading only) ----

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("not valid structured text");
  return j;
}

const json& member(const json& j, const char* key) {
  if (!j.is_object()) throw FormatError("expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing key: ") + key);
  return *it;
}

double as_num(const json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + " must be a number");
  return j.get<double>();
}

int as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw FormatError(std::string(what) + " must be an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const char* what) {
  if (!j.is_boolean()) throw FormatError(std::string(what) + " must be a boolean");
  return j.get<bool>();
}

template <class Vec>
Vec as_vec(const json& j, int n, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw FormatError(std::string(what) + " must be an array of " + std::to_string(n));
  Vec v;
  for (int i = 0; i < n; ++i) v[i] = as_num(j[i], what);
  return v;
}

Mat3 as_mat3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 9)
    throw FormatError(std::string(what) + " must be an array of 9");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = as_num(j[3 * r + c], what);
  return m;
}

} // namespace

// ---- PPM ----

std::string encode_ppm(const Image& image) {
  if (image.channels != 3) throw FormatError("frames must have 3 channels");
  if (image.width < 1 || image.height < 1) throw FormatError("empty frame");
  std::string out = "P6\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + static_cast<size_t>(image.width) * image.height * 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const long v = std::lround(255.0 * image.at(y, x, c));
        out += static_cast<char>(std::min(255L, std::max(0L, v)));
      }
  return out;
}

Image decode_ppm(const std::string& bytes) {
  size_t pos = 0;
  auto token = [&]() -> std::string {
    // whitespace and '#' comments separate header tokens
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
      ++pos;
    if (start == pos) throw FormatError("truncated header");
    return bytes.substr(start, pos - start);
  };

  if (token() != "P6") throw FormatError("not a binary P6 file");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw FormatError("malformed header");
  }
  if (w < 1 || h < 1) throw FormatError("degenerate size");
  if (maxval != 255) throw FormatError("only 8-bit frames are supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw FormatError("malformed header");
  ++pos; // single whitespace byte before the payload

  const size_t need = static_cast<size_t>(w) * h * 3;
  if (bytes.size() - pos < need) throw FormatError("truncated pixel payload");
  Image img(h, w, 3);
  for (size_t i = 0; i < need; ++i)
    img.data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return img;
}

void write_ppm(const std::string& path, const Image& image) {
  write_text_file(path, encode_ppm(image));
}

Image read_ppm(const std::string& path) {
  try {
    return decode_ppm(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.ppm", index);
  return buf;
}

void write_frames(const std::string& dir, const Video& video) {
  fs::create_directories(dir);
  for (size_t t = 0; t < video.size(); ++t)
    write_ppm((fs::path(dir) / frame_filename(static_cast<int>(t))).string(), video[t]);
}

Video read_frames(const std::string& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir + ": not a directory");
  int max_index = -1;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 10 || name.rfind("frame_", 0) != 0 ||
        name.substr(name.size() - 4) != ".ppm")
      continue;
    const std::string digits = name.substr(6, name.size() - 10);
    if (digits.empty() || digits.size() > 9 ||
        digits.find_first_not_of("0123456789") != std::string::npos)
      continue;
    max_index = std::max(max_index, std::stoi(digits));
  }
  if (max_index < 0) throw FormatError(dir + ": no frame files");

  Video video;
  for (int t = 0; t <= max_index; ++t) {
    const std::string path = (fs::path(dir) / frame_filename(t)).string();
    if (!fs::exists(path)) throw FormatError(path + ": missing from the sequence");
    Image img = read_ppm(path);
    if (!video.empty() && !img.same_shape(video.front()))
      throw FormatError(path + ": size differs from the first frame");
    video.push_back(std::move(img));
  }
  return video;
}

// ---- trajectory files ----

std::string serialize_trajectory(const TrajectoryFile& f) {
  const int n = f.trajectory.gaussian_count();
  const int k = f.trajectory.frame_count();
  std::string s = "{\n\"version\":";
  put(s, f.version);
  s += ",\n\"width\":";
  put(s, f.camera.width);
  s += ",\"height\":";
  put(s, f.camera.height);
  s += ",\"k\":";
  put(s, k);
  s += ",\"n\":";
  put(s, n);
  s += ",\n\"camera\":{\"fx\":";
  put(s, f.camera.fx);
  s += ",\"fy\":";
  put(s, f.camera.fy);
  s += ",\"cx\":";
  put(s, f.camera.cx);
  s += ",\"cy\":";
  put(s, f.camera.cy);
  s += ",\"rot\":";
  put_mat3(s, f.camera.rot);
  s += ",\"trans\":";
  put_vec(s, f.camera.trans, 3);
  s += "},\n\"gaussians\":[\n";
  for (int i = 0; i < n; ++i) {
    const Gaussian& g = f.trajectory.g0[i];
    if (i) s += ",\n";
    s += "{\"mu\":";
    put_vec(s, g.mu, 3);
    s += ",\"s\":";
    put_vec(s, g.s, 3);
    s += ",\"phi\":";
    put_vec(s, g.phi, 4);
    s += ",\"r\":";
    put_vec(s, g.r, 3);
    s += ",\"o\":";
    put(s, g.o);
    s += '}';
  }
  s += "\n],\n\"deltas\":[\n";
  for (int t = 0; t + 1 < k; ++t) {
    if (t) s += ",\n";
    s += '[';
    for (int i = 0; i < n; ++i) {
      const GaussianDelta& d = f.trajectory.deltas[t][i];
      if (i) s += ',';
      s += "{\"dmu\":";
      put_vec(s, d.dmu, 3);
      s += ",\"dr\":";
      put_vec(s, d.dr, 3);
      s += '}';
    }
    s += ']';
  }
  s += "\n]\n}\n";
  return s;
}

TrajectoryFile parse_trajectory(const std::string& text) {
  const json j = parse_json(text);
  TrajectoryFile f;
  f.version = as_int(member(j, "version"), "version");
  f.camera.width = as_int(member(j, "width"), "width");
  f.camera.height = as_int(member(j, "height"), "height");
  const int k = as_int(member(j, "k"), "k");
  const int n = as_int(member(j, "n"), "n");
  if (k < 1 || n < 0) throw FormatError("k must be >= 1 and n >= 0");

  const json& cam = member(j, "camera");
  f.camera.fx = as_num(member(cam, "fx"), "fx");
  f.camera.fy = as_num(member(cam, "fy"), "fy");
  f.camera.cx = as_num(member(cam, "cx"), "cx");
  f.camera.cy = as_num(member(cam, "cy"), "cy");
  f.camera.rot = as_mat3(member(cam, "rot"), "rot");
  f.camera.trans = as_vec<Vec3>(member(cam, "trans"), 3, "trans");

  const json& gs = member(j, "gaussians");
  if (!gs.is_array() || static_cast<int>(gs.size()) != n)
    throw FormatError("gaussian count does not match n");
  f.trajectory.g0.resize(n);
  for (int i = 0; i < n; ++i) {
    const json& g = gs[i];
    Gaussian& out = f.trajectory.g0[i];
    out.mu = as_vec<Vec3>(member(g, "mu"), 3, "mu");
    out.s = as_vec<Vec3>(member(g, "s"), 3, "s");
    out.phi = as_vec<Vec4>(member(g, "phi"), 4, "phi");
    out.r = as_vec<Vec3>(member(g, "r"), 3, "r");
    out.o = as_num(member(g, "o"), "o");
  }

  const json& ds = member(j, "deltas");
  if (!ds.is_array() || static_cast<int>(ds.size()) != k - 1)
    throw FormatError("delta row count does not match k");
  f.trajectory.deltas.assign(k - 1, std::vector<GaussianDelta>(n));
  for (int t = 0; t + 1 < k; ++t) {
    const json& row = ds[t];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw FormatError("delta row " + std::to_string(t) + " does not match n");
    for (int i = 0; i < n; ++i) {
      f.trajectory.deltas[t][i].dmu = as_vec<Vec3>(member(row[i], "dmu"), 3, "dmu");
      f.trajectory.deltas[t][i].dr = as_vec<Vec3>(member(row[i], "dr"), 3, "dr");
    }
  }
  return f;
}

// ---- track files ----

std::string serialize_tracks(const TrackFile& f) {
  std::string s = "{\n\"version\":";
  put(s, f.version);
  s += ",\"k\":";
  put(s, f.k);
  s += ",\"top_k\":";
  put(s, f.top_k);
  s += ",\"tau_vis\":";
  put(s, f.tau_vis);
  s += ",\"beta\":";
  put(s, f.beta);
  s += ",\"eps\":";
  put(s, f.eps);
  s += ",\"normalize_flow\":";
  put(s, f.normalize_flow);
  s += ",\n\"queries\":[\n";
  for (size_t i = 0; i < f.tracks.size(); ++i) {
    const Track& tr = f.tracks[i];
    if (i) s += ",\n";
    s += "{\"t\":";
    put(s, tr.query.t);
    s += ",\"x\":";
    put(s, tr.query.p.x());
    s += ",\"y\":";
    put(s, tr.query.p.y());
    s += ",\"gt\":";
    put(s, tr.gt_index);
    s += '}';
  }
  s += "\n],\n\"tracks\":[\n";
  for (size_t i = 0; i < f.tracks.size(); ++i) {
    const Track& tr = f.tracks[i];
    if (i) s += ",\n";
    s += '[';
    for (int t = 0; t < static_cast<int>(tr.points.size()); ++t) {
      if (t) s += ',';
      s += "{\"x\":";
      put(s, tr.points[t].x());
      s += ",\"y\":";
      put(s, tr.points[t].y());
      s += ",\"visible\":";
      put(s, static_cast<bool>(tr.visible[t]));
      s += '}';
    }
    s += ']';
  }
  s += "\n]\n}\n";
  return s;
}

TrackFile parse_tracks(const std::string& text) {
  const json j = parse_json(text);
  TrackFile f;
  f.version = as_int(member(j, "version"), "version");
  f.k = as_int(member(j, "k"), "k");
  if (f.k < 1) throw FormatError("k must be >= 1");
  f.top_k = as_int(member(j, "top_k"), "top_k");
  f.tau_vis = as_num(member(j, "tau_vis"), "tau_vis");
  f.beta = as_num(member(j, "beta"), "beta");
  f.eps = as_num(member(j, "eps"), "eps");
  f.normalize_flow = as_bool(member(j, "normalize_flow"), "normalize_flow");

  const json& qs = member(j, "queries");
  const json& ts = member(j, "tracks");
  if (!qs.is_array() || !ts.is_array() || qs.size() != ts.size())
    throw FormatError("queries and tracks must be arrays of equal length");
  f.tracks.resize(qs.size());
  for (size_t i = 0; i < qs.size(); ++i) {
    Track& tr = f.tracks[i];
    tr.query.t = as_int(member(qs[i], "t"), "t");
    tr.query.p = Vec2(as_num(member(qs[i], "x"), "x"), as_num(member(qs[i], "y"), "y"));
    tr.gt_index = as_int(member(qs[i], "gt"), "gt");
    const json& row = ts[i];
    if (!row.is_array() || static_cast<int>(row.size()) != f.k)
      throw FormatError("track " + std::to_string(i) + " does not have k records");
    tr.points.resize(f.k);
    tr.visible.resize(f.k);
    for (int t = 0; t < f.k; ++t) {
      tr.points[t] = Vec2(as_num(member(row[t], "x"), "x"),
                          as_num(member(row[t], "y"), "y"));
      tr.visible[t] = as_bool(member(row[t], "visible"), "visible");
    }
  }
  return f;
}

// ---- ground-truth files ----

std::string serialize_ground_truth(const GroundTruthFile& f) {
  std::string s = "{\n\"version\":";
  put(s, f.version);
  s += ",\"width\":";
  put(s, f.width);
  s += ",\"height\":";
  put(s, f.height);
  s += ",\"k\":";
  put(s, f.k);
  s += ",\"n\":";
  put(s, static_cast<int>(f.tracks.size()));
  s += ",\n\"tracks\":[\n";
  for (size_t i = 0; i < f.tracks.size(); ++i) {
    const GroundTruthTrack& tr = f.tracks[i];
    if (i) s += ",\n";
    s += '[';
    for (int t = 0; t < tr.frame_count(); ++t) {
      if (t) s += ',';
      s += "{\"x\":";
      put(s, tr.points[t].x());
      s += ",\"y\":";
      put(s, tr.points[t].y());
      s += ",\"visible\":";
      put(s, static_cast<bool>(tr.visible[t]));
      s += '}';
    }
    s += ']';
  }
  s += "\n]\n}\n";
  return s;
}

GroundTruthFile parse_ground_truth(const std::string& text) {
  const json j = parse_json(text);
  GroundTruthFile f;
  f.version = as_int(member(j, "version"), "version");
  f.width = as_int(member(j, "width"), "width");
  f.height = as_int(member(j, "height"), "height");
  f.k = as_int(member(j, "k"), "k");
  const int n = as_int(member(j, "n"), "n");
  if (f.k < 1 || n < 0) throw FormatError("k must be >= 1 and n >= 0");
  const json& ts = member(j, "tracks");
  if (!ts.is_array() || static_cast<int>(ts.size()) != n)
    throw FormatError("track count does not match n");
  f.tracks.resize(n);
  for (int i = 0; i < n; ++i) {
    const json& row = ts[i];
    if (!row.is_array() || static_cast<int>(row.size()) != f.k)
      throw FormatError("track " + std::to_string(i) + " does not have k records");
    f.tracks[i].points.resize(f.k);
    f.tracks[i].visible.resize(f.k);
    for (int t = 0; t < f.k; ++t) {
      f.tracks[i].points[t] = Vec2(as_num(member(row[t], "x"), "x"),
                                   as_num(member(row[t], "y"), "y"));
      f.tracks[i].visible[t] = as_bool(member(row[t], "visible"), "visible");
    }
  }
  return f;
}

// ---- scene files ----

std::string serialize_scene(const SceneSpec& spec) {
  std::string s = "{\n\"version\":1,\"width\":";
  put(s, spec.width);
  s += ",\"height\":";
  put(s, spec.height);
  s += ",\"k\":";
  put(s, spec.k);
  s += ",\"seed\":";
  put(s, spec.seed);
  s += ",\"background\":";
  put_vec(s, spec.background, 3);
  s += ",\n\"blobs\":[\n";
  for (size_t i = 0; i < spec.blobs.size(); ++i) {
    const BlobSpec& b = spec.blobs[i];
    if (i) s += ",\n";
    s += "{\"position\":";
    put_vec(s, b.position, 3);
    s += ",\"scale\":";
    put(s, b.scale);
    s += ",\"color\":";
    put_vec(s, b.color, 3);
    s += ",\"opacity\":";
    put(s, b.opacity);
    s += ",\"velocities\":[";
    for (size_t t = 0; t < b.velocities.size(); ++t) {
      if (t) s += ',';
      put_vec(s, b.velocities[t], 3);
    }
    s += "],\"color_velocities\":[";
    for (size_t t = 0; t < b.color_velocities.size(); ++t) {
      if (t) s += ',';
      put_vec(s, b.color_velocities[t], 3);
    }
    s += "]}";
  }
  s += "\n]\n}\n";
  return s;
}

SceneSpec parse_scene(const std::string& text) {
  const json j = parse_json(text);
  SceneSpec spec;
  spec.width = as_int(member(j, "width"), "width");
  spec.height = as_int(member(j, "height"), "height");
  spec.k = as_int(member(j, "k"), "k");
  const json& seed = member(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw FormatError("seed must be an integer");
  spec.seed = seed.get<std::uint64_t>();
  spec.background = as_vec<Vec3>(member(j, "background"), 3, "background");
  const json& bs = member(j, "blobs");
  if (!bs.is_array()) throw FormatError("blobs must be an array");
  spec.blobs.resize(bs.size());
  for (size_t i = 0; i < bs.size(); ++i) {
    BlobSpec& b = spec.blobs[i];
    b.position = as_vec<Vec3>(member(bs[i], "position"), 3, "position");
    b.scale = as_num(member(bs[i], "scale"), "scale");
    b.color = as_vec<Vec3>(member(bs[i], "color"), 3, "color");
    b.opacity = as_num(member(bs[i], "opacity"), "opacity");
    for (const char* key : {"velocities", "color_velocities"}) {
      const json& arr = member(bs[i], key);
      if (!arr.is_array()) throw FormatError(std::string(key) + " must be an array");
      auto& dst = key[0] == 'v' ? b.velocities : b.color_velocities;
      dst.resize(arr.size());
      for (size_t t = 0; t < arr.size(); ++t) dst[t] = as_vec<Vec3>(arr[t], 3, key);
    }
  }
  return spec;
}

// ---- report files ----

std::string serialize_eval_report(const EvalReport& r) {
  std::string s = "{\"version\":1,\"aj\":";
  put(s, r.aj);
  s += ",\"delta_avg\":";
  put(s, r.delta_avg);
  s += ",\"oa\":";
  put(s, r.oa);
  s += ",\"pairs\":";
  put(s, r.pairs);
  s += "}\n";
  return s;
}

EvalReport parse_eval_report(const std::string& text) {
  const json j = parse_json(text);
  EvalReport r;
  r.aj = as_num(member(j, "aj"), "aj");
  r.delta_avg = as_num(member(j, "delta_avg"), "delta_avg");
  r.oa = as_num(member(j, "oa"), "oa");
  r.pairs = as_int(member(j, "pairs"), "pairs");
  return r;
}

std::string serialize_fit_report(const FitReport& r) {
  std::string s = "{\"version\":1,\"final_loss\":";
  put(s, r.final_loss);
  s += ",\"psnr_per_frame\":[";
  for (size_t t = 0; t < r.psnr_per_frame.size(); ++t) {
    if (t) s += ',';
    if (std::isfinite(r.psnr_per_frame[t]))
      put(s, r.psnr_per_frame[t]);
    else
      s += "null"; // lossless frames have no finite PSNR
  }
  s += "],\"wall_seconds\":";
  put(s, r.wall_seconds);
  s += ",\"seed\":";
  put(s, r.seed);
  s += ",\"iterations\":";
  put(s, r.iterations);
  s += "}\n";
  return s;
}

FitReport parse_fit_report(const std::string& text) {
  const json j = parse_json(text);
  FitReport r;
  r.final_loss = as_num(member(j, "final_loss"), "final_loss");
  const json& ps = member(j, "psnr_per_frame");
  if (!ps.is_array()) throw FormatError("psnr_per_frame must be an array");
  for (const json& v : ps)
    r.psnr_per_frame.push_back(v.is_null() ? std::numeric_limits<double>::infinity()
                                           : as_num(v, "psnr_per_frame"));
  r.wall_seconds = as_num(member(j, "wall_seconds"), "wall_seconds");
  const json& seed = member(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw FormatError("seed must be an integer");
  r.seed = seed.get<std::uint64_t>();
  r.iterations = as_int(member(j, "iterations"), "iterations");
  return r;
}

// ---- raw file helpers ----

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error(path + ": read failed");
  return ss.str();
}

} // namespace gsvt
