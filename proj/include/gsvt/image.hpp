#pragma once

#include <cassert>
#include <cmath>
#include <vector>

namespace gsvt {

/// Dense H x W x C grid of doubles, row-major with interleaved channels.
struct Image {
  int height = 0, width = 0, channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double* px(int y, int x) {
    return data.data() + (static_cast<size_t>(y) * width + x) * channels;
  }
  const double* px(int y, int x) const {
    return data.data() + (static_cast<size_t>(y) * width + x) * channels;
  }
  bool same_shape(const Image& other) const {
    return height == other.height && width == other.width &&
           channels == other.channels;
  }
};

using Video = std::vector<Image>;

/// The shared stencil behind every bilinear lookup, so all call sites agree
/// bit-for-bit. `fetch(y, x)` is consulted only for in-grid nodes; out-of-grid
/// nodes contribute zero.
template <class Fetch>
double bilinear_padded_fetch(int height, int width, double x, double y, Fetch&& fetch) {
  if (!(std::isfinite(x) && std::isfinite(y))) return 0.0;
  const double xf = std::floor(x), yf = std::floor(y);
  const int x0 = static_cast<int>(xf), y0 = static_cast<int>(yf);
  const double tx = x - xf, ty = y - yf;
  auto node = [&](int yy, int xx) -> double {
    if (yy < 0 || yy >= height || xx < 0 || xx >= width) return 0.0;
    return fetch(yy, xx);
  };
  const double top = (1.0 - tx) * node(y0, x0) + tx * node(y0, x0 + 1);
  const double bot = (1.0 - tx) * node(y0 + 1, x0) + tx * node(y0 + 1, x0 + 1);
  return (1.0 - ty) * top + ty * bot;
}

/// Bilinear sample of channel c at continuous (x, y), with the grid
/// zero-padded outside [0, W-1] x [0, H-1]. Exact at integer nodes.
inline double bilinear_padded(const Image& img, int c, double x, double y) {
  return bilinear_padded_fetch(img.height, img.width, x, y,
                               [&](int yy, int xx) { return img.at(yy, xx, c); });
}

} // namespace gsvt
