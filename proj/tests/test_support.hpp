#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "vtn/grid.hpp"
#include "vtn/rng.hpp"

namespace ts {

inline vtn::Image random_image(int w, int h, int c, vtn::Rng& rng) {
  vtn::Image img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) img.at(x, y, k) = rng.uniform01();
  return img;
}

// Box-blurred noise: per-pixel gradients exist almost everywhere but the
// texture is smooth enough for local descent to make progress.
inline vtn::Image smooth_random_image(int w, int h, int c, vtn::Rng& rng,
                                      int passes = 2) {
  vtn::Image img = random_image(w, h, c, rng);
  for (int p = 0; p < passes; ++p) {
    vtn::Image next(w, h, c);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int k = 0; k < c; ++k) {
          double sum = 0.0;
          int n = 0;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx, yy = y + dy;
              if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
              sum += img.at(xx, yy, k);
              ++n;
            }
          next.at(x, y, k) = sum / n;
        }
    img = std::move(next);
  }
  return img;
}

inline vtn::FlowField random_flow(int w, int h, double amp, vtn::Rng& rng) {
  vtn::FlowField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.u(x, y) = amp * (2.0 * rng.uniform01() - 1.0);
      f.v(x, y) = amp * (2.0 * rng.uniform01() - 1.0);
    }
  return f;
}

inline vtn::Image random_image(int w, int h, int c, std::uint64_t seed) {
  vtn::Rng rng(seed);
  return random_image(w, h, c, rng);
}

inline vtn::Image smooth_random_image(int w, int h, int c, std::uint64_t seed,
                                      int passes = 2) {
  vtn::Rng rng(seed);
  return smooth_random_image(w, h, c, rng, passes);
}

inline vtn::FlowField random_flow(int w, int h, std::uint64_t seed,
                                  double amp) {
  vtn::Rng rng(seed);
  return random_flow(w, h, amp, rng);
}

inline vtn::FlowField constant_flow(int w, int h, double u, double v) {
  vtn::FlowField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.u(x, y) = u;
      f.v(x, y) = v;
    }
  return f;
}

// out(x, y) = in(x - dx, y - dy), clamped: the second frame of a
// translation pair whose true flow (frame 1 -> frame 2) is (dx, dy).
inline vtn::Image shift_image(const vtn::Image& in, int dx, int dy) {
  vtn::Image out(in.width(), in.height(), in.channels());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      const int sx = std::clamp(x - dx, 0, in.width() - 1);
      const int sy = std::clamp(y - dy, 0, in.height() - 1);
      for (int k = 0; k < in.channels(); ++k)
        out.at(x, y, k) = in.at(sx, sy, k);
    }
  return out;
}

// Symmetric relative l-inf distance between a computed gradient and its
// finite-difference estimate.
inline double rel_linf(const std::vector<double>& got,
                       const std::vector<double>& want) {
  double diff = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    diff = std::max(diff, std::abs(got[i] - want[i]));
    mag = std::max({mag, std::abs(got[i]), std::abs(want[i])});
  }
  return diff / (mag + 1e-12);
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("vtn_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace ts
