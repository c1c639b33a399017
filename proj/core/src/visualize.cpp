#include "vtn/visualize.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "vtn/sampling.hpp"

namespace vtn {

namespace {

// 55 hues: ramps between red, yellow, green, cyan, blue, magenta, red.
struct Wheel {
  static constexpr int kRY = 15, kYG = 6, kGC = 4, kCB = 11, kBM = 13, kMR = 6;
  static constexpr int kCols = kRY + kYG + kGC + kCB + kBM + kMR;
  std::array<std::array<double, 3>, kCols> rgb{};

  Wheel() {
    int k = 0;
    for (int i = 0; i < kRY; ++i, ++k)
      rgb[k] = {1.0, static_cast<double>(i) / kRY, 0.0};
    for (int i = 0; i < kYG; ++i, ++k)
      rgb[k] = {1.0 - static_cast<double>(i) / kYG, 1.0, 0.0};
    for (int i = 0; i < kGC; ++i, ++k)
      rgb[k] = {0.0, 1.0, static_cast<double>(i) / kGC};
    for (int i = 0; i < kCB; ++i, ++k)
      rgb[k] = {0.0, 1.0 - static_cast<double>(i) / kCB, 1.0};
    for (int i = 0; i < kBM; ++i, ++k)
      rgb[k] = {static_cast<double>(i) / kBM, 0.0, 1.0};
    for (int i = 0; i < kMR; ++i, ++k)
      rgb[k] = {1.0, 0.0, 1.0 - static_cast<double>(i) / kMR};
  }
};

const Wheel& wheel() {
  static const Wheel w;
  return w;
}

}  // namespace

double resolved_max_magnitude(const FlowField& flow, double max_mag) {
  if (max_mag > 0.0) return max_mag;
  std::vector<double> mags;
  mags.reserve(flow.pixels());
  for (std::size_t i = 0; i < flow.pixels(); ++i)
    mags.push_back(std::hypot(flow.u_data()[i], flow.v_data()[i]));
  const double p = percentile(std::move(mags), 99.0);
  return p > 0.0 ? p : 1.0;
}

Image flow_to_color(const FlowField& flow, double max_mag) {
  const int w = flow.width(), h = flow.height();
  max_mag = resolved_max_magnitude(flow, max_mag);

  const Wheel& cw = wheel();
  Image out(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fu = flow.u(x, y) / max_mag;
      const double fv = flow.v(x, y) / max_mag;
      const double rad = std::hypot(fu, fv);
      const double angle = std::atan2(-fv, -fu) / std::numbers::pi;  // [-1, 1]
      const double fk = (angle + 1.0) / 2.0 * (Wheel::kCols - 1);
      int k0 = static_cast<int>(std::floor(fk));
      if (k0 >= Wheel::kCols) k0 = Wheel::kCols - 1;
      const int k1 = (k0 + 1) % Wheel::kCols;
      const double f = fk - k0;
      for (int c = 0; c < 3; ++c) {
        double col = (1.0 - f) * cw.rgb[k0][c] + f * cw.rgb[k1][c];
        if (rad <= 1.0)
          col = 1.0 - rad * (1.0 - col);  // desaturate small motion
        else
          col *= 0.75;  // out of range
        out.at(x, y, c) = col;
      }
    }
  return out;
}

}  // namespace vtn
