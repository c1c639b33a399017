#pragma once

#include <cstdint>
#include <vector>

#include "vtn/grid.hpp"

namespace vtn {

// Bilinear lookup of one channel at real-valued (x, y). Coordinates clamp
// to the border (so the sample is always defined); non-finite coordinates
// throw std::invalid_argument.
double bilinear_sample(const Image& img, double x, double y, int channel);

// out(x, y, c) = target(x + u(x,y), y + v(x,y), c), bilinear, clamped.
// Zero flow reproduces target bit for bit.
Image inverse_warp(const Image& target, const FlowField& flow);

// Partial derivatives of the warped value with respect to the flow
// components, per pixel and channel. Piecewise constant in each bilinear
// cell; zero where the sampling point is clamped outside the border.
struct WarpJacobian {
  Grid du, dv;
};
WarpJacobian warp_jacobian(const Image& target, const FlowField& flow);

// Nearest-neighbor label pull: source pixel is (round(x+u), round(y+v)).
// Targets outside the grid become kVoid; labels never interpolate.
LabelMap nn_warp_labels(const LabelMap& labels, const FlowField& flow);

// Flow quantized to bytes for storage: components clipped to [-cap, cap]
// and mapped affinely, -cap -> 0, 0 -> 128, +cap -> 255 (round half up).
struct QuantizedFlow {
  int width = 0, height = 0;
  std::vector<std::uint8_t> u, v;
};
QuantizedFlow flow_normalize(const FlowField& flow, double cap = 20.0);

}  // namespace vtn
