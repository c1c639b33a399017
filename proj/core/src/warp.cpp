#include "vtn/warp.hpp"

#include <algorithm>
#include <cmath>

#include "vtn/parallel.hpp"

namespace vtn {

namespace {

struct Tap {
  int x0, x1, y0, y1;
  double fx, fy;
  bool clamped_x, clamped_y;
};

inline Tap make_tap(int w, int h, double sx, double sy) {
  Tap t;
  t.clamped_x = sx < 0.0 || sx > w - 1;
  t.clamped_y = sy < 0.0 || sy > h - 1;
  const double cx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
  const double cy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
  t.x0 = static_cast<int>(std::floor(cx));
  t.y0 = static_cast<int>(std::floor(cy));
  if (t.x0 > w - 1) t.x0 = w - 1;
  if (t.y0 > h - 1) t.y0 = h - 1;
  t.x1 = std::min(t.x0 + 1, w - 1);
  t.y1 = std::min(t.y0 + 1, h - 1);
  t.fx = cx - t.x0;
  t.fy = cy - t.y0;
  return t;
}

inline void check_coords(double sx, double sy) {
  if (!std::isfinite(sx) || !std::isfinite(sy))
    throw std::invalid_argument("bilinear sample: non-finite coordinates");
}

}  // namespace

double bilinear_sample(const Image& img, double x, double y, int channel) {
  check_coords(x, y);
  if (channel < 0 || channel >= img.channels())
    throw std::invalid_argument("bilinear_sample: channel out of range");
  const Tap t = make_tap(img.width(), img.height(), x, y);
  const double p00 = img.at(t.x0, t.y0, channel);
  const double p10 = img.at(t.x1, t.y0, channel);
  const double p01 = img.at(t.x0, t.y1, channel);
  const double p11 = img.at(t.x1, t.y1, channel);
  return (1.0 - t.fy) * ((1.0 - t.fx) * p00 + t.fx * p10) +
         t.fy * ((1.0 - t.fx) * p01 + t.fx * p11);
}

Image inverse_warp(const Image& target, const FlowField& flow) {
  if (target.width() != flow.width() || target.height() != flow.height())
    throw ShapeError("inverse_warp: image and flow dimensions differ");
  const int w = target.width(), h = target.height(), nc = target.channels();
  Image out(w, h, nc);
  parallel_blocks(h, [&](int yb, int ye) {
    for (int y = yb; y < ye; ++y) {
      for (int x = 0; x < w; ++x) {
        const double sx = x + flow.u(x, y);
        const double sy = y + flow.v(x, y);
        check_coords(sx, sy);
        const Tap t = make_tap(w, h, sx, sy);
        const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
        const double w10 = t.fx * (1.0 - t.fy);
        const double w01 = (1.0 - t.fx) * t.fy;
        const double w11 = t.fx * t.fy;
        for (int c = 0; c < nc; ++c) {
          out.at(x, y, c) = w00 * target.at(t.x0, t.y0, c) +
                            w10 * target.at(t.x1, t.y0, c) +
                            w01 * target.at(t.x0, t.y1, c) +
                            w11 * target.at(t.x1, t.y1, c);
        }
      }
    }
  });
  return out;
}

WarpJacobian warp_jacobian(const Image& target, const FlowField& flow) {
  if (target.width() != flow.width() || target.height() != flow.height())
    throw ShapeError("warp_jacobian: image and flow dimensions differ");
  const int w = target.width(), h = target.height(), nc = target.channels();
  WarpJacobian jac{Grid(w, h, nc), Grid(w, h, nc)};
  parallel_blocks(h, [&](int yb, int ye) {
    for (int y = yb; y < ye; ++y) {
      for (int x = 0; x < w; ++x) {
        const double sx = x + flow.u(x, y);
        const double sy = y + flow.v(x, y);
        check_coords(sx, sy);
        const Tap t = make_tap(w, h, sx, sy);
        for (int c = 0; c < nc; ++c) {
          const double p00 = target.at(t.x0, t.y0, c);
          const double p10 = target.at(t.x1, t.y0, c);
          const double p01 = target.at(t.x0, t.y1, c);
          const double p11 = target.at(t.x1, t.y1, c);
          jac.du.at(x, y, c) =
              t.clamped_x ? 0.0
                          : (1.0 - t.fy) * (p10 - p00) + t.fy * (p11 - p01);
          jac.dv.at(x, y, c) =
              t.clamped_y ? 0.0
                          : (1.0 - t.fx) * (p01 - p00) + t.fx * (p11 - p10);
        }
      }
    }
  });
  return jac;
}

LabelMap nn_warp_labels(const LabelMap& labels, const FlowField& flow) {
  if (labels.width() != flow.width() || labels.height() != flow.height())
    throw ShapeError("nn_warp_labels: labels and flow dimensions differ");
  const int w = labels.width(), h = labels.height();
  LabelMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = x + flow.u(x, y);
      const double sy = y + flow.v(x, y);
      check_coords(sx, sy);
      const long rx = std::lround(sx);
      const long ry = std::lround(sy);
      out.at(x, y) = (rx >= 0 && rx < w && ry >= 0 && ry < h)
                         ? labels.at(static_cast<int>(rx), static_cast<int>(ry))
                         : LabelMap::kVoid;
    }
  }
  return out;
}

QuantizedFlow flow_normalize(const FlowField& flow, double cap) {
  if (!(cap > 0.0) || !std::isfinite(cap))
    throw std::invalid_argument("flow_normalize: cap must be positive");
  QuantizedFlow q;
  q.width = flow.width();
  q.height = flow.height();
  const std::size_t n = flow.pixels();
  q.u.resize(n);
  q.v.resize(n);
  auto quantize = [cap](double x) -> std::uint8_t {
    if (!std::isfinite(x)) throw NumericError("flow_normalize: non-finite flow");
    const double clipped = std::clamp(x, -cap, cap);
    return static_cast<std::uint8_t>(
        std::floor((clipped + cap) / (2.0 * cap) * 255.0 + 0.5));
  };
  for (std::size_t i = 0; i < n; ++i) {
    q.u[i] = quantize(flow.u_data()[i]);
    q.v[i] = quantize(flow.v_data()[i]);
  }
  return q;
}

}  // namespace vtn
