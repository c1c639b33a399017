#include "vtn/occlusion.hpp"

#include <algorithm>
#include <cmath>

namespace vtn {

namespace {

// Bilinear lookup on a flow plane with clamp-to-edge, mirroring the image
// sampler but without the [0,1] range constraint.
inline double sample_plane(const double* plane, int w, int h, double sx,
                           double sy) {
  const double cx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
  const double cy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
  int x0 = static_cast<int>(std::floor(cx));
  int y0 = static_cast<int>(std::floor(cy));
  x0 = std::min(x0, w - 1);
  y0 = std::min(y0, h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = cx - x0, fy = cy - y0;
  auto id = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  return (1.0 - fy) * ((1.0 - fx) * plane[id(x0, y0)] + fx * plane[id(x1, y0)]) +
         fy * ((1.0 - fx) * plane[id(x0, y1)] + fx * plane[id(x1, y1)]);
}

void check_pair(const FlowField& a, const FlowField& b, const char* what) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(what) + ": flow shapes differ");
}

}  // namespace

FlowField backward_at_forward(const FlowField& forward,
                              const FlowField& backward) {
  check_pair(forward, backward, "backward_at_forward");
  const int w = forward.width(), h = forward.height();
  FlowField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double sx = x + forward.u(x, y);
      const double sy = y + forward.v(x, y);
      if (!std::isfinite(sx) || !std::isfinite(sy))
        throw std::invalid_argument("backward_at_forward: non-finite flow");
      out.u(x, y) = sample_plane(backward.u_data(), w, h, sx, sy);
      out.v(x, y) = sample_plane(backward.v_data(), w, h, sx, sy);
    }
  return out;
}

Mask occlusion_mask(const FlowField& forward, const FlowField& backward,
                    double alpha1, double alpha2) {
  check_pair(forward, backward, "occlusion_mask");
  if (!std::isfinite(alpha1) || !std::isfinite(alpha2) || alpha1 < 0.0 ||
      alpha2 < 0.0)
    throw std::invalid_argument("occlusion_mask: alphas must be finite and >= 0");
  const FlowField back = backward_at_forward(forward, backward);
  const int w = forward.width(), h = forward.height();
  Mask mask(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fu = forward.u(x, y), fv = forward.v(x, y);
      const double bu = back.u(x, y), bv = back.v(x, y);
      const double su = fu + bu, sv = fv + bv;
      const double lhs = su * su + sv * sv;
      const double rhs = alpha1 * (fu * fu + fv * fv + bu * bu + bv * bv) + alpha2;
      mask.at(x, y) = lhs >= rhs ? 1 : 0;
    }
  return mask;
}

OcclusionAwareLoss occlusion_aware_loss(const Grid& forward_loss_map,
                                        const Grid& backward_loss_map,
                                        const Mask& forward_occ,
                                        const Mask& backward_occ) {
  auto check = [](const Grid& m, const Mask& o, const char* what) {
    if (m.channels() != 1)
      throw std::invalid_argument(std::string(what) + ": loss map must have one channel");
    if (m.width() != o.width() || m.height() != o.height())
      throw ShapeError(std::string(what) + ": map and mask shapes differ");
  };
  check(forward_loss_map, forward_occ, "occlusion_aware_loss");
  check(backward_loss_map, backward_occ, "occlusion_aware_loss");

  auto masked_mean = [](const Grid& m, const Mask& o, double* term) -> bool {
    double total = 0.0;
    std::size_t counted = 0;
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x)
        if (!o.at(x, y)) {
          total += m.at(x, y);
          counted++;
        }
    if (counted == 0) {
      *term = 0.0;
      return true;
    }
    *term = total / counted;
    return false;
  };

  OcclusionAwareLoss out;
  out.forward_all_occluded = masked_mean(forward_loss_map, forward_occ, &out.forward_term);
  out.backward_all_occluded = masked_mean(backward_loss_map, backward_occ, &out.backward_term);
  out.value = out.forward_term + out.backward_term;
  return out;
}

}  // namespace vtn
