#include "vtn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "vtn/occlusion.hpp"
#include "vtn/warp.hpp"

namespace vtn {

namespace {

std::pair<int, int> level_dims(int w, int h, double scale, int level) {
  for (int i = 0; i < level; ++i) {
    if (scale == 0.5) {
      w /= 2;
      h /= 2;
    } else {
      w = static_cast<int>(std::llround(w * scale));
      h = static_cast<int>(std::llround(h * scale));
    }
  }
  return {w, h};
}

Image downsample(const Image& src, double scale) {
  const auto [w, h] = level_dims(src.width(), src.height(), scale, 1);
  Image out(w, h, src.channels());
  if (scale == 0.5) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < src.channels(); ++c)
          out.at(x, y, c) = 0.25 * (src.at(2 * x, 2 * y, c) +
                                    src.at(2 * x + 1, 2 * y, c) +
                                    src.at(2 * x, 2 * y + 1, c) +
                                    src.at(2 * x + 1, 2 * y + 1, c));
    return out;
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double sx = (x + 0.5) * src.width() / w - 0.5;
      const double sy = (y + 0.5) * src.height() / h - 0.5;
      for (int c = 0; c < src.channels(); ++c)
        out.at(x, y, c) = bilinear_sample(src, sx, sy, c);
    }
  return out;
}

// Bilinear flow upsampling; components rescale with the resolution ratio.
FlowField upsample_flow(const FlowField& src, int w, int h) {
  FlowField out(w, h);
  const double rx = static_cast<double>(w) / src.width();
  const double ry = static_cast<double>(h) / src.height();
  auto sample = [&](const double* plane, double sx, double sy) {
    const double cx = std::clamp(sx, 0.0, static_cast<double>(src.width() - 1));
    const double cy = std::clamp(sy, 0.0, static_cast<double>(src.height() - 1));
    const int x0 = std::min(static_cast<int>(std::floor(cx)), src.width() - 1);
    const int y0 = std::min(static_cast<int>(std::floor(cy)), src.height() - 1);
    const int x1 = std::min(x0 + 1, src.width() - 1);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double fx = cx - x0, fy = cy - y0;
    auto id = [&](int x, int y) {
      return static_cast<std::size_t>(y) * src.width() + x;
    };
    return (1.0 - fy) * ((1.0 - fx) * plane[id(x0, y0)] + fx * plane[id(x1, y0)]) +
           fy * ((1.0 - fx) * plane[id(x0, y1)] + fx * plane[id(x1, y1)]);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double sx = (x + 0.5) / rx - 0.5;
      const double sy = (y + 0.5) / ry - 0.5;
      out.u(x, y) = rx * sample(src.u_data(), sx, sy);
      out.v(x, y) = ry * sample(src.v_data(), sx, sy);
    }
  return out;
}

struct Objective {
  double total = 0.0, pixel = 0.0, smooth = 0.0, ssim_term = 0.0;
  FlowField grad;
};

// Weighted objective at one level. The photometric term can be restricted
// to non-masked pixels (second pass); smoothness always covers the field.
Objective eval_objective(const Image& i1, const Image& i2,
                         const FlowField& flow, const SolverConfig& cfg,
                         bool need_grad, const Mask* data_mask) {
  const LossWeights& w = cfg.weights;
  const int width = i1.width(), height = i1.height(), nc = i1.channels();
  Objective obj;
  if (need_grad) obj.grad = FlowField(width, height);

  const Image warped = inverse_warp(i2, flow);
  WarpJacobian jac;
  if (need_grad) jac = warp_jacobian(i2, flow);

  // Photometric term.
  std::size_t counted = 0;
  double acc = 0.0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (data_mask && data_mask->at(x, y)) continue;
      counted++;
      for (int c = 0; c < nc; ++c)
        acc += charbonnier(i1.at(x, y, c) - warped.at(x, y, c), w.alpha_pixel,
                           w.epsilon);
    }
  const std::size_t denom = counted * nc;
  if (denom > 0) {
    obj.pixel = acc / denom;
    if (need_grad) {
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          if (data_mask && data_mask->at(x, y)) continue;
          double gu = 0.0, gv = 0.0;
          for (int c = 0; c < nc; ++c) {
            const double dr = charbonnier_deriv(
                i1.at(x, y, c) - warped.at(x, y, c), w.alpha_pixel, w.epsilon);
            gu -= dr * jac.du.at(x, y, c);
            gv -= dr * jac.dv.at(x, y, c);
          }
          obj.grad.u(x, y) += w.lambda1 * gu / denom;
          obj.grad.v(x, y) += w.lambda1 * gv / denom;
        }
    }
  }

  // Smoothness term.
  ValueGradFlow sm = smoothness_loss(flow, w, cfg.smooth_order);
  obj.smooth = sm.value;
  if (need_grad)
    for (std::size_t i = 0; i < flow.pixels(); ++i) {
      obj.grad.u_data()[i] += w.lambda2 * sm.grad.u_data()[i];
      obj.grad.v_data()[i] += w.lambda2 * sm.grad.v_data()[i];
    }

  // Patch similarity term, chained through the warp jacobian.
  if (cfg.use_ssim) {
    ValueGradImage ss = ssim_loss(i1, warped);
    obj.ssim_term = ss.value;
    if (need_grad)
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          double gu = 0.0, gv = 0.0;
          for (int c = 0; c < nc; ++c) {
            gu += ss.grad.at(x, y, c) * jac.du.at(x, y, c);
            gv += ss.grad.at(x, y, c) * jac.dv.at(x, y, c);
          }
          obj.grad.u(x, y) += w.lambda3 * gu;
          obj.grad.v(x, y) += w.lambda3 * gv;
        }
  }

  obj.total = w.lambda1 * obj.pixel + w.lambda2 * obj.smooth +
              w.lambda3 * obj.ssim_term;
  return obj;
}

// Descent with backtracking at one level. Appends accepted iterations to
// the trace; objective values never increase within the segment.
FlowField descend(const Image& i1, const Image& i2, FlowField flow,
                  const SolverConfig& cfg, int segment, int* global_iter,
                  std::vector<TraceRow>* trace, const Mask* data_mask) {
  Objective cur = eval_objective(i1, i2, flow, cfg, true, data_mask);
  trace->push_back({segment, (*global_iter)++, cur.total, cur.pixel, cur.smooth,
                    cur.ssim_term});
  double step = cfg.step;
  for (int it = 0; it < cfg.iters_per_level; ++it) {
    double gnorm2 = 0.0;
    for (std::size_t i = 0; i < flow.pixels(); ++i) {
      gnorm2 += cur.grad.u_data()[i] * cur.grad.u_data()[i];
      gnorm2 += cur.grad.v_data()[i] * cur.grad.v_data()[i];
    }
    if (gnorm2 == 0.0) break;

    bool accepted = false;
    FlowField cand(flow.width(), flow.height());
    double s = step;
    for (int half = 0; half <= 20; ++half) {
      for (std::size_t i = 0; i < flow.pixels(); ++i) {
        cand.u_data()[i] = flow.u_data()[i] - s * cur.grad.u_data()[i];
        cand.v_data()[i] = flow.v_data()[i] - s * cur.grad.v_data()[i];
      }
      const Objective next = eval_objective(i1, i2, cand, cfg, false, data_mask);
      if (next.total < cur.total) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) break;

    const double before = cur.total;
    flow = cand;
    cur = eval_objective(i1, i2, flow, cfg, true, data_mask);
    trace->push_back({segment, (*global_iter)++, cur.total, cur.pixel,
                      cur.smooth, cur.ssim_term});
    step = s * 2.0;
    if (before - cur.total < 1e-12 * std::max(1.0, before)) break;
  }
  return flow;
}

std::vector<TraceRow> solve_single(const Image& i1, const Image& i2,
                                   const SolverConfig& cfg, FlowField* out) {
  std::vector<Image> pyr1{i1}, pyr2{i2};
  for (int l = 1; l < cfg.pyramid_levels; ++l) {
    pyr1.push_back(downsample(pyr1.back(), cfg.scale_factor));
    pyr2.push_back(downsample(pyr2.back(), cfg.scale_factor));
  }

  std::vector<TraceRow> trace;
  int global_iter = 0;
  FlowField flow(pyr1.back().width(), pyr1.back().height());
  for (int l = cfg.pyramid_levels - 1; l >= 0; --l) {
    const int segment = cfg.pyramid_levels - 1 - l;  // 0 = coarsest
    if (flow.width() != pyr1[l].width() || flow.height() != pyr1[l].height())
      flow = upsample_flow(flow, pyr1[l].width(), pyr1[l].height());
    flow = descend(pyr1[l], pyr2[l], std::move(flow), cfg, segment,
                   &global_iter, &trace, nullptr);
  }
  *out = std::move(flow);
  return trace;
}

}  // namespace

void SolverConfig::validate(int width, int height) const {
  weights.validate();
  if (pyramid_levels < 1)
    throw std::invalid_argument("SolverConfig: need at least one level");
  if (!(scale_factor > 0.0) || !(scale_factor < 1.0))
    throw std::invalid_argument("SolverConfig: scale factor must be in (0, 1)");
  if (iters_per_level < 1)
    throw std::invalid_argument("SolverConfig: need at least one iteration");
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("SolverConfig: step must be positive");
  if (smooth_order != 1 && smooth_order != 2)
    throw std::invalid_argument("SolverConfig: smoothness order must be 1 or 2");
  const auto [cw, ch] =
      level_dims(width, height, scale_factor, pyramid_levels - 1);
  if (cw < 8 || ch < 8)
    throw std::invalid_argument(
        "SolverConfig: coarsest level drops under 8x8; reduce pyramid_levels");
}

SolveResult solve_flow(const Image& i1, const Image& i2,
                       const SolverConfig& cfg) {
  if (!i1.same_shape(i2)) throw ShapeError("solve_flow: image shapes differ");
  cfg.validate(i1.width(), i1.height());
  SolveResult res;
  res.trace = solve_single(i1, i2, cfg, &res.flow);
  return res;
}

SolveResult solve_bidirectional(const Image& i1, const Image& i2,
                                const SolverConfig& cfg) {
  if (!i1.same_shape(i2))
    throw ShapeError("solve_bidirectional: image shapes differ");
  cfg.validate(i1.width(), i1.height());

  SolveResult res;
  res.trace = solve_single(i1, i2, cfg, &res.flow);
  FlowField backward;
  res.backward_trace = solve_single(i2, i1, cfg, &backward);

  Mask fwd_occ = occlusion_mask(res.flow, backward, cfg.occ_alpha1, cfg.occ_alpha2);
  Mask bwd_occ = occlusion_mask(backward, res.flow, cfg.occ_alpha1, cfg.occ_alpha2);

  if (cfg.occlusion_second_pass) {
    int iter_f = res.trace.empty() ? 0 : res.trace.back().iter + 1;
    int iter_b =
        res.backward_trace->empty() ? 0 : res.backward_trace->back().iter + 1;
    res.flow = descend(i1, i2, std::move(res.flow), cfg, cfg.pyramid_levels,
                       &iter_f, &res.trace, &fwd_occ);
    backward = descend(i2, i1, std::move(backward), cfg, cfg.pyramid_levels,
                       &iter_b, &*res.backward_trace, &bwd_occ);
    fwd_occ = occlusion_mask(res.flow, backward, cfg.occ_alpha1, cfg.occ_alpha2);
    bwd_occ = occlusion_mask(backward, res.flow, cfg.occ_alpha1, cfg.occ_alpha2);
  }

  res.backward_flow = std::move(backward);
  res.forward_occlusion = std::move(fwd_occ);
  res.backward_occlusion = std::move(bwd_occ);
  return res;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os) {
  os << "iter,total,pixel,smooth,ssim\n";
  char buf[160];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g\n", r.iter, r.total,
                  r.pixel, r.smooth, r.ssim);
    os << buf;
  }
}

}  // namespace vtn
