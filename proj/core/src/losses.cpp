#include "vtn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "vtn/parallel.hpp"
#include "vtn/warp.hpp"

namespace vtn {

namespace {
constexpr double kCensusAlpha = 0.45;
constexpr double kCensusEps = 1e-3;

void check_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": image shapes differ");
}
}  // namespace

void LossWeights::validate() const {
  auto ok = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!ok(lambda1) || !ok(lambda2) || !ok(lambda3))
    throw std::invalid_argument("LossWeights: lambdas must be finite and >= 0");
  for (double d : delta)
    if (!ok(d)) throw std::invalid_argument("LossWeights: deltas must be finite and >= 0");
  auto alpha_ok = [](double a) { return std::isfinite(a) && a > 0.0 && a <= 1.0; };
  if (!alpha_ok(alpha_pixel) || !alpha_ok(alpha_smooth))
    throw std::invalid_argument("LossWeights: alphas must lie in (0, 1]");
  if (!std::isfinite(epsilon) || epsilon <= 0.0)
    throw std::invalid_argument("LossWeights: epsilon must be positive");
}

void LossReport::add(std::string name, double raw, double weight) {
  LossTerm t;
  t.name = std::move(name);
  t.raw = raw;
  t.weight = weight;
  t.weighted = raw * weight;
  total += t.weighted;
  terms.push_back(std::move(t));
}

const LossTerm* LossReport::find(std::string_view name) const {
  for (const auto& t : terms)
    if (t.name == name) return &t;
  return nullptr;
}

double charbonnier(double x, double alpha, double epsilon) {
  return std::pow(x * x + epsilon * epsilon, alpha);
}

double charbonnier_deriv(double x, double alpha, double epsilon) {
  return 2.0 * alpha * x * std::pow(x * x + epsilon * epsilon, alpha - 1.0);
}

namespace {

// Shared photometric pass: residual penalty per pixel, gradient pushed
// through the warp jacobian. Any output may be null.
void photometric_pass(const Image& i1, const Image& i2, const FlowField& flow,
                      const LossWeights& w, double* value, FlowField* grad,
                      Grid* map) {
  check_same_shape(i1, i2, "pixel_loss");
  if (i1.width() != flow.width() || i1.height() != flow.height())
    throw ShapeError("pixel_loss: image and flow dimensions differ");
  w.validate();

  const int width = i1.width(), height = i1.height(), nc = i1.channels();
  const double alpha = w.alpha_pixel, eps = w.epsilon;
  const Image warped = inverse_warp(i2, flow);
  WarpJacobian jac;
  if (grad) jac = warp_jacobian(i2, flow);

  const std::size_t denom = static_cast<std::size_t>(width) * height * nc;
  std::vector<double> row_sums(height, 0.0);
  if (grad) *grad = FlowField(width, height);
  if (map) *map = Grid(width, height);

  parallel_blocks(height, [&](int yb, int ye) {
    for (int y = yb; y < ye; ++y) {
      double row = 0.0;
      for (int x = 0; x < width; ++x) {
        double pix = 0.0, gu = 0.0, gv = 0.0;
        for (int c = 0; c < nc; ++c) {
          const double r = i1.at(x, y, c) - warped.at(x, y, c);
          pix += charbonnier(r, alpha, eps);
          if (grad) {
            const double dr = charbonnier_deriv(r, alpha, eps);
            gu -= dr * jac.du.at(x, y, c);
            gv -= dr * jac.dv.at(x, y, c);
          }
        }
        row += pix;
        if (grad) {
          grad->u(x, y) = gu / denom;
          grad->v(x, y) = gv / denom;
        }
        if (map) map->at(x, y) = pix / nc;
      }
      row_sums[y] = row;
    }
  });

  if (value) {
    double total = 0.0;
    for (double r : row_sums) total += r;  // fixed order, thread count free
    *value = total / denom;
  }
}

}  // namespace

ValueGradFlow pixel_loss(const Image& i1, const Image& i2,
                         const FlowField& flow, const LossWeights& w) {
  ValueGradFlow out;
  photometric_pass(i1, i2, flow, w, &out.value, &out.grad, nullptr);
  return out;
}

Grid pixel_loss_map(const Image& i1, const Image& i2, const FlowField& flow,
                    const LossWeights& w) {
  Grid map;
  photometric_pass(i1, i2, flow, w, nullptr, nullptr, &map);
  return map;
}

ValueGradFlow smoothness_loss(const FlowField& flow, const LossWeights& w,
                              int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("smoothness_loss: order must be 1 or 2");
  w.validate();
  const int width = flow.width(), height = flow.height();
  const double alpha = w.alpha_smooth, eps = w.epsilon;

  std::size_t count = 0;
  if (order == 1) {
    count = 2 * (static_cast<std::size_t>(width - 1) * height +
                 static_cast<std::size_t>(width) * (height - 1));
  } else {
    if (width >= 3) count += 2 * static_cast<std::size_t>(width - 2) * height;
    if (height >= 3) count += 2 * static_cast<std::size_t>(height - 2) * width;
  }

  ValueGradFlow out;
  out.grad = FlowField(width, height);
  if (count == 0) return out;

  double total = 0.0;
  auto accumulate = [&](const double* plane, double* gplane) {
    auto id = [width](int x, int y) {
      return static_cast<std::size_t>(y) * width + x;
    };
    if (order == 1) {
      for (int y = 0; y < height; ++y)
        for (int x = 0; x + 1 < width; ++x) {
          const double d = plane[id(x + 1, y)] - plane[id(x, y)];
          total += charbonnier(d, alpha, eps);
          const double g = charbonnier_deriv(d, alpha, eps) / count;
          gplane[id(x + 1, y)] += g;
          gplane[id(x, y)] -= g;
        }
      for (int y = 0; y + 1 < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double d = plane[id(x, y + 1)] - plane[id(x, y)];
          total += charbonnier(d, alpha, eps);
          const double g = charbonnier_deriv(d, alpha, eps) / count;
          gplane[id(x, y + 1)] += g;
          gplane[id(x, y)] -= g;
        }
    } else {
      for (int y = 0; y < height; ++y)
        for (int x = 1; x + 1 < width; ++x) {
          const double d = plane[id(x + 1, y)] - 2.0 * plane[id(x, y)] +
                           plane[id(x - 1, y)];
          total += charbonnier(d, alpha, eps);
          const double g = charbonnier_deriv(d, alpha, eps) / count;
          gplane[id(x + 1, y)] += g;
          gplane[id(x, y)] -= 2.0 * g;
          gplane[id(x - 1, y)] += g;
        }
      for (int y = 1; y + 1 < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double d = plane[id(x, y + 1)] - 2.0 * plane[id(x, y)] +
                           plane[id(x, y - 1)];
          total += charbonnier(d, alpha, eps);
          const double g = charbonnier_deriv(d, alpha, eps) / count;
          gplane[id(x, y + 1)] += g;
          gplane[id(x, y)] -= 2.0 * g;
          gplane[id(x, y - 1)] += g;
        }
    }
  };
  accumulate(flow.u_data(), out.grad.u_data());
  accumulate(flow.v_data(), out.grad.v_data());
  out.value = total / count;
  return out;
}

double ssim(std::span<const double> a, std::span<const double> b, double c1,
            double c2) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("ssim: patches must be non-empty and equal size");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    va += da * da;
    vb += db * db;
    cov += da * db;
  }
  va /= n;
  vb /= n;
  cov /= n;
  return ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
         ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

ValueGradImage ssim_loss(const Image& i1, const Image& i1rec, int patch,
                         int stride, double c1, double c2) {
  check_same_shape(i1, i1rec, "ssim_loss");
  if (patch < 1 || stride < 1)
    throw std::invalid_argument("ssim_loss: patch and stride must be >= 1");
  if (i1.width() < patch || i1.height() < patch)
    throw std::invalid_argument("ssim_loss: image smaller than one patch");

  const int width = i1.width(), height = i1.height(), nc = i1.channels();
  const double n = static_cast<double>(patch) * patch;

  ValueGradImage out;
  out.grad = Grid(width, height, nc);

  // First count patches so gradient contributions can be averaged in one pass.
  std::size_t num_patches = 0;
  for (int y0 = 0; y0 + patch <= height; y0 += stride)
    for (int x0 = 0; x0 + patch <= width; x0 += stride) num_patches++;
  num_patches *= nc;

  double total = 0.0;
  for (int y0 = 0; y0 + patch <= height; y0 += stride) {
    for (int x0 = 0; x0 + patch <= width; x0 += stride) {
      for (int c = 0; c < nc; ++c) {
        double ma = 0.0, mb = 0.0;
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx) {
            ma += i1.at(x0 + dx, y0 + dy, c);
            mb += i1rec.at(x0 + dx, y0 + dy, c);
          }
        ma /= n;
        mb /= n;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx) {
            const double da = i1.at(x0 + dx, y0 + dy, c) - ma;
            const double db = i1rec.at(x0 + dx, y0 + dy, c) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        va /= n;
        vb /= n;
        cov /= n;
        const double a1 = 2.0 * ma * mb + c1;
        const double a2 = 2.0 * cov + c2;
        const double b1 = ma * ma + mb * mb + c1;
        const double b2 = va + vb + c2;
        const double s = (a1 * a2) / (b1 * b2);
        total += 1.0 - s;
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx) {
            const double xa = i1.at(x0 + dx, y0 + dy, c);
            const double yb = i1rec.at(x0 + dx, y0 + dy, c);
            const double ds =
                (2.0 / n) * ((ma * a2 + a1 * (xa - ma)) / (b1 * b2) -
                             s * (mb / b1 + (yb - mb) / b2));
            out.grad.at(x0 + dx, y0 + dy, c) += -ds / num_patches;
          }
      }
    }
  }
  out.value = total / num_patches;
  return out;
}

double census_distance(const Image& a, const Image& b, int window, double t) {
  check_same_shape(a, b, "census_distance");
  if (a.channels() != 1)
    throw std::invalid_argument("census_distance: grayscale input required");
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("census_distance: window must be odd");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument("census_distance: dead zone must be >= 0");

  const int width = a.width(), height = a.height(), r = window / 2;
  auto ternary = [t](double d) -> int { return d > t ? 1 : (d < -t ? -1 : 0); };

  std::vector<double> row_sums(height, 0.0);
  parallel_blocks(height, [&](int yb, int ye) {
    for (int y = yb; y < ye; ++y) {
      double row = 0.0;
      for (int x = 0; x < width; ++x) {
        const double ca = a.at(x, y), cb = b.at(x, y);
        double count = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          const int ny = y + dy;
          if (ny < 0 || ny >= height) continue;
          for (int dx = -r; dx <= r; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = x + dx;
            if (nx < 0 || nx >= width) continue;
            const int sa = ternary(a.at(nx, ny) - ca);
            const int sb = ternary(b.at(nx, ny) - cb);
            count += charbonnier(sa - sb, kCensusAlpha, kCensusEps);
          }
        }
        row += count;
      }
      row_sums[y] = row;
    }
  });
  double total = 0.0;
  for (double r2 : row_sums) total += r2;
  return total / (static_cast<double>(width) * height);
}

LossReport scale_loss(double pixel_value, double smooth_value,
                      std::optional<double> ssim_value, const LossWeights& w) {
  w.validate();
  LossReport rep;
  rep.add("pixel", pixel_value, w.lambda1);
  rep.add("smooth", smooth_value, w.lambda2);
  if (ssim_value) rep.add("ssim", *ssim_value, w.lambda3);
  return rep;
}

LossReport total_loss(const std::vector<double>& per_scale_losses,
                      const std::vector<double>& delta) {
  if (per_scale_losses.empty() || per_scale_losses.size() != delta.size())
    throw std::invalid_argument(
        "total_loss: need one delta per scale, at least one scale");
  LossReport rep;
  for (std::size_t s = 0; s < per_scale_losses.size(); ++s)
    rep.add("scale" + std::to_string(s), per_scale_losses[s], delta[s]);
  return rep;
}

namespace {
void check_flow_pair(const FlowField& flow, const FlowField& gt,
                     const Mask* valid, const char* what) {
  if (!flow.same_shape(gt))
    throw ShapeError(std::string(what) + ": flow shapes differ");
  if (valid && (valid->width() != flow.width() || valid->height() != flow.height()))
    throw ShapeError(std::string(what) + ": mask shape differs");
}
}  // namespace

double epe(const FlowField& flow, const FlowField& gt, const Mask* valid) {
  check_flow_pair(flow, gt, valid, "epe");
  double total = 0.0;
  std::size_t counted = 0;
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      if (valid && !valid->at(x, y)) continue;
      const double du = flow.u(x, y) - gt.u(x, y);
      const double dv = flow.v(x, y) - gt.v(x, y);
      total += std::sqrt(du * du + dv * dv);
      counted++;
    }
  if (counted == 0) throw std::invalid_argument("epe: no valid pixels");
  return total / counted;
}

double fl_outliers(const FlowField& flow, const FlowField& gt,
                   const Mask* valid) {
  check_flow_pair(flow, gt, valid, "fl_outliers");
  std::size_t outliers = 0, counted = 0;
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      if (valid && !valid->at(x, y)) continue;
      const double du = flow.u(x, y) - gt.u(x, y);
      const double dv = flow.v(x, y) - gt.v(x, y);
      const double err = std::sqrt(du * du + dv * dv);
      const double mag = std::hypot(gt.u(x, y), gt.v(x, y));
      if (err > 3.0 && err > 0.05 * mag) outliers++;
      counted++;
    }
  if (counted == 0) throw std::invalid_argument("fl_outliers: no valid pixels");
  return static_cast<double>(outliers) / counted;
}

LossReport guided_loss(const FlowField& flow, const FlowField& proxy_gt,
                       const Image& i1, const Image& i2, double lambda,
                       const LossWeights& w) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("guided_loss: lambda must be finite and >= 0");
  LossReport rep;
  rep.add("epe", epe(flow, proxy_gt), 1.0);
  double reconst = 0.0;
  photometric_pass(i1, i2, flow, w, &reconst, nullptr, nullptr);
  rep.add("reconst", reconst, lambda);
  return rep;
}

}  // namespace vtn
