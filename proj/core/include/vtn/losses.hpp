#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtn/grid.hpp"

namespace vtn {

// Term weights shared by the photometric objectives. delta holds the
// per-scale weights, coarsest first.
struct LossWeights {
  double lambda1 = 1.0;  // photometric term
  double lambda2 = 1.0;  // smoothness term
  double lambda3 = 1.0;  // ssim term
  std::vector<double> delta = {0.16, 0.08, 0.04, 0.02, 0.01};
  double alpha_pixel = 0.45;
  double alpha_smooth = 0.45;
  double epsilon = 1e-3;

  void validate() const;
};

struct LossTerm {
  std::string name;
  double raw = 0.0;
  double weight = 0.0;
  double weighted = 0.0;
};

// Named terms plus their weighted sum; total always equals the sum of the
// weighted entries because add() is the only way in.
struct LossReport {
  std::vector<LossTerm> terms;
  double total = 0.0;

  void add(std::string name, double raw, double weight);
  const LossTerm* find(std::string_view name) const;
};

// Robust penalty (x^2 + eps^2)^alpha and its derivative in x.
double charbonnier(double x, double alpha, double epsilon);
double charbonnier_deriv(double x, double alpha, double epsilon);

struct ValueGradFlow {
  double value = 0.0;
  FlowField grad;
};

struct ValueGradImage {
  double value = 0.0;
  Grid grad;
};

// Mean robust difference between i1 and i2 warped towards it, over pixels
// and channels. Gradient is with respect to the flow.
ValueGradFlow pixel_loss(const Image& i1, const Image& i2,
                         const FlowField& flow, const LossWeights& w = {});

// Per-pixel photometric penalty (channel mean), for masked variants.
Grid pixel_loss_map(const Image& i1, const Image& i2, const FlowField& flow,
                    const LossWeights& w = {});

// Mean robust penalty on flow differences: order 1 uses forward
// differences, order 2 second differences. Boundary terms are omitted.
ValueGradFlow smoothness_loss(const FlowField& flow, const LossWeights& w = {},
                              int order = 1);

// Similarity of two equally sized patches from population moments.
double ssim(std::span<const double> a, std::span<const double> b, double c1,
            double c2);

// Mean of (1 - ssim) over non-overlapping patches (trailing partial
// patches are dropped). Gradient is with respect to i1rec.
ValueGradImage ssim_loss(const Image& i1, const Image& i1rec, int patch = 8,
                         int stride = 8, double c1 = 1e-4, double c2 = 1e-3);

// Illumination-robust photometric distance from ternary signatures
// (dead zone t), soft-counted with the robust penalty. Evaluation only.
double census_distance(const Image& a, const Image& b, int window = 3,
                       double t = 0.01);

// Weighted single-scale objective.
LossReport scale_loss(double pixel_value, double smooth_value,
                      std::optional<double> ssim_value,
                      const LossWeights& w = {});

// Weighted sum across scales, coarsest first.
LossReport total_loss(const std::vector<double>& per_scale_losses,
                      const std::vector<double>& delta);

// Mean endpoint error against ground truth over counted pixels
// (valid == nullptr counts everything; flag 1 counts a pixel).
double epe(const FlowField& flow, const FlowField& gt,
           const Mask* valid = nullptr);

// Fraction of counted pixels whose endpoint error exceeds 3 px and 5% of
// the ground-truth magnitude.
double fl_outliers(const FlowField& flow, const FlowField& gt,
                   const Mask* valid = nullptr);

// Proxy-supervised objective: endpoint error against the proxy plus a
// weighted photometric term.
LossReport guided_loss(const FlowField& flow, const FlowField& proxy_gt,
                       const Image& i1, const Image& i2, double lambda = 0.1,
                       const LossWeights& w = {});

}  // namespace vtn
