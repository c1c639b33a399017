#pragma once

#include <vector>

#include "vtn/grid.hpp"

namespace vtn {

struct Propagated {
  Image image;
  LabelMap labels;
};

// Warps an image and its label map with the same flow: bilinear for the
// intensities, nearest neighbor for the ids, so both pull from the same
// source pixel up to rounding.
Propagated joint_propagate(const Image& image, const LabelMap& labels,
                           const FlowField& flow);

// Flags pixels with a differently labeled (non-void) neighbor inside the
// window. Void pixels are never flagged and never create boundaries.
Mask boundary_mask(const LabelMap& labels, int window = 3);

struct RelaxedLossResult {
  double value = 0.0;
  Grid grad;  // d loss / d logit, same shape as the logits
};

// Cross entropy that accepts any class present in the window around a
// pixel: interior pixels (single-class window) get standard one-hot cross
// entropy, boundary pixels -log of the summed softmax mass of the window's
// classes. Mean over non-void pixels.
RelaxedLossResult relaxed_loss(const Logits& logits, const LabelMap& labels,
                               int window = 3);

struct MiouResult {
  double miou = 0.0;
  // Per-class intersection over union; NaN marks classes absent from both
  // prediction and ground truth (excluded from the mean).
  std::vector<double> per_class;
};

// Intersection over union on pixels with non-void ground truth.
MiouResult miou(const LabelMap& pred, const LabelMap& gt, int num_classes);

}  // namespace vtn
