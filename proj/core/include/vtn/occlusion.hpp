#pragma once

#include "vtn/grid.hpp"

namespace vtn {

// Backward flow sampled bilinearly at each pixel's forward-displaced
// location, clamped to the border.
FlowField backward_at_forward(const FlowField& forward,
                              const FlowField& backward);

// Forward-backward consistency test: pixel is occluded (flag 1) when
// |f + b(f)|^2 >= alpha1 * (|f|^2 + |b(f)|^2) + alpha2.
// The backward mask is the same call with the roles swapped.
Mask occlusion_mask(const FlowField& forward, const FlowField& backward,
                    double alpha1 = 0.01, double alpha2 = 0.5);

struct OcclusionAwareLoss {
  double value = 0.0;          // forward_term + backward_term
  double forward_term = 0.0;   // mean loss over non-occluded pixels
  double backward_term = 0.0;
  bool forward_all_occluded = false;
  bool backward_all_occluded = false;
};

// Photometric maps averaged over the non-occluded pixels of each
// direction, then summed. A fully occluded direction contributes zero and
// raises its diagnostic flag instead of dividing by zero.
OcclusionAwareLoss occlusion_aware_loss(const Grid& forward_loss_map,
                                        const Grid& backward_loss_map,
                                        const Mask& forward_occ,
                                        const Mask& backward_occ);

}  // namespace vtn
