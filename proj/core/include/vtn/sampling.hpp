#pragma once

#include <cstdint>
#include <vector>

#include "vtn/grid.hpp"

namespace vtn {

// Ordered depth frames of equal shape; values finite and >= 0.
struct DepthClip {
  std::vector<Grid> frames;
  void validate() const;
};

// Temporal indices [t, t+tau1, ..., t + sum(tau)] with the start frame
// uniform over the clip and each stride uniform on [0, max_stride].
// Resamples on overflow (up to 100 tries), then retries with the stride
// cap lowered one step at a time, which always terminates by cap 0.
std::vector<int> rts_indices(int num_frames, int num_steps, int max_stride,
                             std::uint64_t seed);

struct CropRect {
  int image_index = 0;
  int x = 0, y = 0, w = 0, h = 0;
};

struct CropResult {
  std::vector<CropRect> crops;
  // Set when no requested class appears anywhere; all crops are then
  // uniform random.
  bool no_class_found = false;
};

// Square crop positions: half uniform random, half centered on connected
// component centroids (4-connectivity), cycling round robin over the
// classes that exist. Crops are clamped inside the image.
CropResult class_uniform_crops(const std::vector<LabelMap>& labels,
                               int crop_size, int num_classes, int count,
                               std::uint64_t seed);

struct StdnResult {
  DepthClip clip;
  // Set when a frame third had a zero 95th percentile and was left alone.
  bool zero_percentile = false;
};

// Depth normalization over temporal windows of `window` frames (last one
// may be short): each frame's horizontal third is scaled so its 95th
// percentile matches the window-wide 95th percentile of that third.
StdnResult stdn(const DepthClip& clip, int window);

// Accumulated absolute frame differences: sum over N steps of
// |frame(t+1) - frame(t)|, no thresholding.
Grid mdmm(const DepthClip& clip, int t_start, int num_steps);

// Linear-interpolation percentile (p in [0, 100]) between order statistics.
double percentile(std::vector<double> values, double p);

}  // namespace vtn
