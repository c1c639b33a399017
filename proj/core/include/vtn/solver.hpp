#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "vtn/grid.hpp"
#include "vtn/losses.hpp"

namespace vtn {

struct SolverConfig {
  int pyramid_levels = 4;
  double scale_factor = 0.5;  // per-level shrink, 2x2 box average at 0.5
  int iters_per_level = 200;
  double step = 1.0;  // initial gradient step, adapted by line search
  LossWeights weights;
  int smooth_order = 1;
  bool use_ssim = false;
  bool bidirectional = false;
  bool occlusion_second_pass = false;
  double occ_alpha1 = 0.01, occ_alpha2 = 0.5;
  std::uint64_t seed = 0;  // reserved; the descent itself is deterministic

  // Fails when the coarsest level would drop under 8x8.
  void validate(int width, int height) const;
};

struct TraceRow {
  int segment = 0;  // pyramid level (0 = coarsest); refinements get new ids
  int iter = 0;     // global iteration index
  double total = 0.0, pixel = 0.0, smooth = 0.0, ssim = 0.0;
};

struct SolveResult {
  FlowField flow;
  std::vector<TraceRow> trace;
  std::optional<double> epe_vs_gt;

  // Filled by solve_bidirectional.
  std::optional<FlowField> backward_flow;
  std::optional<std::vector<TraceRow>> backward_trace;
  std::optional<Mask> forward_occlusion, backward_occlusion;
};

// Coarse-to-fine minimization of the weighted photometric + smoothness
// (+ optional patch-similarity) objective by gradient descent with a
// backtracking line search. Objective values never increase within a
// pyramid level; across levels they are evaluated at different resolutions
// and restart.
SolveResult solve_flow(const Image& i1, const Image& i2,
                       const SolverConfig& cfg);

// Forward and backward passes plus consistency occlusion masks. With
// occlusion_second_pass the finest level is re-run from the first solution
// with the photometric term restricted to non-occluded pixels (smoothness
// stays global).
SolveResult solve_bidirectional(const Image& i1, const Image& i2,
                                const SolverConfig& cfg);

// CSV rows `iter,total,pixel,smooth,ssim` with a header line.
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os);

}  // namespace vtn
