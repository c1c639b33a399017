#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "scenes.hpp"
#include "test_support.hpp"
#include "vtn/losses.hpp"
#include "vtn/parallel.hpp"
#include "vtn/solver.hpp"

using namespace vtn;

namespace {

SolverConfig translation_config() {
  SolverConfig cfg;
  cfg.pyramid_levels = 4;
  cfg.iters_per_level = 150;
  cfg.weights.lambda1 = 1.0;
  cfg.weights.lambda2 = 0.1;
  cfg.weights.lambda3 = 0.0;
  cfg.use_ssim = false;
  return cfg;
}

double mean_flow_magnitude(const FlowField& f) {
  double acc = 0.0;
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      acc += std::hypot(f.u(x, y), f.v(x, y));
  return acc / (static_cast<double>(f.width()) * f.height());
}

void check_segment_monotone(const std::vector<TraceRow>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i].iter > trace[i - 1].iter);
    if (trace[i].segment == trace[i - 1].segment)
      CHECK(trace[i].total <= trace[i - 1].total + 1e-12);
    else
      CHECK(trace[i].segment > trace[i - 1].segment);
  }
}

bool flows_identical(const FlowField& a, const FlowField& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.u_data(), b.u_data(), a.pixels() * sizeof(double)) == 0 &&
         std::memcmp(a.v_data(), b.v_data(), a.pixels() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("static scenes keep zero flow") {
  const Image i1 = ts::smooth_random_image(48, 40, 1, 31);
  SolverConfig cfg = translation_config();
  cfg.pyramid_levels = 3;  // 40 px floors out at 10
  const auto res = solve_flow(i1, i1, cfg);
  CHECK(mean_flow_magnitude(res.flow) < 0.1);
  check_segment_monotone(res.trace);
}

TEST_CASE("a rigid translation is recovered under half a pixel") {
  const Image i1 = ts::smooth_random_image(64, 64, 1, 32);
  const Image i2 = ts::shift_image(i1, 2, 1);
  const auto res = solve_flow(i1, i2, translation_config());

  const FlowField gt = ts::constant_flow(64, 64, 2.0, 1.0);
  const double err = epe(res.flow, gt);
  CHECK(err < 0.5);

  check_segment_monotone(res.trace);
  // every pyramid level leaves a segment
  CHECK(res.trace.front().segment == 0);
  CHECK(res.trace.back().segment == 3);
  CHECK_FALSE(res.backward_flow.has_value());
}

TEST_CASE("descent is deterministic across runs and thread counts") {
  const Image i1 = ts::smooth_random_image(48, 48, 1, 33);
  const Image i2 = ts::shift_image(i1, 1, 2);
  SolverConfig cfg = translation_config();
  cfg.pyramid_levels = 3;  // 48 px floors out at 12
  cfg.iters_per_level = 60;

  const int restore = num_threads();
  set_num_threads(1);
  const auto a = solve_flow(i1, i2, cfg);
  const auto b = solve_flow(i1, i2, cfg);
  set_num_threads(4);
  const auto c = solve_flow(i1, i2, cfg);
  set_num_threads(restore);

  CHECK(flows_identical(a.flow, b.flow));
  CHECK(flows_identical(a.flow, c.flow));
  REQUIRE(a.trace.size() == c.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    CHECK(a.trace[i].total == c.trace[i].total);
}

TEST_CASE("configs that shrink below the coarsest floor are rejected") {
  SolverConfig cfg;
  cfg.pyramid_levels = 4;
  CHECK_THROWS_AS(cfg.validate(16, 16), std::invalid_argument);
  CHECK_NOTHROW(cfg.validate(64, 64));
  cfg.pyramid_levels = 1;
  CHECK_NOTHROW(cfg.validate(16, 16));
  CHECK_THROWS_AS(cfg.validate(7, 64), std::invalid_argument);
}

TEST_CASE("bidirectional solves recover both directions") {
  const Image i1 = ts::smooth_random_image(64, 64, 1, 34);
  const Image i2 = ts::shift_image(i1, 2, 1);
  SolverConfig cfg = translation_config();
  cfg.bidirectional = true;

  const auto res = solve_bidirectional(i1, i2, cfg);
  REQUIRE(res.backward_flow.has_value());
  REQUIRE(res.backward_trace.has_value());
  REQUIRE(res.forward_occlusion.has_value());
  REQUIRE(res.backward_occlusion.has_value());

  const FlowField fwd_gt = ts::constant_flow(64, 64, 2.0, 1.0);
  const FlowField bwd_gt = ts::constant_flow(64, 64, -2.0, -1.0);
  CHECK(epe(res.flow, fwd_gt) < 0.5);
  CHECK(epe(*res.backward_flow, bwd_gt) < 0.5);

  CHECK(res.forward_occlusion->same_shape(*res.backward_occlusion));
  check_segment_monotone(res.trace);
  check_segment_monotone(*res.backward_trace);
}

TEST_CASE("the occlusion-aware second pass re-runs the finest level") {
  const Image i1 = ts::smooth_random_image(64, 64, 1, 35);
  const Image i2 = ts::shift_image(i1, 2, 1);
  SolverConfig cfg = translation_config();
  cfg.bidirectional = true;
  cfg.occlusion_second_pass = true;

  const auto res = solve_bidirectional(i1, i2, cfg);
  REQUIRE(res.backward_flow.has_value());

  // refinement rows carry a fresh segment id past the pyramid levels
  bool has_refine_fwd = false, has_refine_bwd = false;
  for (const auto& row : res.trace)
    if (row.segment == cfg.pyramid_levels) has_refine_fwd = true;
  for (const auto& row : *res.backward_trace)
    if (row.segment == cfg.pyramid_levels) has_refine_bwd = true;
  CHECK(has_refine_fwd);
  CHECK(has_refine_bwd);
  check_segment_monotone(res.trace);
  check_segment_monotone(*res.backward_trace);

  const FlowField fwd_gt = ts::constant_flow(64, 64, 2.0, 1.0);
  CHECK(epe(res.flow, fwd_gt) < 0.5);

  // a clean translation should not look heavily occluded
  CHECK(res.forward_occlusion->fraction() < 0.3);
}

TEST_CASE("trace rows serialize as stable csv") {
  std::vector<TraceRow> trace;
  trace.push_back({0, 0, 0.5, 0.25, 1.0, 0.0});
  trace.push_back({1, 3, 0.125, 0.0625, 2.0, 0.03125});
  std::ostringstream os;
  write_trace_csv(trace, os);
  CHECK(os.str() ==
        "iter,total,pixel,smooth,ssim\n"
        "0,0.5,0.25,1,0\n"
        "3,0.125,0.0625,2,0.03125\n");
}
