#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "vtn/losses.hpp"
#include "vtn/occlusion.hpp"
#include "vtn/rng.hpp"
#include "vtn/url.hpp"
#include "vtn/warp.hpp"

namespace {

vtn::Image random_image(int w, int h, int c, std::uint64_t seed) {
  vtn::Rng rng(seed);
  vtn::Image img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) img.at(x, y, k) = rng.uniform01();
  return img;
}

vtn::FlowField random_flow(int w, int h, double amp, std::uint64_t seed) {
  vtn::Rng rng(seed);
  vtn::FlowField f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.u(x, y) = amp * (2.0 * rng.uniform01() - 1.0);
      f.v(x, y) = amp * (2.0 * rng.uniform01() - 1.0);
    }
  return f;
}

void bm_inverse_warp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto img = random_image(n, n, 3, 1);
  const auto flow = random_flow(n, n, 4.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(vtn::inverse_warp(img, flow));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(bm_inverse_warp)->Arg(128)->Arg(256);

void bm_pixel_loss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto i1 = random_image(n, n, 3, 3);
  const auto i2 = random_image(n, n, 3, 4);
  const auto flow = random_flow(n, n, 2.0, 5);
  const vtn::LossWeights w;
  for (auto _ : state)
    benchmark::DoNotOptimize(vtn::pixel_loss(i1, i2, flow, w));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(bm_pixel_loss)->Arg(128)->Arg(256);

void bm_census(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_image(n, n, 1, 6);
  const auto b = random_image(n, n, 1, 7);
  for (auto _ : state) benchmark::DoNotOptimize(vtn::census_distance(a, b));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(bm_census)->Arg(128)->Arg(256);

void bm_occlusion_mask(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto fwd = random_flow(n, n, 3.0, 8);
  const auto bwd = random_flow(n, n, 3.0, 9);
  for (auto _ : state)
    benchmark::DoNotOptimize(vtn::occlusion_mask(fwd, bwd));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(bm_occlusion_mask)->Arg(128)->Arg(256);

void bm_factor_update(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m1 = 64, m2 = 32, d = 8;
  vtn::Rng rng(10);
  const auto fill = [&rng](Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform01();
  };
  Eigen::MatrixXd a(m1, n), b(m2, n), u(m1, d), w(m2, d), v(d, n);
  fill(a), fill(b), fill(u), fill(w), fill(v);
  for (auto _ : state) {
    u = vtn::url::update_u(a, u, v);
    w = vtn::url::update_w(b, w, v);
    v = vtn::url::update_v(a, b, u, w, v, 0.0);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_factor_update)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
