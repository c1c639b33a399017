#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "test_support.hpp"
#include "vtn/grid.hpp"
#include "vtn/warp.hpp"

using namespace vtn;

TEST_CASE("grid types validate their dimensions") {
  CHECK_THROWS_AS(Grid(0, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(Grid(4, -1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Grid(4, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(Image(4, 4, 2), std::invalid_argument);  // gray or rgb only
  CHECK_THROWS_AS(Logits(4, 4, 1), std::invalid_argument);
  CHECK_NOTHROW(Image(1, 1, 1));
  CHECK_NOTHROW(Image(2, 2, 3));
}

TEST_CASE("image validation rejects out-of-range and non-finite values") {
  Image img(2, 2, 1);
  img.at(0, 0) = 0.5;
  CHECK_NOTHROW(img.validate());
  img.at(1, 1) = 1.5;
  CHECK_THROWS_AS(img.validate(), NumericError);
  img.at(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(img.validate(), NumericError);
}

TEST_CASE("bilinear sampling at corners, centers and clamped points") {
  // quarter steps: every expected value is an exact dyadic
  Image img(2, 2, 1);
  img.at(0, 0) = 0.25;
  img.at(1, 0) = 0.5;
  img.at(0, 1) = 0.75;
  img.at(1, 1) = 1.0;

  CHECK(bilinear_sample(img, 0.0, 0.0, 0) == 0.25);
  CHECK(bilinear_sample(img, 1.0, 0.0, 0) == 0.5);
  CHECK(bilinear_sample(img, 0.5, 0.5, 0) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(bilinear_sample(img, 0.5, 0.0, 0) == doctest::Approx(0.375).epsilon(1e-15));
  // clamped: far off-grid reads the nearest border texel
  CHECK(bilinear_sample(img, 5.0, 0.0, 0) == 0.5);
  CHECK(bilinear_sample(img, -3.0, -3.0, 0) == 0.25);
  CHECK(bilinear_sample(img, 0.0, 9.0, 0) == 0.75);
}

TEST_CASE("bilinear sampling rejects non-finite coordinates") {
  Image img(2, 2, 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bilinear_sample(img, nan, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(bilinear_sample(img, 0.0, inf, 0), std::invalid_argument);
}

TEST_CASE("bilinear samples stay within the hull of their four neighbors") {
  Rng rng(11);
  Image img = ts::random_image(7, 5, 3, rng);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform01() * 6.0;
    const double y = rng.uniform01() * 4.0;
    const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, 5);
    const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, 3);
    for (int c = 0; c < 3; ++c) {
      const double v = bilinear_sample(img, x, y, c);
      const double lo = std::min({img.at(x0, y0, c), img.at(x0 + 1, y0, c),
                                  img.at(x0, y0 + 1, c),
                                  img.at(x0 + 1, y0 + 1, c)});
      const double hi = std::max({img.at(x0, y0, c), img.at(x0 + 1, y0, c),
                                  img.at(x0, y0 + 1, c),
                                  img.at(x0 + 1, y0 + 1, c)});
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
  }
}

TEST_CASE("inverse warp with zero flow is bit-identical") {
  Rng rng(3);
  const Image img = ts::random_image(9, 6, 3, rng);
  const FlowField zero(9, 6);
  const Image out = inverse_warp(img, zero);
  REQUIRE(out.same_shape(img));
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 9; ++x)
      for (int c = 0; c < 3; ++c) {
        const double a = out.at(x, y, c), b = img.at(x, y, c);
        CHECK(std::memcmp(&a, &b, sizeof a) == 0);
      }
}

TEST_CASE("inverse warp undoes an integer shift away from the border") {
  Rng rng(4);
  const Image i1 = ts::random_image(8, 8, 1, rng);
  const Image i2 = ts::shift_image(i1, 2, 1);
  const FlowField flow = ts::constant_flow(8, 8, 2.0, 1.0);
  const Image rec = inverse_warp(i2, flow);
  // interior: source pixel x+2 in [2, 7] stays on-grid and unclamped
  for (int y = 1; y < 7; ++y)
    for (int x = 0; x < 6; ++x)
      CHECK(rec.at(x, y) == i1.at(x, y));
}

TEST_CASE("inverse warp rejects mismatched shapes") {
  const Image img(4, 4, 1);
  const FlowField flow(5, 4);
  CHECK_THROWS_AS(inverse_warp(img, flow), ShapeError);
}

TEST_CASE("warp jacobian matches central finite differences") {
  Rng rng(5);
  const Image img = ts::smooth_random_image(9, 9, 3, rng);
  const double h = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    FlowField flow(9, 9);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x) {
        // fractional offsets keep the sample off the bilinear lattice,
        // where the piecewise derivative is not defined
        flow.u(x, y) = 1.4 * (2.0 * rng.uniform01() - 1.0) + 0.3;
        flow.v(x, y) = 1.4 * (2.0 * rng.uniform01() - 1.0) + 0.3;
      }
    const WarpJacobian jac = warp_jacobian(img, flow);
    for (int y = 2; y < 7; ++y)
      for (int x = 2; x < 7; ++x)
        for (int c = 0; c < 3; ++c) {
          const double sx = x + flow.u(x, y), sy = y + flow.v(x, y);
          // the derivative is piecewise constant per bilinear cell; skip
          // samples whose difference stencil would straddle a cell edge
          const double fx = sx - std::floor(sx), fy = sy - std::floor(sy);
          if (fx < 2 * h || fx > 1 - 2 * h || fy < 2 * h || fy > 1 - 2 * h)
            continue;
          const double fdu = (bilinear_sample(img, sx + h, sy, c) -
                              bilinear_sample(img, sx - h, sy, c)) /
                             (2 * h);
          const double fdv = (bilinear_sample(img, sx, sy + h, c) -
                              bilinear_sample(img, sx, sy - h, c)) /
                             (2 * h);
          CHECK(jac.du.at(x, y, c) == doctest::Approx(fdu).epsilon(1e-6));
          CHECK(jac.dv.at(x, y, c) == doctest::Approx(fdv).epsilon(1e-6));
        }
  }
}

TEST_CASE("warp jacobian is zero where sampling clamps") {
  const Image img(4, 4, 1);
  FlowField flow = ts::constant_flow(4, 4, 100.0, -100.0);
  const WarpJacobian jac = warp_jacobian(img, flow);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      CHECK(jac.du.at(x, y) == 0.0);
      CHECK(jac.dv.at(x, y) == 0.0);
    }
}

TEST_CASE("nearest-neighbor label warp rounds and voids off-grid pulls") {
  LabelMap labels(2, 2);
  labels.at(0, 0) = 7;
  labels.at(1, 0) = 7;
  labels.at(0, 1) = 9;
  labels.at(1, 1) = 9;

  SUBCASE("sub-half shifts keep the map") {
    const LabelMap out = nn_warp_labels(labels, ts::constant_flow(2, 2, 0.4, 0.0));
    CHECK(out.at(0, 0) == 7);
    CHECK(out.at(1, 0) == 7);
    CHECK(out.at(0, 1) == 9);
    CHECK(out.at(1, 1) == 9);
  }
  SUBCASE("integer shift pulls rows, off-grid becomes void") {
    const LabelMap out = nn_warp_labels(labels, ts::constant_flow(2, 2, 0.0, 1.0));
    CHECK(out.at(0, 0) == 9);
    CHECK(out.at(1, 0) == 9);
    CHECK(out.at(0, 1) == LabelMap::kVoid);
    CHECK(out.at(1, 1) == LabelMap::kVoid);
  }
  SUBCASE("void labels survive the pull") {
    labels.at(1, 1) = LabelMap::kVoid;
    const LabelMap out = nn_warp_labels(labels, ts::constant_flow(2, 2, 0.0, 0.0));
    CHECK(out.at(1, 1) == LabelMap::kVoid);
  }
}

TEST_CASE("flow quantization endpoints and clipping") {
  FlowField f(5, 1);
  f.u(0, 0) = -20.0;
  f.u(1, 0) = 0.0;
  f.u(2, 0) = 20.0;
  f.u(3, 0) = -35.0;  // clips to -20
  f.u(4, 0) = 35.0;   // clips to +20
  for (int x = 0; x < 5; ++x) f.v(x, 0) = 0.0;

  const QuantizedFlow q = flow_normalize(f, 20.0);
  CHECK(q.u[0] == 0);
  CHECK(q.u[1] == 128);
  CHECK(q.u[2] == 255);
  CHECK(q.u[3] == 0);
  CHECK(q.u[4] == 255);
  for (int x = 0; x < 5; ++x) CHECK(q.v[x] == 128);
}

TEST_CASE("flow quantization is monotone per component") {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    const double a = 50.0 * (2.0 * rng.uniform01() - 1.0);
    const double b = 50.0 * (2.0 * rng.uniform01() - 1.0);
    FlowField f(2, 1);
    f.u(0, 0) = std::min(a, b);
    f.u(1, 0) = std::max(a, b);
    f.v(0, 0) = f.v(1, 0) = 0.0;
    const QuantizedFlow q = flow_normalize(f);
    CHECK(q.u[0] <= q.u[1]);
  }
}

TEST_CASE("flow quantization rejects bad caps and non-finite flow") {
  FlowField f(1, 1);
  CHECK_THROWS_AS(flow_normalize(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(flow_normalize(f, -1.0), std::invalid_argument);
  f.u(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(flow_normalize(f, 20.0), NumericError);
}
