#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "vtn/propagate.hpp"
#include "vtn/warp.hpp"

using namespace vtn;

namespace {

// independent per-pixel log softmax
double log_softmax_at(const Logits& z, int x, int y, int k) {
  double mx = z.at(x, y, 0);
  for (int c = 1; c < z.num_classes(); ++c) mx = std::max(mx, z.at(x, y, c));
  double sum = 0.0;
  for (int c = 0; c < z.num_classes(); ++c) sum += std::exp(z.at(x, y, c) - mx);
  return z.at(x, y, k) - mx - std::log(sum);
}

Logits random_logits(int w, int h, int c, Rng& rng) {
  Logits z(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k)
        z.at(x, y, k) = 6.0 * (rng.uniform01() - 0.5);
  return z;
}

}  // namespace

TEST_CASE("joint propagation pulls image and labels from the same pixel") {
  // unique ids turn the label plane into a coordinate trace
  const int w = 32, h = 32;
  Rng rng(31);
  const Image img = ts::random_image(w, h, 1, rng);
  LabelMap coords(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      coords.at(x, y) = static_cast<std::uint16_t>(y * w + x);

  const FlowField flow = ts::random_flow(w, h, 5.0, rng);
  const auto prop = joint_propagate(img, coords, flow);

  int checked = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const long rx = std::lround(x + flow.u(x, y));
      const long ry = std::lround(y + flow.v(x, y));
      const bool on_grid = rx >= 0 && ry >= 0 && rx < w && ry < h;
      if (!on_grid) {
        CHECK(prop.labels.at(x, y) == LabelMap::kVoid);
        continue;
      }
      // label id decodes the source pixel the nearest-neighbor pull used
      CHECK(prop.labels.at(x, y) == ry * w + rx);
      ++checked;
    }
  CHECK(checked > 700);  // fuzzed flows keep most pulls on-grid

  // the image plane warps with the same field (bilinear)
  const Image direct = inverse_warp(img, flow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      CHECK(prop.image.at(x, y) == direct.at(x, y));
}

TEST_CASE("boundary masks flag differing non-void neighbors") {
  SUBCASE("a 2x2 checker corner is all boundary") {
    LabelMap m(2, 2);
    m.at(0, 0) = 1;
    m.at(1, 0) = 1;
    m.at(0, 1) = 1;
    m.at(1, 1) = 2;
    const Mask b = boundary_mask(m, 3);
    CHECK(b.count() == 4);
  }
  SUBCASE("void neither flags nor creates boundaries") {
    LabelMap m(2, 2);
    m.at(0, 0) = 1;
    m.at(1, 0) = LabelMap::kVoid;
    m.at(0, 1) = 1;
    m.at(1, 1) = 1;
    CHECK(boundary_mask(m, 3).count() == 0);
  }
  SUBCASE("uniform maps have no boundary") {
    LabelMap m(4, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) m.at(x, y) = 3;
    CHECK(boundary_mask(m, 3).count() == 0);
  }
  SUBCASE("wider windows reach farther") {
    LabelMap m(4, 1);
    m.at(0, 0) = 1;
    m.at(1, 0) = 1;
    m.at(2, 0) = 1;
    m.at(3, 0) = 2;
    const Mask w3 = boundary_mask(m, 3);
    CHECK(w3.at(1, 0) == 0);
    CHECK(w3.at(2, 0) == 1);
    CHECK(w3.at(3, 0) == 1);
    const Mask w5 = boundary_mask(m, 5);
    CHECK(w5.at(1, 0) == 1);
    CHECK(w5.at(0, 0) == 0);
  }
  SUBCASE("even windows are rejected") {
    CHECK_THROWS_AS(boundary_mask(LabelMap(3, 3), 4), std::invalid_argument);
  }
}

TEST_CASE("boundary flags are mutual between differing neighbors") {
  Rng rng(32);
  LabelMap m(9, 7);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x)
      m.at(x, y) = static_cast<std::uint16_t>(rng.uniform_int(0, 2));
  const Mask b = boundary_mask(m, 3);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= 9 || ny >= 7) continue;
          if (m.at(x, y) != m.at(nx, ny)) {
            CHECK(b.at(x, y) == 1);
            CHECK(b.at(nx, ny) == 1);
          }
        }
}

TEST_CASE("relaxed loss equals cross entropy away from boundaries") {
  Rng rng(33);
  const Logits z = random_logits(6, 5, 4, rng);
  LabelMap m(6, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) m.at(x, y) = 2;
  const auto res = relaxed_loss(z, m, 3);
  double want = 0.0;
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) want -= log_softmax_at(z, x, y, 2);
  want /= 30.0;
  CHECK(res.value == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("a two-class boundary accepts the union mass") {
  // softmax of log-probabilities reproduces the probabilities
  Logits z(2, 1, 3);
  for (int x = 0; x < 2; ++x) {
    z.at(x, 0, 0) = std::log(0.3);
    z.at(x, 0, 1) = std::log(0.6);
    z.at(x, 0, 2) = std::log(0.1);
  }
  LabelMap m(2, 1);
  m.at(0, 0) = 0;
  m.at(1, 0) = 1;
  const auto res = relaxed_loss(z, m, 3);
  CHECK(res.value == doctest::Approx(-std::log(0.9)).epsilon(1e-9));
}

TEST_CASE("void neighbors never enlarge the accepted set") {
  Logits z1(2, 1, 3);
  Rng rng(34);
  for (int x = 0; x < 2; ++x)
    for (int c = 0; c < 3; ++c) z1.at(x, 0, c) = rng.uniform01();
  Logits z2(2, 2, 3);
  for (int x = 0; x < 2; ++x)
    for (int c = 0; c < 3; ++c) {
      z2.at(x, 0, c) = z1.at(x, 0, c);
      z2.at(x, 1, c) = 0.0;
    }
  LabelMap m1(2, 1);
  m1.at(0, 0) = 0;
  m1.at(1, 0) = 1;
  LabelMap m2(2, 2);
  m2.at(0, 0) = 0;
  m2.at(1, 0) = 1;
  m2.at(0, 1) = LabelMap::kVoid;
  m2.at(1, 1) = LabelMap::kVoid;
  // the added void row changes neither the valid set nor any window set
  CHECK(relaxed_loss(z2, m2, 3).value ==
        doctest::Approx(relaxed_loss(z1, m1, 3).value).epsilon(1e-15));
}

TEST_CASE("relaxed loss never exceeds plain cross entropy") {
  Rng rng(35);
  for (int i = 0; i < 100; ++i) {
    const Logits z = random_logits(6, 6, 4, rng);
    LabelMap m(6, 6);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        const int r = rng.uniform_int(0, 4);
        m.at(x, y) = r == 4 ? LabelMap::kVoid : static_cast<std::uint16_t>(r);
      }
    m.at(0, 0) = 0;  // at least one scored pixel
    const auto res = relaxed_loss(z, m, 3);
    double ce = 0.0;
    int n = 0;
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        if (m.at(x, y) == LabelMap::kVoid) continue;
        ce -= log_softmax_at(z, x, y, m.at(x, y));
        ++n;
      }
    ce /= n;
    CHECK(res.value <= ce + 1e-12);
  }
}

TEST_CASE("relaxed loss gradient matches finite differences") {
  Rng rng(36);
  for (int trial = 0; trial < 3; ++trial) {
    Logits z = random_logits(4, 4, 3, rng);
    LabelMap m(4, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        const int r = rng.uniform_int(0, 3);
        m.at(x, y) = r == 3 ? LabelMap::kVoid : static_cast<std::uint16_t>(r);
      }
    m.at(1, 1) = 0;
    const auto res = relaxed_loss(z, m, 3);
    const double h = 1e-4;
    std::vector<double> fd, an;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x)
        for (int c = 0; c < 3; ++c) {
          const double saved = z.at(x, y, c);
          z.at(x, y, c) = saved + h;
          const double hi = relaxed_loss(z, m, 3).value;
          z.at(x, y, c) = saved - h;
          const double lo = relaxed_loss(z, m, 3).value;
          z.at(x, y, c) = saved;
          fd.push_back((hi - lo) / (2 * h));
          an.push_back(res.grad.at(x, y, c));
        }
    CHECK(ts::rel_linf(an, fd) < 1e-4);
  }
}

TEST_CASE("relaxed loss gradient sums to zero over classes") {
  Rng rng(37);
  const Logits z = random_logits(5, 4, 4, rng);
  LabelMap m(5, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x)
      m.at(x, y) = static_cast<std::uint16_t>(rng.uniform_int(0, 3));
  const auto res = relaxed_loss(z, m, 3);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) {
      double s = 0.0;
      for (int c = 0; c < 4; ++c) s += res.grad.at(x, y, c);
      CHECK(std::abs(s) < 1e-12);
    }
}

TEST_CASE("relaxed loss rejects degenerate inputs") {
  Logits z(2, 2, 3);
  LabelMap all_void(2, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) all_void.at(x, y) = LabelMap::kVoid;
  CHECK_THROWS_AS(relaxed_loss(z, all_void, 3), std::invalid_argument);

  LabelMap big(2, 2);
  big.at(0, 0) = 7;  // only 3 channels
  CHECK_THROWS_AS(relaxed_loss(z, big, 3), std::invalid_argument);
  CHECK_THROWS_AS(relaxed_loss(z, LabelMap(2, 2), 4), std::invalid_argument);
}

TEST_CASE("intersection over union hand counts") {
  SUBCASE("pred [A,A,B,B] vs gt [A,B,B,B]") {
    LabelMap pred(4, 1), gt(4, 1);
    pred.at(0, 0) = 0;
    pred.at(1, 0) = 0;
    pred.at(2, 0) = 1;
    pred.at(3, 0) = 1;
    gt.at(0, 0) = 0;
    gt.at(1, 0) = 1;
    gt.at(2, 0) = 1;
    gt.at(3, 0) = 1;
    const auto res = miou(pred, gt, 2);
    REQUIRE(res.per_class.size() == 2);
    CHECK(res.per_class[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.per_class[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(res.miou == doctest::Approx(7.0 / 12).epsilon(1e-12));
  }
  SUBCASE("perfect prediction scores one") {
    LabelMap m(3, 3);
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 3; ++x) m.at(x, y) = static_cast<std::uint16_t>(x % 2);
    CHECK(miou(m, m, 2).miou == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("void ground truth is excluded") {
    LabelMap pred(2, 1), gt(2, 1);
    pred.at(0, 0) = 1;
    pred.at(1, 0) = 0;  // disagrees, but gt is void there
    gt.at(0, 0) = 1;
    gt.at(1, 0) = LabelMap::kVoid;
    CHECK(miou(pred, gt, 2).miou == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("classes absent from both sides are excluded as NaN") {
    LabelMap m(2, 1);
    m.at(0, 0) = 0;
    m.at(1, 0) = 1;
    const auto res = miou(m, m, 5);
    CHECK(res.miou == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(res.per_class.size() == 5);
    CHECK(std::isnan(res.per_class[3]));
  }
  SUBCASE("all-void ground truth is an error") {
    LabelMap pred(2, 1), gt(2, 1);
    gt.at(0, 0) = LabelMap::kVoid;
    gt.at(1, 0) = LabelMap::kVoid;
    CHECK_THROWS_AS(miou(pred, gt, 2), std::invalid_argument);
  }
  SUBCASE("out-of-range ground-truth ids are an error") {
    LabelMap pred(2, 1), gt(2, 1);
    gt.at(0, 0) = 9;
    CHECK_THROWS_AS(miou(pred, gt, 2), std::invalid_argument);
  }
}

TEST_CASE("intersection over union is permutation invariant") {
  Rng rng(38);
  LabelMap pred(8, 8), gt(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      pred.at(x, y) = static_cast<std::uint16_t>(rng.uniform_int(0, 2));
      gt.at(x, y) = static_cast<std::uint16_t>(rng.uniform_int(0, 2));
    }
  const double base = miou(pred, gt, 3).miou;
  // permutation (0,1,2) -> (2,0,1) applied to both maps
  const auto perm = [](std::uint16_t v) {
    return static_cast<std::uint16_t>((v + 2) % 3);
  };
  LabelMap pred2(8, 8), gt2(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      pred2.at(x, y) = perm(pred.at(x, y));
      gt2.at(x, y) = perm(gt.at(x, y));
    }
  CHECK(miou(pred2, gt2, 3).miou == doctest::Approx(base).epsilon(1e-15));
}
