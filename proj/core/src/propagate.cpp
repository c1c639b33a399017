#include "vtn/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vtn/warp.hpp"

namespace vtn {

Propagated joint_propagate(const Image& image, const LabelMap& labels,
                           const FlowField& flow) {
  if (image.width() != labels.width() || image.height() != labels.height())
    throw ShapeError("joint_propagate: image and labels dimensions differ");
  return Propagated{inverse_warp(image, flow), nn_warp_labels(labels, flow)};
}

Mask boundary_mask(const LabelMap& labels, int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("boundary_mask: window must be odd");
  const int w = labels.width(), h = labels.height(), r = window / 2;
  Mask mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint16_t id = labels.at(x, y);
      if (id == LabelMap::kVoid) continue;
      bool flagged = false;
      for (int dy = -r; dy <= r && !flagged; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          const std::uint16_t nid = labels.at(nx, ny);
          if (nid != LabelMap::kVoid && nid != id) {
            flagged = true;
            break;
          }
        }
      }
      mask.at(x, y) = flagged ? 1 : 0;
    }
  }
  return mask;
}

RelaxedLossResult relaxed_loss(const Logits& logits, const LabelMap& labels,
                               int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("relaxed_loss: window must be odd");
  if (logits.width() != labels.width() || logits.height() != labels.height())
    throw ShapeError("relaxed_loss: logits and labels dimensions differ");
  logits.validate();

  const int w = logits.width(), h = logits.height(), nc = logits.num_classes();
  const int r = window / 2;

  RelaxedLossResult out;
  out.grad = Grid(w, h, nc);

  // First pass counts the contributing pixels so gradients can be scaled
  // in place.
  std::size_t valid = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (labels.at(x, y) != LabelMap::kVoid) valid++;
  if (valid == 0)
    throw std::invalid_argument("relaxed_loss: label map is entirely void");

  std::vector<double> prob(nc);
  std::vector<char> in_set(nc);
  double total = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint16_t id = labels.at(x, y);
      if (id == LabelMap::kVoid) continue;
      if (id >= nc)
        throw std::invalid_argument("relaxed_loss: label id outside the class range");

      std::fill(in_set.begin(), in_set.end(), 0);
      for (int dy = -r; dy <= r; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          const std::uint16_t nid = labels.at(nx, ny);
          if (nid == LabelMap::kVoid) continue;
          if (nid >= nc)
            throw std::invalid_argument("relaxed_loss: label id outside the class range");
          in_set[nid] = 1;
        }
      }

      // Stable softmax.
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < nc; ++c) mx = std::max(mx, logits.at(x, y, c));
      double z = 0.0;
      for (int c = 0; c < nc; ++c) {
        prob[c] = std::exp(logits.at(x, y, c) - mx);
        z += prob[c];
      }
      double mass = 0.0;
      for (int c = 0; c < nc; ++c) {
        prob[c] /= z;
        if (in_set[c]) mass += prob[c];
      }

      total += -std::log(mass);
      // d(-log sum_{c in S} p_c)/dz_k = p_k - p_k/mass * [k in S]
      for (int c = 0; c < nc; ++c) {
        const double g = prob[c] - (in_set[c] ? prob[c] / mass : 0.0);
        out.grad.at(x, y, c) = g / valid;
      }
    }
  }
  out.value = total / valid;
  return out;
}

MiouResult miou(const LabelMap& pred, const LabelMap& gt, int num_classes) {
  if (!pred.same_shape(gt)) throw ShapeError("miou: label shapes differ");
  if (num_classes < 1)
    throw std::invalid_argument("miou: need at least one class");

  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0),
      fn(num_classes, 0);
  std::size_t valid = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      const std::uint16_t g = gt.at(x, y);
      if (g == LabelMap::kVoid) continue;
      if (g >= num_classes)
        throw std::invalid_argument("miou: ground-truth id outside the class range");
      valid++;
      const std::uint16_t p = pred.at(x, y);
      if (p == g) {
        tp[g]++;
      } else {
        fn[g]++;
        if (p != LabelMap::kVoid && p < num_classes) fp[p]++;
      }
    }
  if (valid == 0)
    throw std::invalid_argument("miou: ground truth is entirely void");

  MiouResult out;
  out.per_class.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    const std::size_t uni = tp[c] + fp[c] + fn[c];
    if (uni == 0) continue;  // absent everywhere, not averaged
    out.per_class[c] = static_cast<double>(tp[c]) / uni;
    sum += out.per_class[c];
    present++;
  }
  out.miou = present > 0 ? sum / present : 0.0;
  return out;
}

}  // namespace vtn
