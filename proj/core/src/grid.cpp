#include "vtn/grid.hpp"

#include <cmath>
#include <numeric>

namespace vtn {

namespace {
void check_dims(int w, int h, const char* what) {
  if (w < 1 || h < 1)
    throw std::invalid_argument(std::string(what) + ": dimensions must be positive");
}
}  // namespace

Grid::Grid(int width, int height, int channels, double fill)
    : w_(width), h_(height), c_(channels) {
  check_dims(width, height, "Grid");
  if (channels < 1) throw std::invalid_argument("Grid: channels must be >= 1");
  v_.assign(static_cast<std::size_t>(w_) * h_ * c_, fill);
}

Image::Image(int width, int height, int channels, double fill)
    : w_(width), h_(height), c_(channels) {
  check_dims(width, height, "Image");
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("Image: channels must be 1 or 3");
  if (!(fill >= 0.0 && fill <= 1.0))
    throw std::invalid_argument("Image: fill outside [0, 1]");
  v_.assign(static_cast<std::size_t>(w_) * h_ * c_, fill);
}

void Image::validate() const {
  for (double x : v_)
    if (!std::isfinite(x) || x < 0.0 || x > 1.0)
      throw NumericError("Image: value outside [0, 1]");
}

Grid Image::to_grid() const {
  Grid g(w_, h_, c_);
  std::copy(v_.begin(), v_.end(), g.data());
  return g;
}

FlowField::FlowField(int width, int height, double u0, double v0)
    : w_(width), h_(height) {
  check_dims(width, height, "FlowField");
  const std::size_t n = static_cast<std::size_t>(w_) * h_;
  u_.assign(n, u0);
  v_.assign(n, v0);
}

LabelMap::LabelMap(int width, int height, std::uint16_t fill)
    : w_(width), h_(height) {
  check_dims(width, height, "LabelMap");
  ids_.assign(static_cast<std::size_t>(w_) * h_, fill);
}

Mask::Mask(int width, int height, std::uint8_t fill) : w_(width), h_(height) {
  check_dims(width, height, "Mask");
  if (fill > 1) throw std::invalid_argument("Mask: flags are 0 or 1");
  f_.assign(static_cast<std::size_t>(w_) * h_, fill);
}

std::size_t Mask::count() const {
  return std::accumulate(f_.begin(), f_.end(), std::size_t{0});
}

double Mask::fraction() const {
  return f_.empty() ? 0.0 : static_cast<double>(count()) / f_.size();
}

Logits::Logits(int width, int height, int num_classes, double fill)
    : w_(width), h_(height), c_(num_classes) {
  check_dims(width, height, "Logits");
  if (num_classes < 2)
    throw std::invalid_argument("Logits: need at least 2 classes");
  v_.assign(static_cast<std::size_t>(w_) * h_ * c_, fill);
}

void Logits::validate() const {
  for (double x : v_)
    if (!std::isfinite(x)) throw NumericError("Logits: non-finite value");
}

}  // namespace vtn
