#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "vtn/errors.hpp"

namespace vtn {

// Dense 2-D array of doubles with interleaved channels, row major.
// No range constraint; used for loss maps, jacobians, depth frames.
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, int channels = 1, double fill = 0.0);

  int width() const { return w_; }
  int height() const { return h_; }
  int channels() const { return c_; }

  double& at(int x, int y, int c = 0) { return v_[idx(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return v_[idx(x, y, c)]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::size_t size() const { return v_.size(); }

  bool same_shape(const Grid& o) const {
    return w_ == o.w_ && h_ == o.h_ && c_ == o.c_;
  }

  std::size_t idx(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * w_ + x) * c_ + c;
  }

 private:
  int w_ = 0, h_ = 0, c_ = 1;
  std::vector<double> v_;
};

// Intensity raster, 1 (gray) or 3 (rgb) channels, values in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  int width() const { return w_; }
  int height() const { return h_; }
  int channels() const { return c_; }

  double& at(int x, int y, int c = 0) { return v_[idx(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return v_[idx(x, y, c)]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::size_t size() const { return v_.size(); }

  bool same_shape(const Image& o) const {
    return w_ == o.w_ && h_ == o.h_ && c_ == o.c_;
  }

  std::size_t idx(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * w_ + x) * c_ + c;
  }

  // Throws NumericError if any value is non-finite or outside [0, 1].
  void validate() const;

  Grid to_grid() const;

 private:
  int w_ = 0, h_ = 0, c_ = 1;
  std::vector<double> v_;
};

// Per-pixel displacement. u is the horizontal component (positive points
// right, along columns), v the vertical one (positive points down).
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height, double u0 = 0.0, double v0 = 0.0);

  int width() const { return w_; }
  int height() const { return h_; }

  double& u(int x, int y) { return u_[plane_idx(x, y)]; }
  double u(int x, int y) const { return u_[plane_idx(x, y)]; }
  double& v(int x, int y) { return v_[plane_idx(x, y)]; }
  double v(int x, int y) const { return v_[plane_idx(x, y)]; }

  double* u_data() { return u_.data(); }
  const double* u_data() const { return u_.data(); }
  double* v_data() { return v_.data(); }
  const double* v_data() const { return v_.data(); }

  std::size_t pixels() const { return u_.size(); }
  bool same_shape(const FlowField& o) const { return w_ == o.w_ && h_ == o.h_; }

  std::size_t plane_idx(int x, int y) const {
    return static_cast<std::size_t>(y) * w_ + x;
  }

 private:
  int w_ = 0, h_ = 0;
  std::vector<double> u_, v_;
};

// Per-pixel class ids in [0, C) plus a reserved sentinel for pixels with
// no label (outside the grid after warping, unlabeled ground truth).
class LabelMap {
 public:
  static constexpr std::uint16_t kVoid = std::numeric_limits<std::uint16_t>::max();

  LabelMap() = default;
  LabelMap(int width, int height, std::uint16_t fill = kVoid);

  int width() const { return w_; }
  int height() const { return h_; }

  std::uint16_t& at(int x, int y) { return ids_[plane_idx(x, y)]; }
  std::uint16_t at(int x, int y) const { return ids_[plane_idx(x, y)]; }

  bool same_shape(const LabelMap& o) const { return w_ == o.w_ && h_ == o.h_; }

  std::size_t plane_idx(int x, int y) const {
    return static_cast<std::size_t>(y) * w_ + x;
  }

 private:
  int w_ = 0, h_ = 0;
  std::vector<std::uint16_t> ids_;
};

// Binary raster. Occlusion ops set 1 = occluded; metric ops that take a
// validity mask read 1 = counted.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, std::uint8_t fill = 0);

  int width() const { return w_; }
  int height() const { return h_; }

  std::uint8_t& at(int x, int y) { return f_[plane_idx(x, y)]; }
  std::uint8_t at(int x, int y) const { return f_[plane_idx(x, y)]; }

  std::size_t count() const;  // number of set flags
  double fraction() const;    // count / pixels

  bool same_shape(const Mask& o) const { return w_ == o.w_ && h_ == o.h_; }

  std::size_t plane_idx(int x, int y) const {
    return static_cast<std::size_t>(y) * w_ + x;
  }

 private:
  int w_ = 0, h_ = 0;
  std::vector<std::uint8_t> f_;
};

// Per-pixel class scores, C >= 2 channels, channel fastest in memory.
class Logits {
 public:
  Logits() = default;
  Logits(int width, int height, int num_classes, double fill = 0.0);

  int width() const { return w_; }
  int height() const { return h_; }
  int num_classes() const { return c_; }

  double& at(int x, int y, int c) { return v_[idx(x, y, c)]; }
  double at(int x, int y, int c) const { return v_[idx(x, y, c)]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::size_t size() const { return v_.size(); }

  // Throws NumericError on non-finite entries.
  void validate() const;

  std::size_t idx(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * w_ + x) * c_ + c;
  }

 private:
  int w_ = 0, h_ = 0, c_ = 0;
  std::vector<double> v_;
};

}  // namespace vtn
