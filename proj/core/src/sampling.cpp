#include "vtn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "vtn/rng.hpp"

namespace vtn {

void DepthClip::validate() const {
  if (frames.empty()) throw std::invalid_argument("DepthClip: no frames");
  const Grid& first = frames.front();
  if (first.channels() != 1)
    throw std::invalid_argument("DepthClip: frames must have one channel");
  for (const Grid& f : frames) {
    if (!f.same_shape(first)) throw ShapeError("DepthClip: frame shapes differ");
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double v = f.data()[i];
      if (!std::isfinite(v) || v < 0.0)
        throw NumericError("DepthClip: depth values must be finite and >= 0");
    }
  }
}

std::vector<int> rts_indices(int num_frames, int num_steps, int max_stride,
                             std::uint64_t seed) {
  if (num_frames < 1)
    throw std::invalid_argument("rts_indices: need at least one frame");
  if (num_steps < 1)
    throw std::invalid_argument("rts_indices: need at least one step");
  if (max_stride < 0)
    throw std::invalid_argument("rts_indices: max_stride must be >= 0");

  Rng rng(seed);
  auto draw = [&](int cap, std::vector<int>* out) -> bool {
    out->clear();
    int pos = static_cast<int>(rng.uniform_int(0, num_frames - 1));
    out->push_back(pos);
    for (int i = 0; i < num_steps; ++i) {
      pos += static_cast<int>(rng.uniform_int(0, cap));
      out->push_back(pos);
    }
    return pos < num_frames;
  };

  std::vector<int> indices;
  for (int attempt = 0; attempt < 100; ++attempt)
    if (draw(max_stride, &indices)) return indices;
  for (int cap = std::max(max_stride - 1, 0); cap >= 0; --cap)
    if (draw(cap, &indices)) return indices;
  // cap 0 always fits: the sequence collapses onto the start frame.
  throw NumericError("rts_indices: unreachable");
}

namespace {

struct Centroid {
  int image_index;
  double cx, cy;
};

// Connected components of equal non-void label, 4-connectivity, discovered
// in row-major order so results are stable.
void collect_centroids(const LabelMap& labels, int image_index,
                       int num_classes,
                       std::vector<std::vector<Centroid>>* per_class) {
  const int w = labels.width(), h = labels.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t start = labels.plane_idx(x, y);
      if (seen[start]) continue;
      const std::uint16_t id = labels.at(x, y);
      seen[start] = 1;
      if (id == LabelMap::kVoid) continue;
      if (id >= num_classes)
        throw std::invalid_argument("class_uniform_crops: label id outside the class range");
      double sx = 0.0, sy = 0.0;
      std::size_t n = 0;
      queue.clear();
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        auto [px, py] = queue.front();
        queue.pop_front();
        sx += px;
        sy += py;
        n++;
        const int nx4[4] = {px + 1, px - 1, px, px};
        const int ny4[4] = {py, py, py + 1, py - 1};
        for (int k = 0; k < 4; ++k) {
          const int nx = nx4[k], ny = ny4[k];
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          const std::size_t ni = labels.plane_idx(nx, ny);
          if (seen[ni] || labels.at(nx, ny) != id) continue;
          seen[ni] = 1;
          queue.emplace_back(nx, ny);
        }
      }
      (*per_class)[id].push_back({image_index, sx / n, sy / n});
    }
  }
}

}  // namespace

CropResult class_uniform_crops(const std::vector<LabelMap>& labels,
                               int crop_size, int num_classes, int count,
                               std::uint64_t seed) {
  if (labels.empty())
    throw std::invalid_argument("class_uniform_crops: no label maps");
  if (crop_size < 1)
    throw std::invalid_argument("class_uniform_crops: crop size must be >= 1");
  if (num_classes < 1)
    throw std::invalid_argument("class_uniform_crops: need at least one class");
  if (count < 0)
    throw std::invalid_argument("class_uniform_crops: count must be >= 0");
  for (const LabelMap& m : labels)
    if (m.width() < crop_size || m.height() < crop_size)
      throw std::invalid_argument("class_uniform_crops: crop larger than image");

  std::vector<std::vector<Centroid>> per_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i)
    collect_centroids(labels[i], static_cast<int>(i), num_classes, &per_class);

  std::vector<int> present;
  for (int c = 0; c < num_classes; ++c)
    if (!per_class[c].empty()) present.push_back(c);

  Rng rng(seed);
  CropResult out;
  out.no_class_found = present.empty();

  const int n_random = out.no_class_found ? count : count / 2;
  const int n_centroid = count - n_random;

  auto random_crop = [&]() {
    const int img = static_cast<int>(rng.uniform_int(0, static_cast<int>(labels.size()) - 1));
    const int x = static_cast<int>(rng.uniform_int(0, labels[img].width() - crop_size));
    const int y = static_cast<int>(rng.uniform_int(0, labels[img].height() - crop_size));
    out.crops.push_back({img, x, y, crop_size, crop_size});
  };

  for (int i = 0; i < n_random; ++i) random_crop();

  std::vector<std::size_t> next(num_classes, 0);
  for (int i = 0; i < n_centroid; ++i) {
    const int cls = present[i % present.size()];
    const auto& list = per_class[cls];
    const Centroid& c = list[next[cls] % list.size()];
    next[cls]++;
    const LabelMap& m = labels[c.image_index];
    const int x = std::clamp(static_cast<int>(std::lround(c.cx)) - crop_size / 2,
                             0, m.width() - crop_size);
    const int y = std::clamp(static_cast<int>(std::lround(c.cy)) - crop_size / 2,
                             0, m.height() - crop_size);
    out.crops.push_back({c.image_index, x, y, crop_size, crop_size});
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  if (!(p >= 0.0 && p <= 100.0))
    throw std::invalid_argument("percentile: p must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - lo;
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

StdnResult stdn(const DepthClip& clip, int window) {
  clip.validate();
  if (window < 1) throw std::invalid_argument("stdn: window must be >= 1");

  const int num = static_cast<int>(clip.frames.size());
  const int h = clip.frames.front().height();
  const int w = clip.frames.front().width();

  // Horizontal thirds; integer remainder rows go to the bottom band.
  const int t1 = h / 3;
  const int row_begin[3] = {0, t1, 2 * t1};
  const int row_end[3] = {t1, 2 * t1, h};

  StdnResult out;
  out.clip = clip;

  std::vector<double> pool, frame_vals;
  for (int wb = 0; wb < num; wb += window) {
    const int we = std::min(wb + window, num);
    for (int band = 0; band < 3; ++band) {
      const int rb = row_begin[band], re = row_end[band];
      if (rb >= re) continue;
      pool.clear();
      for (int f = wb; f < we; ++f)
        for (int y = rb; y < re; ++y)
          for (int x = 0; x < w; ++x) pool.push_back(clip.frames[f].at(x, y));
      const double target = percentile(pool, 95.0);
      for (int f = wb; f < we; ++f) {
        frame_vals.clear();
        for (int y = rb; y < re; ++y)
          for (int x = 0; x < w; ++x)
            frame_vals.push_back(clip.frames[f].at(x, y));
        const double fp = percentile(frame_vals, 95.0);
        double scale = 1.0;
        if (fp > 0.0) {
          scale = target / fp;
        } else {
          out.zero_percentile = true;
        }
        if (scale != 1.0)
          for (int y = rb; y < re; ++y)
            for (int x = 0; x < w; ++x) out.clip.frames[f].at(x, y) *= scale;
      }
    }
  }
  return out;
}

Grid mdmm(const DepthClip& clip, int t_start, int num_steps) {
  clip.validate();
  if (t_start < 0 || num_steps < 1 ||
      t_start + num_steps >= static_cast<int>(clip.frames.size()))
    throw std::invalid_argument("mdmm: frame range outside the clip");
  const Grid& first = clip.frames.front();
  Grid out(first.width(), first.height());
  for (int k = 0; k < num_steps; ++k) {
    const Grid& a = clip.frames[t_start + k];
    const Grid& b = clip.frames[t_start + k + 1];
    for (std::size_t i = 0; i < out.size(); ++i)
      out.data()[i] += std::abs(b.data()[i] - a.data()[i]);
  }
  return out;
}

}  // namespace vtn
