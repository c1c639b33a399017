#pragma once

#include <Eigen/Dense>
#include <string>

#include "vtn/grid.hpp"
#include "vtn/sampling.hpp"
#include "vtn/warp.hpp"

namespace vtn {

// 8-bit netpbm rasters: P5 (gray) and P6 (rgb), maxval 255, intensities
// loaded as value / 255. Errors carry the path and byte offset.
Image read_image(const std::string& path);
void write_image(const Image& img, const std::string& path);

// Labels ride in P5 with 255 reserved for void; writable ids are 0..254.
LabelMap read_labels(const std::string& path);
void write_labels(const LabelMap& labels, const std::string& path);

// Binary masks in P5, strictly {0, 255}.
Mask read_mask(const std::string& path);
void write_mask(const Mask& mask, const std::string& path);

// Flow container: float tag 202021.25, little-endian i32 width and height,
// then row-major interleaved float32 (u, v).
FlowField read_flo(const std::string& path);
void write_flo(const FlowField& flow, const std::string& path);

// Per-pixel class scores: magic "MLTN", u32 version 1, u32 height, width,
// channels, then float32 row major, channel fastest. Little endian.
Logits read_logits(const std::string& path);
void write_logits(const Logits& logits, const std::string& path);

// Headerless CSV, one row per line; rows are feature dimensions, columns
// samples.
Eigen::MatrixXd read_csv_matrix(const std::string& path);
void write_csv_matrix(const Eigen::MatrixXd& m, const std::string& path);

// All *.pgm files in a directory, lexicographic order, as a depth clip.
DepthClip read_depth_dir(const std::string& dir);

// Depth values clamp to [0, 1] on the way back to 8 bits; returns the
// number of clipped pixels.
std::size_t write_depth_frame(const Grid& frame, const std::string& path);

// Quantized flow as two P5 rasters.
void write_quantized_flow(const QuantizedFlow& q, const std::string& u_path,
                          const std::string& v_path);

}  // namespace vtn
