#include "vtn/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vtn {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian");

namespace {

constexpr float kFloTag = 202021.25f;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("short write to " + path);
}

struct PnmHeader {
  int type = 0;  // 5 or 6
  int width = 0, height = 0;
  std::size_t data_offset = 0;
};

// Parses a P5/P6 header out of a raw buffer, tracking byte offsets for
// error messages. Whitespace and # comments are allowed between tokens.
PnmHeader parse_pnm_header(const std::string& buf, const std::string& path) {
  PnmHeader h;
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6'))
    throw FormatError(path + ": not a P5/P6 file (byte 0)");
  h.type = buf[1] - '0';
  std::size_t pos = 2;
  auto next_int = [&](const char* what) -> int {
    for (;;) {
      while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) pos++;
      if (pos < buf.size() && buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') pos++;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(buf.data() + pos, buf.data() + buf.size(), value);
    if (ec != std::errc() || ptr == buf.data() + pos)
      throw FormatError(path + ": bad " + what + " at byte " + std::to_string(start));
    pos = static_cast<std::size_t>(ptr - buf.data());
    return value;
  };
  h.width = next_int("width");
  h.height = next_int("height");
  const std::size_t maxval_at = pos;
  const int maxval = next_int("maxval");
  if (h.width < 1 || h.height < 1)
    throw FormatError(path + ": bad dimensions in header");
  if (maxval != 255)
    throw FormatError(path + ": unsupported maxval at byte " +
                      std::to_string(maxval_at) + " (need 255)");
  if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos])))
    throw FormatError(path + ": missing whitespace after header at byte " +
                      std::to_string(pos));
  pos++;  // single whitespace byte, then raw samples
  h.data_offset = pos;
  const std::size_t ch = h.type == 5 ? 1 : 3;
  const std::size_t need =
      static_cast<std::size_t>(h.width) * h.height * ch;
  if (buf.size() - pos < need)
    throw FormatError(path + ": truncated pixel data at byte " +
                      std::to_string(buf.size()));
  return h;
}

std::string pnm_bytes(int type, int w, int h, const std::uint8_t* data,
                      std::size_t n) {
  std::ostringstream ss;
  ss << 'P' << type << '\n' << w << ' ' << h << '\n' << 255 << '\n';
  ss.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  return ss.str();
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

template <typename T>
T read_le(const std::string& buf, std::size_t at) {
  T v;
  std::memcpy(&v, buf.data() + at, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::string* buf, T v) {
  const char* p = reinterpret_cast<const char*>(&v);
  buf->append(p, sizeof(T));
}

}  // namespace

Image read_image(const std::string& path) {
  const std::string buf = slurp(path);
  const PnmHeader h = parse_pnm_header(buf, path);
  const int ch = h.type == 5 ? 1 : 3;
  Image img(h.width, h.height, ch);
  const auto* src =
      reinterpret_cast<const std::uint8_t*>(buf.data() + h.data_offset);
  for (std::size_t i = 0; i < img.size(); ++i)
    img.data()[i] = src[i] / 255.0;
  return img;
}

void write_image(const Image& img, const std::string& path) {
  img.validate();
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = to_byte(img.data()[i]);
  spill(path, pnm_bytes(img.channels() == 1 ? 5 : 6, img.width(), img.height(),
                        bytes.data(), bytes.size()));
}

LabelMap read_labels(const std::string& path) {
  const std::string buf = slurp(path);
  const PnmHeader h = parse_pnm_header(buf, path);
  if (h.type != 5) throw FormatError(path + ": labels must be P5");
  LabelMap labels(h.width, h.height);
  const auto* src =
      reinterpret_cast<const std::uint8_t*>(buf.data() + h.data_offset);
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x) {
      const std::uint8_t b = src[static_cast<std::size_t>(y) * h.width + x];
      labels.at(x, y) = b == 255 ? LabelMap::kVoid : b;
    }
  return labels;
}

void write_labels(const LabelMap& labels, const std::string& path) {
  std::vector<std::uint8_t> bytes(
      static_cast<std::size_t>(labels.width()) * labels.height());
  for (int y = 0; y < labels.height(); ++y)
    for (int x = 0; x < labels.width(); ++x) {
      const std::uint16_t id = labels.at(x, y);
      if (id != LabelMap::kVoid && id > 254)
        throw std::invalid_argument("write_labels: ids above 254 do not fit P5");
      bytes[static_cast<std::size_t>(y) * labels.width() + x] =
          id == LabelMap::kVoid ? 255 : static_cast<std::uint8_t>(id);
    }
  spill(path, pnm_bytes(5, labels.width(), labels.height(), bytes.data(),
                        bytes.size()));
}

Mask read_mask(const std::string& path) {
  const std::string buf = slurp(path);
  const PnmHeader h = parse_pnm_header(buf, path);
  if (h.type != 5) throw FormatError(path + ": masks must be P5");
  Mask mask(h.width, h.height);
  const auto* src =
      reinterpret_cast<const std::uint8_t*>(buf.data() + h.data_offset);
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * h.width + x;
      if (src[i] != 0 && src[i] != 255)
        throw FormatError(path + ": mask byte not in {0, 255} at byte " +
                          std::to_string(h.data_offset + i));
      mask.at(x, y) = src[i] == 255 ? 1 : 0;
    }
  return mask;
}

void write_mask(const Mask& mask, const std::string& path) {
  std::vector<std::uint8_t> bytes(
      static_cast<std::size_t>(mask.width()) * mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      bytes[static_cast<std::size_t>(y) * mask.width() + x] =
          mask.at(x, y) ? 255 : 0;
  spill(path, pnm_bytes(5, mask.width(), mask.height(), bytes.data(),
                        bytes.size()));
}

FlowField read_flo(const std::string& path) {
  const std::string buf = slurp(path);
  if (buf.size() < 12)
    throw FormatError(path + ": truncated header at byte " +
                      std::to_string(buf.size()));
  const float tag = read_le<float>(buf, 0);
  if (tag != kFloTag)
    throw FormatError(path + ": bad magic at byte 0 (expected 202021.25)");
  const std::int32_t w = read_le<std::int32_t>(buf, 4);
  const std::int32_t h = read_le<std::int32_t>(buf, 8);
  if (w < 1 || w > (1 << 20))
    throw FormatError(path + ": implausible width at byte 4");
  if (h < 1 || h > (1 << 20))
    throw FormatError(path + ": implausible height at byte 8");
  const std::size_t expected =
      12 + static_cast<std::size_t>(w) * h * 2 * sizeof(float);
  if (buf.size() < expected)
    throw FormatError(path + ": truncated data at byte " +
                      std::to_string(buf.size()));
  if (buf.size() > expected)
    throw FormatError(path + ": trailing bytes at byte " +
                      std::to_string(expected));
  FlowField flow(w, h);
  std::size_t at = 12;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float fu = read_le<float>(buf, at);
      const float fv = read_le<float>(buf, at + 4);
      if (!std::isfinite(fu) || !std::isfinite(fv))
        throw FormatError(path + ": non-finite flow at byte " +
                          std::to_string(at));
      flow.u(x, y) = fu;
      flow.v(x, y) = fv;
      at += 8;
    }
  return flow;
}

void write_flo(const FlowField& flow, const std::string& path) {
  std::string buf;
  buf.reserve(12 + flow.pixels() * 8);
  append_le(&buf, kFloTag);
  append_le(&buf, static_cast<std::int32_t>(flow.width()));
  append_le(&buf, static_cast<std::int32_t>(flow.height()));
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      if (!std::isfinite(flow.u(x, y)) || !std::isfinite(flow.v(x, y)))
        throw FormatError(path + ": refusing to write non-finite flow at (" +
                          std::to_string(x) + ", " + std::to_string(y) + ")");
      append_le(&buf, static_cast<float>(flow.u(x, y)));
      append_le(&buf, static_cast<float>(flow.v(x, y)));
    }
  spill(path, buf);
}

Logits read_logits(const std::string& path) {
  const std::string buf = slurp(path);
  if (buf.size() < 20)
    throw FormatError(path + ": truncated header at byte " +
                      std::to_string(buf.size()));
  if (std::memcmp(buf.data(), "MLTN", 4) != 0)
    throw FormatError(path + ": bad magic at byte 0");
  const std::uint32_t version = read_le<std::uint32_t>(buf, 4);
  if (version != 1)
    throw FormatError(path + ": unsupported version at byte 4");
  const std::uint32_t h = read_le<std::uint32_t>(buf, 8);
  const std::uint32_t w = read_le<std::uint32_t>(buf, 12);
  const std::uint32_t c = read_le<std::uint32_t>(buf, 16);
  if (h < 1 || h > (1u << 20))
    throw FormatError(path + ": implausible height at byte 8");
  if (w < 1 || w > (1u << 20))
    throw FormatError(path + ": implausible width at byte 12");
  if (c < 2 || c > (1u << 16))
    throw FormatError(path + ": implausible channel count at byte 16");
  const std::size_t expected =
      20 + static_cast<std::size_t>(w) * h * c * sizeof(float);
  if (buf.size() < expected)
    throw FormatError(path + ": truncated data at byte " +
                      std::to_string(buf.size()));
  if (buf.size() > expected)
    throw FormatError(path + ": trailing bytes at byte " +
                      std::to_string(expected));
  Logits out(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  std::size_t at = 20;
  for (std::size_t i = 0; i < out.size(); ++i, at += 4) {
    const float v = read_le<float>(buf, at);
    if (!std::isfinite(v))
      throw FormatError(path + ": non-finite value at byte " +
                        std::to_string(at));
    out.data()[i] = v;
  }
  return out;
}

void write_logits(const Logits& logits, const std::string& path) {
  logits.validate();
  std::string buf;
  buf.reserve(20 + logits.size() * 4);
  buf.append("MLTN", 4);
  append_le(&buf, std::uint32_t{1});
  append_le(&buf, static_cast<std::uint32_t>(logits.height()));
  append_le(&buf, static_cast<std::uint32_t>(logits.width()));
  append_le(&buf, static_cast<std::uint32_t>(logits.num_classes()));
  for (std::size_t i = 0; i < logits.size(); ++i)
    append_le(&buf, static_cast<float>(logits.data()[i]));
  spill(path, buf);
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  const std::string buf = slurp(path);
  std::vector<std::vector<double>> rows;
  std::size_t line_start = 0;
  int line_no = 0;
  while (line_start <= buf.size()) {
    std::size_t line_end = buf.find('\n', line_start);
    if (line_end == std::string::npos) line_end = buf.size();
    std::string_view line(buf.data() + line_start, line_end - line_start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line_no++;
    if (!line.empty()) {
      std::vector<double> row;
      std::size_t at = 0;
      while (at <= line.size()) {
        std::size_t comma = line.find(',', at);
        if (comma == std::string_view::npos) comma = line.size();
        double value = 0.0;
        const char* first = line.data() + at;
        const char* last = line.data() + comma;
        while (first < last && *first == ' ') first++;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last)
          throw FormatError(path + ": bad number on line " +
                            std::to_string(line_no));
        row.push_back(value);
        if (comma == line.size()) break;
        at = comma + 1;
      }
      if (!rows.empty() && row.size() != rows.front().size())
        throw FormatError(path + ": ragged row on line " + std::to_string(line_no));
      rows.push_back(std::move(row));
    }
    if (line_end == buf.size()) break;
    line_start = line_end + 1;
  }
  if (rows.empty()) throw FormatError(path + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_csv_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  std::ostringstream ss;
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) ss << ',';
      ss << buf;
    }
    ss << '\n';
  }
  spill(path, ss.str());
}

DepthClip read_depth_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw FormatError("cannot open directory " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw FormatError("no .pgm frames in " + dir);
  DepthClip clip;
  for (const std::string& p : paths) {
    Image img = read_image(p);
    if (img.channels() != 1) throw FormatError(p + ": depth frames must be P5");
    clip.frames.push_back(img.to_grid());
  }
  clip.validate();
  return clip;
}

std::size_t write_depth_frame(const Grid& frame, const std::string& path) {
  if (frame.channels() != 1)
    throw std::invalid_argument("write_depth_frame: one channel expected");
  std::vector<std::uint8_t> bytes(frame.size());
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    double v = frame.data()[i];
    if (v < 0.0 || v > 1.0) {
      v = std::clamp(v, 0.0, 1.0);
      clipped++;
    }
    bytes[i] = to_byte(v);
  }
  spill(path, pnm_bytes(5, frame.width(), frame.height(), bytes.data(),
                        bytes.size()));
  return clipped;
}

void write_quantized_flow(const QuantizedFlow& q, const std::string& u_path,
                          const std::string& v_path) {
  spill(u_path, pnm_bytes(5, q.width, q.height, q.u.data(), q.u.size()));
  spill(v_path, pnm_bytes(5, q.width, q.height, q.v.data(), q.v.size()));
}

}  // namespace vtn
