#include "vtn/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "vtn/errors.hpp"

namespace vtn {

namespace {

[[noreturn]] void fail(const std::string& what, int line) {
  std::string msg = "config: " + what;
  if (line > 0) msg += " on line " + std::to_string(line);
  throw FormatError(msg);
}

double parse_double(const std::string& v, const std::string& key, int line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail("bad number for '" + key + "'", line);
  return out;
}

long long parse_int(const std::string& v, const std::string& key, int line) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail("bad integer for '" + key + "'", line);
  return out;
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail("bad boolean for '" + key + "' (use true/false)", line);
}

const std::set<std::string>& path_keys() {
  static const std::set<std::string> keys = {
      "image",  "image2",     "flow",   "flow2",  "gt",       "labels",
      "logits", "valid",      "out",    "out2",   "trace",    "frames_dir",
      "visual", "semantic",   "factors", "prototypes", "test", "out_prefix",
      "projection",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value, int line) {
  if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(value, key, line));
    cfg.solver.seed = cfg.seed;
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_int(value, key, line));
  } else if (key == "lambda1") {
    cfg.solver.weights.lambda1 = parse_double(value, key, line);
  } else if (key == "lambda2") {
    cfg.solver.weights.lambda2 = parse_double(value, key, line);
  } else if (key == "lambda3") {
    cfg.solver.weights.lambda3 = parse_double(value, key, line);
  } else if (key == "alpha_pixel") {
    cfg.solver.weights.alpha_pixel = parse_double(value, key, line);
  } else if (key == "alpha_smooth") {
    cfg.solver.weights.alpha_smooth = parse_double(value, key, line);
  } else if (key == "epsilon") {
    cfg.solver.weights.epsilon = parse_double(value, key, line);
  } else if (key == "delta") {
    std::vector<double> deltas;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
      deltas.push_back(parse_double(trim(item), key, line));
    if (deltas.empty()) fail("empty delta list", line);
    cfg.solver.weights.delta = std::move(deltas);
  } else if (key == "pyramid_levels") {
    cfg.solver.pyramid_levels = static_cast<int>(parse_int(value, key, line));
  } else if (key == "scale_factor") {
    cfg.solver.scale_factor = parse_double(value, key, line);
  } else if (key == "iters_per_level") {
    cfg.solver.iters_per_level = static_cast<int>(parse_int(value, key, line));
  } else if (key == "step") {
    cfg.solver.step = parse_double(value, key, line);
  } else if (key == "smooth_order") {
    cfg.solver.smooth_order = static_cast<int>(parse_int(value, key, line));
  } else if (key == "use_ssim") {
    cfg.solver.use_ssim = parse_bool(value, key, line);
  } else if (key == "bidirectional") {
    cfg.solver.bidirectional = parse_bool(value, key, line);
  } else if (key == "occlusion_second_pass") {
    cfg.solver.occlusion_second_pass = parse_bool(value, key, line);
  } else if (key == "occ_alpha1") {
    cfg.solver.occ_alpha1 = parse_double(value, key, line);
  } else if (key == "occ_alpha2") {
    cfg.solver.occ_alpha2 = parse_double(value, key, line);
  } else if (key == "cap") {
    cfg.cap = parse_double(value, key, line);
  } else if (key == "max_mag") {
    cfg.max_mag = parse_double(value, key, line);
  } else if (key == "window") {
    cfg.window = static_cast<int>(parse_int(value, key, line));
  } else if (key == "guided_lambda") {
    cfg.guided_lambda = parse_double(value, key, line);
  } else if (path_keys().count(key)) {
    cfg.paths[key] = value;
  } else {
    fail("unknown key '" + key + "'", line);
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path);
  RunConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(f, raw)) {
    line_no++;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key", line_no);
    apply_config_entry(cfg, key, value, line_no);
  }
  return cfg;
}

}  // namespace vtn
