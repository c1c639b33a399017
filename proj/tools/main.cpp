// Command-line front end. Every subcommand reads its inputs from files,
// writes declared outputs, and prints machine-readable `name=value` lines
// on stdout; prose goes to stderr. Exit codes: 0 ok, 1 usage, 2 malformed
// or missing files, 3 numeric failure.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "vtn/config.hpp"
#include "vtn/errors.hpp"
#include "vtn/grid.hpp"
#include "vtn/io.hpp"
#include "vtn/losses.hpp"
#include "vtn/occlusion.hpp"
#include "vtn/parallel.hpp"
#include "vtn/propagate.hpp"
#include "vtn/sampling.hpp"
#include "vtn/solver.hpp"
#include "vtn/url.hpp"
#include "vtn/visualize.hpp"
#include "vtn/warp.hpp"

namespace {

void print_kv(const char* name, double v) { std::printf("%s=%.9g\n", name, v); }
void print_kv(const char* name, long long v) { std::printf("%s=%lld\n", name, v); }
void print_kv(const char* name, const std::string& v) {
  std::printf("%s=%s\n", name, v.c_str());
}

std::string join_ints(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

// Binds command-line flags to run-config keys so a settings file and
// explicit flags share one parser; flags given on the command line win.
class Settings {
 public:
  explicit Settings(CLI::App* sub) : sub_(sub) {
    sub_->add_option("--config", config_path_,
                     "key = value settings file, applied before flags");
    opt("--threads", "threads", "worker threads for per-pixel stages");
  }

  CLI::Option* opt(const std::string& flag, const std::string& key,
                   const std::string& desc) {
    auto* o = sub_->add_option(flag, store_[key], desc);
    entries_.push_back({key, o, false});
    return o;
  }

  CLI::Option* toggle(const std::string& flag, const std::string& key,
                      const std::string& desc) {
    auto* o = sub_->add_flag(flag, desc);
    entries_.push_back({key, o, true});
    return o;
  }

  vtn::RunConfig resolve() const {
    vtn::RunConfig cfg;
    if (!config_path_.empty()) cfg = vtn::parse_config_file(config_path_);
    for (const auto& e : entries_)
      if (e.option->count() > 0) {
        const std::string v = e.is_flag ? "true" : store_.at(e.key);
        try {
          vtn::apply_config_entry(cfg, e.key, v, 0);
        } catch (const vtn::FormatError& err) {
          throw std::invalid_argument(err.what());
        }
      }
    vtn::set_num_threads(cfg.threads);
    return cfg;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    bool is_flag;
  };

  CLI::App* sub_;
  std::string config_path_;
  std::map<std::string, std::string> store_;  // node-based: stable refs
  std::vector<Entry> entries_;
};

using SettingsPtr = std::shared_ptr<Settings>;

std::string opt_path(const vtn::RunConfig& cfg, const std::string& key) {
  const auto it = cfg.paths.find(key);
  return it == cfg.paths.end() ? std::string() : it->second;
}

std::string need_path(const vtn::RunConfig& cfg, const std::string& key,
                      const char* flag) {
  std::string p = opt_path(cfg, key);
  if (p.empty())
    throw std::invalid_argument(std::string("missing required ") + flag +
                                " (config key '" + key + "')");
  return p;
}

void add_loss_knobs(Settings& st) {
  st.opt("--lambda1", "lambda1", "photometric weight");
  st.opt("--lambda2", "lambda2", "smoothness weight");
  st.opt("--lambda3", "lambda3", "patch-similarity weight");
  st.opt("--alpha-pixel", "alpha_pixel", "robust exponent, photometric");
  st.opt("--alpha-smooth", "alpha_smooth", "robust exponent, smoothness");
  st.opt("--epsilon", "epsilon", "robust penalty floor");
  st.opt("--smooth-order", "smooth_order", "difference order (1 or 2)");
  st.toggle("--ssim", "use_ssim", "add the patch-similarity term");
}

void add_solver_knobs(Settings& st) {
  add_loss_knobs(st);
  st.opt("--levels", "pyramid_levels", "pyramid levels");
  st.opt("--scale-factor", "scale_factor", "per-level shrink factor");
  st.opt("--iters", "iters_per_level", "descent iterations per level");
  st.opt("--step", "step", "initial gradient step");
  st.opt("--seed", "seed", "run seed");
  st.toggle("--bidirectional", "bidirectional", "solve both directions");
  st.toggle("--second-pass", "occlusion_second_pass",
            "re-run the finest level with occluded pixels masked out");
  st.opt("--occ-alpha1", "occ_alpha1", "consistency slope");
  st.opt("--occ-alpha2", "occ_alpha2", "consistency offset");
}

void register_warp(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "warp", "inverse-warp an image (and optionally labels) by a flow");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--i1", "image", "image to reconstruct (pgm/ppm)");
  st->opt("--flow", "flow", "flow field (.flo)");
  st->opt("--out", "out", "warped image output");
  st->opt("--labels", "labels", "label map warped alongside");
  st->opt("--out-labels", "out2", "warped label output");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto img = vtn::read_image(need_path(cfg, "image", "--i1"));
    const auto flow = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    vtn::write_image(vtn::inverse_warp(img, flow),
                     need_path(cfg, "out", "--out"));
    const std::string lp = opt_path(cfg, "labels");
    if (!lp.empty())
      vtn::write_labels(vtn::nn_warp_labels(vtn::read_labels(lp), flow),
                        need_path(cfg, "out2", "--out-labels"));
  });
}

void register_propagate(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "propagate", "warp an image and its labels with the same flow");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--i1", "image", "image (pgm/ppm)");
  st->opt("--labels", "labels", "label map (pgm, 255 = void)");
  st->opt("--flow", "flow", "flow field (.flo)");
  st->opt("--out", "out", "propagated image output");
  st->opt("--out-labels", "out2", "propagated label output");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto img = vtn::read_image(need_path(cfg, "image", "--i1"));
    const auto labels = vtn::read_labels(need_path(cfg, "labels", "--labels"));
    const auto flow = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    const auto prop = vtn::joint_propagate(img, labels, flow);
    vtn::write_image(prop.image, need_path(cfg, "out", "--out"));
    vtn::write_labels(prop.labels, need_path(cfg, "out2", "--out-labels"));
  });
}

void register_loss(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "loss", "reconstruction + smoothness (+ patch similarity) of a flow");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--i1", "image", "first frame");
  st->opt("--i2", "image2", "second frame");
  st->opt("--flow", "flow", "flow field (.flo)");
  add_loss_knobs(*st);
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto i1 = vtn::read_image(need_path(cfg, "image", "--i1"));
    const auto i2 = vtn::read_image(need_path(cfg, "image2", "--i2"));
    const auto flow = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    const auto& w = cfg.solver.weights;
    const auto pixel = vtn::pixel_loss(i1, i2, flow, w);
    const auto smooth =
        vtn::smoothness_loss(flow, w, cfg.solver.smooth_order);
    std::optional<double> ssim;
    if (cfg.solver.use_ssim)
      ssim = vtn::ssim_loss(i1, vtn::inverse_warp(i2, flow)).value;
    const auto report = vtn::scale_loss(pixel.value, smooth.value, ssim, w);
    for (const auto& t : report.terms) print_kv(t.name.c_str(), t.raw);
    print_kv("total", report.total);
  });
}

void register_occlusion(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "occlusion", "forward-backward consistency masks for a flow pair");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--flow", "flow", "forward flow (.flo)");
  st->opt("--flow2", "flow2", "backward flow (.flo)");
  st->opt("--out", "out", "forward mask output (pgm)");
  st->opt("--out2", "out2", "backward mask output (pgm)");
  st->opt("--occ-alpha1", "occ_alpha1", "consistency slope");
  st->opt("--occ-alpha2", "occ_alpha2", "consistency offset");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto fwd = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    const auto bwd = vtn::read_flo(need_path(cfg, "flow2", "--flow2"));
    const auto fwd_occ =
        vtn::occlusion_mask(fwd, bwd, cfg.solver.occ_alpha1, cfg.solver.occ_alpha2);
    const auto bwd_occ =
        vtn::occlusion_mask(bwd, fwd, cfg.solver.occ_alpha1, cfg.solver.occ_alpha2);
    const std::string fo = opt_path(cfg, "out"), bo = opt_path(cfg, "out2");
    if (!fo.empty()) vtn::write_mask(fwd_occ, fo);
    if (!bo.empty()) vtn::write_mask(bwd_occ, bo);
    print_kv("forward_fraction", fwd_occ.fraction());
    print_kv("backward_fraction", bwd_occ.fraction());
  });
}

void register_solve(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "solve", "estimate flow between two frames, coarse to fine");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--i1", "image", "first frame");
  st->opt("--i2", "image2", "second frame");
  st->opt("--out", "out", "flow output (.flo)");
  st->opt("--out2", "out2", "backward flow output (bidirectional only)");
  st->opt("--trace", "trace", "objective trace output (csv)");
  st->opt("--gt", "gt", "ground-truth flow for an endpoint-error line");
  add_solver_knobs(*st);
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto i1 = vtn::read_image(need_path(cfg, "image", "--i1"));
    const auto i2 = vtn::read_image(need_path(cfg, "image2", "--i2"));
    const auto res = cfg.solver.bidirectional
                         ? vtn::solve_bidirectional(i1, i2, cfg.solver)
                         : vtn::solve_flow(i1, i2, cfg.solver);
    vtn::write_flo(res.flow, need_path(cfg, "out", "--out"));
    const std::string out2 = opt_path(cfg, "out2");
    if (!out2.empty() && res.backward_flow)
      vtn::write_flo(*res.backward_flow, out2);
    const std::string tp = opt_path(cfg, "trace");
    if (!tp.empty()) {
      std::ofstream f(tp);
      if (!f) throw vtn::FormatError("cannot open " + tp);
      vtn::write_trace_csv(res.trace, f);
    }
    long long iters = static_cast<long long>(res.trace.size());
    if (res.backward_trace)
      iters += static_cast<long long>(res.backward_trace->size());
    print_kv("iterations", iters);
    if (!res.trace.empty()) print_kv("total", res.trace.back().total);
    if (res.forward_occlusion)
      print_kv("occluded_fraction", res.forward_occlusion->fraction());
    const std::string gt = opt_path(cfg, "gt");
    if (!gt.empty()) print_kv("epe", vtn::epe(res.flow, vtn::read_flo(gt)));
  });
}

void register_epe(CLI::App& app) {
  auto* sub =
      app.add_subcommand("epe", "mean endpoint error against a reference");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--flow", "flow", "estimated flow (.flo)");
  st->opt("--gt", "gt", "reference flow (.flo)");
  st->opt("--valid", "valid", "mask of pixels to score (pgm)");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto flow = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    const auto gt = vtn::read_flo(need_path(cfg, "gt", "--gt"));
    const std::string vp = opt_path(cfg, "valid");
    if (vp.empty()) {
      print_kv("epe", vtn::epe(flow, gt));
    } else {
      const auto valid = vtn::read_mask(vp);
      print_kv("epe", vtn::epe(flow, gt, &valid));
    }
  });
}

void register_fl(CLI::App& app) {
  auto* sub = app.add_subcommand("fl", "flow outlier fraction");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--flow", "flow", "estimated flow (.flo)");
  st->opt("--gt", "gt", "reference flow (.flo)");
  st->opt("--valid", "valid", "mask of pixels to score (pgm)");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto flow = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    const auto gt = vtn::read_flo(need_path(cfg, "gt", "--gt"));
    const std::string vp = opt_path(cfg, "valid");
    if (vp.empty()) {
      print_kv("fl", vtn::fl_outliers(flow, gt));
    } else {
      const auto valid = vtn::read_mask(vp);
      print_kv("fl", vtn::fl_outliers(flow, gt, &valid));
    }
  });
}

void register_miou(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "miou", "mean intersection over union of two label maps");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--pred", "labels", "predicted labels (pgm)");
  st->opt("--gt", "gt", "ground-truth labels (pgm, 255 = void)");
  auto classes = std::make_shared<int>(0);
  sub->add_option("--classes", *classes, "number of classes")->required();
  sub->callback([st, classes] {
    const auto cfg = st->resolve();
    const auto pred = vtn::read_labels(need_path(cfg, "labels", "--pred"));
    const auto gt = vtn::read_labels(need_path(cfg, "gt", "--gt"));
    const auto res = vtn::miou(pred, gt, *classes);
    print_kv("miou", res.miou);
    for (std::size_t k = 0; k < res.per_class.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "class%zu", k);
      print_kv(name, res.per_class[k]);
    }
  });
}

void register_relax_loss(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "relax-loss", "boundary-relaxed cross entropy of logits vs labels");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--logits", "logits", "per-pixel class scores");
  st->opt("--labels", "labels", "label map (pgm, 255 = void)");
  st->opt("--window", "window", "neighborhood size (odd)");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto logits = vtn::read_logits(need_path(cfg, "logits", "--logits"));
    const auto labels = vtn::read_labels(need_path(cfg, "labels", "--labels"));
    const auto res = vtn::relaxed_loss(logits, labels, cfg.window);
    print_kv("relaxed", res.value);
    print_kv("boundary_fraction",
             vtn::boundary_mask(labels, cfg.window).fraction());
  });
}

void register_flow2ppm(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "flow2ppm", "render a flow field with the 55-hue color wheel");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--flow", "flow", "flow field (.flo)");
  st->opt("--out", "out", "color image output (ppm)");
  st->opt("--max-mag", "max_mag", "saturation normalizer (0 = 99th pct)");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto flow = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    const double mm = vtn::resolved_max_magnitude(flow, cfg.max_mag);
    vtn::write_image(vtn::flow_to_color(flow, mm),
                     need_path(cfg, "out", "--out"));
    print_kv("max_mag", mm);
  });
}

void register_flownorm(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "flownorm", "clip flow to [-cap, cap] and quantize to bytes");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--flow", "flow", "flow field (.flo)");
  st->opt("--out-u", "out", "horizontal component output (pgm)");
  st->opt("--out-v", "out2", "vertical component output (pgm)");
  st->opt("--cap", "cap", "clip magnitude");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto flow = vtn::read_flo(need_path(cfg, "flow", "--flow"));
    const auto q = vtn::flow_normalize(flow, cfg.cap);
    vtn::write_quantized_flow(q, need_path(cfg, "out", "--out-u"),
                              need_path(cfg, "out2", "--out-v"));
    print_kv("cap", cfg.cap);
  });
}

void register_sample_rts(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "sample-rts", "random temporal skipping: frame indices with random strides");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--seed", "seed", "sampling seed");
  auto frames = std::make_shared<int>(0);
  auto steps = std::make_shared<int>(0);
  auto stride = std::make_shared<int>(0);
  sub->add_option("--frames", *frames, "clip length")->required();
  sub->add_option("--steps", *steps, "number of sampled steps")->required();
  sub->add_option("--max-stride", *stride, "largest per-step skip")->required();
  sub->callback([st, frames, steps, stride] {
    const auto cfg = st->resolve();
    print_kv("indices",
             join_ints(vtn::rts_indices(*frames, *steps, *stride, cfg.seed)));
  });
}

void register_class_crops(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "class-crops", "class-balanced square crops over one or more label maps");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--out", "out", "crop list output (csv: image_index,x,y,w,h)");
  st->opt("--seed", "seed", "sampling seed");
  auto labels = std::make_shared<std::vector<std::string>>();
  auto crop = std::make_shared<int>(0);
  auto classes = std::make_shared<int>(0);
  auto count = std::make_shared<int>(0);
  sub->add_option("--labels", *labels, "label maps (pgm)")->required();
  sub->add_option("--crop-size", *crop, "square crop side")->required();
  sub->add_option("--classes", *classes, "number of classes")->required();
  sub->add_option("--count", *count, "crops to emit")->required();
  sub->callback([st, labels, crop, classes, count] {
    const auto cfg = st->resolve();
    std::vector<vtn::LabelMap> maps;
    maps.reserve(labels->size());
    for (const auto& p : *labels) maps.push_back(vtn::read_labels(p));
    const auto res =
        vtn::class_uniform_crops(maps, *crop, *classes, *count, cfg.seed);
    const std::string out = opt_path(cfg, "out");
    if (!out.empty()) {
      std::ofstream f(out);
      if (!f) throw vtn::FormatError("cannot open " + out);
      for (const auto& c : res.crops)
        f << c.image_index << ',' << c.x << ',' << c.y << ',' << c.w << ','
          << c.h << '\n';
    }
    print_kv("count", static_cast<long long>(res.crops.size()));
    print_kv("no_class_found", static_cast<long long>(res.no_class_found));
  });
}

void register_stdn(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "stdn", "depth normalization over temporal windows and image thirds");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--frames-dir", "frames_dir", "directory of pgm depth frames");
  st->opt("--window", "window", "temporal window length");
  st->opt("--out-prefix", "out_prefix", "output path prefix for frames");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto clip =
        vtn::read_depth_dir(need_path(cfg, "frames_dir", "--frames-dir"));
    const auto res = vtn::stdn(clip, cfg.window);
    const std::string prefix = need_path(cfg, "out_prefix", "--out-prefix");
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < res.clip.frames.size(); ++i) {
      char path[4096];
      std::snprintf(path, sizeof(path), "%s%03zu.pgm", prefix.c_str(), i);
      clipped += vtn::write_depth_frame(res.clip.frames[i], path);
    }
    if (clipped)
      std::fprintf(stderr, "note: %zu values clipped to [0,1] on write\n",
                   clipped);
    print_kv("frames", static_cast<long long>(res.clip.frames.size()));
    print_kv("zero_percentile", static_cast<long long>(res.zero_percentile));
    print_kv("clipped", static_cast<long long>(clipped));
  });
}

void register_mdmm(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "mdmm", "accumulated absolute depth differences over a clip");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--frames-dir", "frames_dir", "directory of pgm depth frames");
  st->opt("--out", "out", "motion map output (pgm)");
  auto t_start = std::make_shared<int>(0);
  auto steps = std::make_shared<int>(1);
  sub->add_option("--t-start", *t_start, "first frame of the span");
  sub->add_option("--steps", *steps, "number of accumulated differences")
      ->required();
  sub->callback([st, t_start, steps] {
    const auto cfg = st->resolve();
    const auto clip =
        vtn::read_depth_dir(need_path(cfg, "frames_dir", "--frames-dir"));
    const auto map = vtn::mdmm(clip, *t_start, *steps);
    double mx = 0.0;
    for (int y = 0; y < map.height(); ++y)
      for (int x = 0; x < map.width(); ++x) mx = std::max(mx, map.at(x, y));
    const std::size_t clipped =
        vtn::write_depth_frame(map, need_path(cfg, "out", "--out"));
    if (clipped)
      std::fprintf(stderr, "note: %zu values clipped to [0,1] on write\n",
                   clipped);
    print_kv("max", mx);
    print_kv("clipped", static_cast<long long>(clipped));
  });
}

void register_url_fit(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "url-fit", "joint nonnegative factorization of two feature views");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--visual", "visual", "view A (csv, rows = dims, cols = samples)");
  st->opt("--semantic", "semantic", "view B (csv)");
  st->opt("--out-prefix", "out_prefix", "prefix for U/W/V/meta outputs");
  st->opt("--seed", "seed", "initialization seed");
  auto dim = std::make_shared<int>(0);
  auto eta = std::make_shared<double>(0.0);
  auto iters = std::make_shared<int>(1000);
  auto tol = std::make_shared<double>(1e-6);
  sub->add_option("--dim", *dim, "latent dimension")->required();
  sub->add_option("--eta", *eta, "divergence coupling weight");
  sub->add_option("--iters", *iters, "iteration cap");
  sub->add_option("--tol", *tol, "relative objective change to stop at");
  sub->callback([st, dim, eta, iters, tol] {
    const auto cfg = st->resolve();
    const auto a = vtn::read_csv_matrix(need_path(cfg, "visual", "--visual"));
    const auto b =
        vtn::read_csv_matrix(need_path(cfg, "semantic", "--semantic"));
    vtn::url::FitOptions opts;
    opts.max_iter = *iters;
    opts.tol = *tol;
    opts.seed = cfg.seed;
    const auto fac = vtn::url::fit(a, b, *dim, *eta, opts);
    const std::string pfx = need_path(cfg, "out_prefix", "--out-prefix");
    vtn::write_csv_matrix(fac.u, pfx + "U.csv");
    vtn::write_csv_matrix(fac.w, pfx + "W.csv");
    vtn::write_csv_matrix(fac.v, pfx + "V.csv");
    {
      std::ofstream meta(pfx + "meta.txt");
      if (!meta) throw vtn::FormatError("cannot open " + pfx + "meta.txt");
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "d = %d\neta = %.17g\niterations = %d\nobjective = %.17g\n",
                    *dim, fac.eta, fac.iterations,
                    fac.objective_trace.empty() ? 0.0
                                                : fac.objective_trace.back());
      meta << buf;
    }
    print_kv("iterations", static_cast<long long>(fac.iterations));
    if (!fac.objective_trace.empty())
      print_kv("objective", fac.objective_trace.back());
  });
}

void register_url_project(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "url-project",
      "orthogonal projections from both views into the shared space");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--visual", "visual", "view A (csv)");
  st->opt("--semantic", "semantic", "view B (csv)");
  st->opt("--factors", "factors", "prefix of a fitted factorization (V.csv)");
  st->opt("--out-prefix", "out_prefix", "prefix for PA/PB outputs");
  auto class_sem = std::make_shared<std::string>();
  sub->add_option("--class-semantic", *class_sem,
                  "semantic class matrix projected into prototypes");
  sub->callback([st, class_sem] {
    const auto cfg = st->resolve();
    const auto a = vtn::read_csv_matrix(need_path(cfg, "visual", "--visual"));
    const auto b =
        vtn::read_csv_matrix(need_path(cfg, "semantic", "--semantic"));
    const auto v = vtn::read_csv_matrix(
        need_path(cfg, "factors", "--factors") + "V.csv");
    const auto proj = vtn::url::make_projections(a, b, v);
    const std::string pfx = need_path(cfg, "out_prefix", "--out-prefix");
    vtn::write_csv_matrix(proj.p_a, pfx + "PA.csv");
    vtn::write_csv_matrix(proj.p_b, pfx + "PB.csv");
    if (!class_sem->empty()) {
      const auto protos = vtn::read_csv_matrix(*class_sem);
      if (protos.rows() != proj.p_b.cols())
        throw vtn::ShapeError("class-semantic rows do not match view B dims");
      vtn::write_csv_matrix(proj.p_b * protos, pfx + "prototypes.csv");
    }
    print_kv("a_rank_deficient", static_cast<long long>(proj.a_rank_deficient));
    print_kv("b_rank_deficient", static_cast<long long>(proj.b_rank_deficient));
  });
}

void register_url_predict(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "url-predict", "nearest-prototype class for each projected test column");
  auto st = std::make_shared<Settings>(sub);
  st->opt("--test", "test", "test features (csv, cols = samples)");
  st->opt("--projection", "projection", "projection matrix (csv)");
  st->opt("--prototypes", "prototypes", "class prototypes (csv, cols = classes)");
  sub->callback([st] {
    const auto cfg = st->resolve();
    const auto x = vtn::read_csv_matrix(need_path(cfg, "test", "--test"));
    const auto p =
        vtn::read_csv_matrix(need_path(cfg, "projection", "--projection"));
    const auto protos =
        vtn::read_csv_matrix(need_path(cfg, "prototypes", "--prototypes"));
    if (p.cols() != x.rows())
      throw vtn::ShapeError("projection columns do not match test dims");
    if (protos.rows() != p.rows())
      throw vtn::ShapeError("prototype dims do not match projection rows");
    std::vector<int> preds;
    preds.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      preds.push_back(vtn::url::predict(p * x.col(j), protos));
    print_kv("pred", join_ints(preds));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"video-temporal numerics toolkit"};
  app.require_subcommand(1);

  register_warp(app);
  register_propagate(app);
  register_loss(app);
  register_occlusion(app);
  register_solve(app);
  register_epe(app);
  register_fl(app);
  register_miou(app);
  register_relax_loss(app);
  register_flow2ppm(app);
  register_flownorm(app);
  register_sample_rts(app);
  register_class_crops(app);
  register_stdn(app);
  register_mdmm(app);
  register_url_fit(app);
  register_url_project(app);
  register_url_predict(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const vtn::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const vtn::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const vtn::ShapeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
