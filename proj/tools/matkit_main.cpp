#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "matkit/align.hpp"
#include "matkit/dataset.hpp"
#include "matkit/diffusion.hpp"
#include "matkit/image_io.hpp"
#include "matkit/metrics.hpp"
#include "matkit/procgen.hpp"
#include "matkit/rectify.hpp"
#include "matkit/rng.hpp"
#include "matkit/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace matkit;

namespace {

std::string resolve_out(std::string out) {
  if (!out.empty()) return out;
  if (const char* env = std::getenv("MATKIT_OUTPUT_DIR")) {
    if (*env) return env;
  }
  throw ValidationError("no output location: pass --out or set MATKIT_OUTPUT_DIR");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void print_config_and_exit(const json& cfg) {
  std::cout << cfg.dump(2) << "\n";
  std::exit(0);
}

// ---------------------------------------------------------------- rectify --

struct RectifyArgs {
  std::string image, mask, depth, out;
  RectifyParams params;
  std::string normalize = "per-axis";
  double fx = 0, fy = 0, cx = -1, cy = -1;
  bool print_config = false;
};

int run_rectify(const RectifyArgs& a) {
  RectifyParams params = a.params;
  params.normalize_mode = a.normalize == "aspect" ? NormalizeMode::AspectPreserving
                                                  : NormalizeMode::PerAxis;
  const std::string out_dir = resolve_out(a.out);
  if (a.print_config) {
    json cfg{{"subcommand", "rectify"},
             {"image", a.image},
             {"mask", a.mask},
             {"depth", a.depth},
             {"out", out_dir},
             {"d_shift", params.d_shift},
             {"target_w", params.target_w},
             {"target_h", params.target_h},
             {"s_sample", params.s_sample},
             {"hole_kernel", params.hole_kernel_k},
             {"normalize", a.normalize},
             {"intrinsics", a.fx > 0 ? "explicit" : "default"}};
    print_config_and_exit(cfg);
  }

  const Image image = load_png(a.image);
  const Mask mask = load_mask(a.mask);
  const DepthMap depth = load_depth(a.depth);
  Intrinsics K = default_intrinsics(image.width, image.height);
  if (a.fx > 0) K = {a.fx, a.fy > 0 ? a.fy : a.fx, a.cx >= 0 ? a.cx : K.cx,
                     a.cy >= 0 ? a.cy : K.cy};

  const RectifyResult result = rectify(image, mask, depth, K, params);
  ensure_dir(out_dir);
  save_png(out_dir + "/texture.png", result.texture, 8);
  save_mask_png(out_dir + "/valid.png", result.valid);
  json record{{"d_shift", params.d_shift},
              {"target_w", params.target_w},
              {"target_h", params.target_h},
              {"s_sample", params.s_sample},
              {"hole_kernel", params.hole_kernel_k},
              {"normalize", a.normalize},
              {"hole_fraction", result.hole_fraction},
              {"intrinsics",
               {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}}}};
  std::ofstream meta(out_dir + "/record.json");
  if (!meta) throw IoError("cannot write " + out_dir + "/record.json");
  meta << record.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------------------ synth --

struct SynthArgs {
  std::string materials_dir, out;
  int proc_materials = 0;
  int proc_size = 256;
  DatasetConfig config;
  bool print_config = false;
};

int run_synth(const SynthArgs& a) {
  const std::string out_dir = resolve_out(a.out);
  if (a.print_config) {
    json cfg{{"subcommand", "synth"},
             {"materials", a.materials_dir},
             {"proc_materials", a.proc_materials},
             {"proc_size", a.proc_size},
             {"out", out_dir},
             {"views", a.config.views_per_material},
             {"size", a.config.out_size},
             {"seed", a.config.master_seed},
             {"threads", a.config.threads},
             {"camera_radius", a.config.camera_radius},
             {"target_radius", a.config.target_radius},
             {"grid", a.config.scene.grid_n},
             {"extent", a.config.scene.extent},
             {"tps_control", a.config.scene.tps_control},
             {"amplitude", a.config.scene.amplitude},
             {"height_scale", a.config.scene.height_scale}};
    print_config_and_exit(cfg);
  }

  std::vector<std::pair<std::string, MaterialSet>> materials;
  if (a.proc_materials > 0) {
    ensure_dir(out_dir + "/materials");
    for (int i = 0; i < a.proc_materials; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "mat%03d", i);
      Rng rng(derive_seed(a.config.master_seed, 0x6d617431u, i));
      MaterialSet mat = make_procedural_material(a.proc_size, rng);
      save_material_dir(out_dir + "/materials/" + name, mat);
      // Reload so the dataset sees exactly what is on disk (quantized).
      materials.emplace_back(name, load_material_dir(out_dir + "/materials/" + name));
    }
  } else if (!a.materials_dir.empty()) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(a.materials_dir))
      if (entry.is_directory()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const std::string& name : names)
      materials.emplace_back(name, load_material_dir(a.materials_dir + "/" + name));
    if (materials.empty())
      throw ValidationError("no material subdirectories in " + a.materials_dir);
  } else {
    throw ValidationError("pass --materials DIR or --proc-materials N");
  }

  generate_dataset(materials, a.config, out_dir);
  return 0;
}

// ------------------------------------------------------------------ align --

struct AlignArgs {
  std::string manifest, materials_dir, out;
  std::string sampling = "bilinear";
  bool print_config = false;
};

int run_align(const AlignArgs& a) {
  const std::string out_dir = resolve_out(a.out);
  if (a.print_config) {
    json cfg{{"subcommand", "align"},
             {"manifest", a.manifest},
             {"materials", a.materials_dir},
             {"out", out_dir},
             {"sampling", a.sampling}};
    print_config_and_exit(cfg);
  }

  const Sampling sampling =
      a.sampling == "nearest" ? Sampling::Nearest : Sampling::Bilinear;
  const std::vector<DatasetSample> samples = read_manifest(a.manifest);
  ensure_dir(out_dir);
  std::map<std::string, MaterialSet> cache;
  for (const DatasetSample& s : samples) {
    const double recomputed = view_azimuth(s.pose);
    if (std::abs(recomputed - s.alpha) > 1e-9)
      throw ValidationError("manifest alpha disagrees with stored pose for " +
                            s.material_id + "_v" + std::to_string(s.view_index));
    auto it = cache.find(s.material_id);
    if (it == cache.end())
      it = cache.emplace(s.material_id,
                         load_material_dir(a.materials_dir + "/" + s.material_id))
               .first;
    const MaterialSet aligned = rotate_material_set(it->second, s.alpha, sampling);
    save_material_dir(out_dir + "/" + s.material_id + "_v" +
                          std::to_string(s.view_index) + "_gt",
                      aligned);
  }
  return 0;
}

// ----------------------------------------------------------------- sample --

struct SampleArgs {
  std::string denoiser = "oracle";
  int steps = 50;
  std::string rolling = "off";
  uint64_t seed = 0;
  std::string out;
  int latent_size = 64;
  int factor = 1;
  int T = 1000;
  std::string condition_material;
  bool print_config = false;
};

int run_sample(const SampleArgs& a) {
  const std::string prefix = resolve_out(a.out);
  if (a.print_config) {
    json cfg{{"subcommand", "sample"},   {"denoiser", a.denoiser},
             {"steps", a.steps},         {"rolling", a.rolling},
             {"seed", a.seed},           {"out", prefix},
             {"latent_size", a.latent_size}, {"factor", a.factor},
             {"T", a.T},                 {"condition_material", a.condition_material}};
    print_config_and_exit(cfg);
  }
  if (a.steps < 1) throw ValidationError("--steps must be >= 1");
  if (a.rolling != "on" && a.rolling != "off")
    throw ValidationError("--rolling must be on or off");

  const NoiseSchedule schedule = make_schedule(a.T);
  StubCodec codec{a.factor};

  LatentStack condition;
  if (!a.condition_material.empty()) {
    const MaterialSet mat = load_material_dir(a.condition_material);
    if (mat.resolution() != a.latent_size * a.factor)
      throw ValidationError("condition material resolution must equal latent size * factor");
    condition = codec.encode(mat);
  } else {
    // Mid-gray prior: constant 0.5 maps with a flat normal.
    MaterialSet mat;
    const int res = a.latent_size * a.factor;
    mat.albedo = Image::create(res, res, 3, 0.5);
    mat.roughness = Image::create(res, res, 1, 0.5);
    mat.height = Image::create(res, res, 1, 0.5);
    mat.normal.encoded = Image::create(res, res, 3, 0.5);
    for (int y = 0; y < res; ++y)
      for (int x = 0; x < res; ++x) mat.normal.encoded.at(x, y, 2) = 1.0;
    condition = codec.encode(mat);
  }

  Denoiser denoiser;
  if (a.denoiser == "oracle")
    denoiser = make_oracle_denoiser(schedule);
  else if (a.denoiser == "conv")
    denoiser = make_conv_denoiser(schedule);
  else if (a.denoiser == "windowed")
    denoiser = make_windowed_denoiser(schedule);
  else
    throw ValidationError("--denoiser must be oracle, conv or windowed");

  Rng rng(a.seed);
  const LatentStack z =
      sample(denoiser, condition, a.latent_size, a.latent_size, a.steps, schedule,
             a.rolling == "on" ? NoiseRolling::On : NoiseRolling::Off, rng);

  const fs::path parent = fs::path(prefix).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  save_raw_f32(prefix + "_latent.raw", z.data, LatentStack::kChannels, z.height,
               z.width);
  const MaterialSet decoded = codec.decode(z);
  save_png(prefix + "_albedo.png", decoded.albedo, 8);
  save_png(prefix + "_normal.png", decoded.normal.encoded, 8);
  save_png(prefix + "_roughness.png", decoded.roughness, 8);
  save_png(prefix + "_height.png", decoded.height, 8);
  return 0;
}

// ------------------------------------------------------------------- eval --

struct EvalArgs {
  std::string pred, gt, out;
  std::string mode = "search";
  bool print_config = false;
};

bool is_material_dir(const std::string& dir) {
  return fs::exists(dir + "/albedo.png") && fs::exists(dir + "/normal.png") &&
         fs::exists(dir + "/roughness.png") && fs::exists(dir + "/height.png");
}

int run_eval(const EvalArgs& a) {
  const std::string out_path = resolve_out(a.out);
  if (a.print_config) {
    json cfg{{"subcommand", "eval"},
             {"pred", a.pred},
             {"gt", a.gt},
             {"mode", a.mode},
             {"out", out_path}};
    print_config_and_exit(cfg);
  }
  const RotationMode mode =
      a.mode == "fixed" ? RotationMode::Fixed : RotationMode::Search;

  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> pairs;
  if (is_material_dir(a.pred)) {
    pairs.emplace_back(fs::path(a.pred).filename().string(),
                       std::make_pair(a.pred, a.gt));
  } else {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(a.pred))
      if (entry.is_directory() &&
          fs::is_directory(a.gt + "/" + entry.path().filename().string()))
        names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const std::string& n : names)
      pairs.emplace_back(n, std::make_pair(a.pred + "/" + n, a.gt + "/" + n));
    if (pairs.empty())
      throw ValidationError("no matching sample directories under --pred and --gt");
  }

  const fs::path parent = fs::path(out_path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  std::ofstream csv(out_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + out_path);
  csv << "sample,attribute,ssim,mae,psnr,seam_ratio\n";
  for (const auto& [name, dirs] : pairs) {
    const MaterialSet pred = load_material_dir(dirs.first);
    const MaterialSet gt = load_material_dir(dirs.second);
    const EvalReport report = evaluate_pair(pred, gt, mode);
    for (const AttributeScore& s : report.attributes)
      csv << name << "," << s.attribute << "," << fmt_double(s.ssim) << ","
          << fmt_double(s.mae) << "," << fmt_double(s.psnr) << ","
          << fmt_double(s.seam_ratio) << "\n";
  }
  return 0;
}

// -------------------------------------------------------------- tile-check --

struct TileArgs {
  std::string input, out;
  int tiles = 2;
  double seamy_threshold = 1.2;
  bool print_config = false;
};

Image tile_composite(const Image& img, int n) {
  Image out = Image::create(img.width * n, img.height * n, img.channels, 0.0,
                            img.color_space);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(x, y, c) = img.at(x % img.width, y % img.height, c);
  return out;
}

int run_tile_check(const TileArgs& a) {
  const std::string out_dir = resolve_out(a.out);
  if (a.print_config) {
    json cfg{{"subcommand", "tile-check"},
             {"input", a.input},
             {"tiles", a.tiles},
             {"seamy_threshold", a.seamy_threshold},
             {"out", out_dir}};
    print_config_and_exit(cfg);
  }
  if (a.tiles < 2) throw ValidationError("--tiles must be >= 2");

  std::vector<std::pair<std::string, Image>> maps;
  if (fs::is_directory(a.input)) {
    if (!is_material_dir(a.input))
      throw ValidationError("not a material directory: " + a.input);
    const MaterialSet mat = load_material_dir(a.input);
    maps.emplace_back("albedo", mat.albedo);
    maps.emplace_back("normal", mat.normal.encoded);
    maps.emplace_back("roughness", mat.roughness);
    maps.emplace_back("height", mat.height);
  } else {
    maps.emplace_back(fs::path(a.input).stem().string(), load_png(a.input));
  }

  ensure_dir(out_dir);
  json report;
  report["tiles"] = a.tiles;
  report["seamy_threshold"] = a.seamy_threshold;
  json per_map = json::object();
  for (const auto& [name, img] : maps) {
    const double ratio = seam_ratio(img);
    per_map[name] = {{"seam_ratio", ratio}, {"seamy", ratio > a.seamy_threshold}};
    save_png(out_dir + "/" + name + "_tiled.png", tile_composite(img, a.tiles), 8);
  }
  report["maps"] = per_map;
  std::ofstream rep(out_dir + "/report.json");
  if (!rep) throw IoError("cannot write " + out_dir + "/report.json");
  rep << report.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------------------ sweep --

struct SweepArgs {
  std::string image, mask, depth, out;
  std::vector<double> values;
  RectifyParams params;
  bool print_config = false;
};

int run_sweep(const SweepArgs& a) {
  const std::string out_path = resolve_out(a.out);
  std::vector<double> values = a.values;
  if (values.empty()) values = {0.1, 0.5, 1, 5, 25, 100};
  if (a.print_config) {
    json cfg{{"subcommand", "sweep"},  {"image", a.image},
             {"mask", a.mask},         {"depth", a.depth},
             {"out", out_path},        {"values", values},
             {"target_w", a.params.target_w}, {"target_h", a.params.target_h},
             {"s_sample", a.params.s_sample}};
    print_config_and_exit(cfg);
  }

  const Image image = load_png(a.image);
  const Mask mask = load_mask(a.mask);
  const DepthMap depth = load_depth(a.depth);
  const Intrinsics K = default_intrinsics(image.width, image.height);
  const std::vector<SweepRow> rows =
      sweep_d_shift(image, mask, depth, K, a.params, values);

  const fs::path parent = fs::path(out_path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  std::ofstream csv(out_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + out_path);
  csv << "d_shift,remap_deviation_px,hole_fraction\n";
  for (const SweepRow& r : rows)
    csv << fmt_double(r.d_shift) << "," << fmt_double(r.remap_deviation_px) << ","
        << fmt_double(r.hole_fraction) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PBR material extraction toolkit: rectification, synthetic "
               "datasets, diffusion kernels, evaluation"};
  app.require_subcommand(1);

  RectifyArgs rect;
  CLI::App* c_rect = app.add_subcommand("rectify", "Depth-guided perspective rectification");
  c_rect->add_option("--image", rect.image, "Input photo (PNG)")->required();
  c_rect->add_option("--mask", rect.mask, "Region mask (PNG)")->required();
  c_rect->add_option("--depth", rect.depth, "Normalized depth (PNG or PFM)")->required();
  c_rect->add_option("--out", rect.out, "Output directory");
  c_rect->add_option("--d-shift", rect.params.d_shift, "Depth offset");
  c_rect->add_option("--target", rect.params.target_w, "Target resolution (square)");
  c_rect->add_option("--s-sample", rect.params.s_sample, "Splat grid scale in (0,1]");
  c_rect->add_option("--kernel", rect.params.hole_kernel_k, "Hole-fill kernel size");
  c_rect->add_option("--normalize", rect.normalize, "per-axis | aspect")
      ->check(CLI::IsMember({"per-axis", "aspect"}));
  c_rect->add_option("--fx", rect.fx, "Focal length x (default max(w,h))");
  c_rect->add_option("--fy", rect.fy, "Focal length y");
  c_rect->add_option("--cx", rect.cx, "Principal point x");
  c_rect->add_option("--cy", rect.cy, "Principal point y");
  c_rect->add_flag("--print-config", rect.print_config, "Print resolved config and exit");

  SynthArgs synth;
  CLI::App* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--materials", synth.materials_dir, "Directory of material subdirs");
  c_synth->add_option("--proc-materials", synth.proc_materials,
                      "Generate N procedural materials instead");
  c_synth->add_option("--proc-size", synth.proc_size, "Procedural material resolution");
  c_synth->add_option("--out", synth.out, "Output directory");
  c_synth->add_option("--views", synth.config.views_per_material, "Views per material");
  c_synth->add_option("--size", synth.config.out_size, "Render resolution");
  c_synth->add_option("--seed", synth.config.master_seed, "Master seed");
  c_synth->add_option("--threads", synth.config.threads, "Worker threads");
  c_synth->add_option("--camera-radius", synth.config.camera_radius,
                      "Camera sphere radius (units of extent)");
  c_synth->add_option("--target-radius", synth.config.target_radius,
                      "Look-at ball radius (units of extent)");
  c_synth->add_option("--grid", synth.config.scene.grid_n, "Mesh vertices per side");
  c_synth->add_option("--amplitude", synth.config.scene.amplitude,
                      "TPS deformation amplitude (units of extent)");
  c_synth->add_option("--tps-control", synth.config.scene.tps_control,
                      "TPS control grid side");
  c_synth->add_option("--height-scale", synth.config.scene.height_scale,
                      "Height displacement scale (units of extent)");
  c_synth->add_flag("--print-config", synth.print_config, "Print resolved config and exit");

  AlignArgs align;
  CLI::App* c_align = app.add_subcommand("align", "Write rotation-aligned ground truth");
  c_align->add_option("--manifest", align.manifest, "Dataset manifest")->required();
  c_align->add_option("--materials", align.materials_dir, "Canonical material dirs")
      ->required();
  c_align->add_option("--out", align.out, "Output directory");
  c_align->add_option("--sampling", align.sampling, "bilinear | nearest")
      ->check(CLI::IsMember({"bilinear", "nearest"}));
  c_align->add_flag("--print-config", align.print_config, "Print resolved config and exit");

  SampleArgs smp;
  CLI::App* c_sample = app.add_subcommand("sample", "Run the DDIM sampler");
  c_sample->add_option("--denoiser", smp.denoiser, "oracle | conv | windowed")
      ->check(CLI::IsMember({"oracle", "conv", "windowed"}));
  c_sample->add_option("--steps", smp.steps, "Sampling steps");
  c_sample->add_option("--rolling", smp.rolling, "on | off")
      ->check(CLI::IsMember({"on", "off"}));
  c_sample->add_option("--seed", smp.seed, "Noise seed");
  c_sample->add_option("--out", smp.out, "Output prefix");
  c_sample->add_option("--latent-size", smp.latent_size, "Latent side length");
  c_sample->add_option("--factor", smp.factor, "Codec pooling factor");
  c_sample->add_option("--T", smp.T, "Schedule length");
  c_sample->add_option("--condition-material", smp.condition_material,
                       "Material dir to condition on");
  c_sample->add_flag("--print-config", smp.print_config, "Print resolved config and exit");

  EvalArgs eval;
  CLI::App* c_eval = app.add_subcommand("eval", "Score predictions against ground truth");
  c_eval->add_option("--pred", eval.pred, "Prediction material dir (or dir of dirs)")
      ->required();
  c_eval->add_option("--gt", eval.gt, "Ground-truth material dir (or dir of dirs)")
      ->required();
  c_eval->add_option("--mode", eval.mode, "search | fixed")
      ->check(CLI::IsMember({"search", "fixed"}));
  c_eval->add_option("--out", eval.out, "Report CSV path");
  c_eval->add_flag("--print-config", eval.print_config, "Print resolved config and exit");

  TileArgs tile;
  CLI::App* c_tile = app.add_subcommand("tile-check", "Tileability report");
  c_tile->add_option("--input", tile.input, "Material dir or single image")->required();
  c_tile->add_option("--tiles", tile.tiles, "Tiles per side in the composite");
  c_tile->add_option("--seamy-threshold", tile.seamy_threshold,
                     "seam_ratio above this flags the map");
  c_tile->add_option("--out", tile.out, "Output directory");
  c_tile->add_flag("--print-config", tile.print_config, "Print resolved config and exit");

  SweepArgs sweep;
  CLI::App* c_sweep = app.add_subcommand("sweep", "d_shift sensitivity sweep");
  c_sweep->add_option("--image", sweep.image, "Input photo (PNG)")->required();
  c_sweep->add_option("--mask", sweep.mask, "Region mask (PNG)")->required();
  c_sweep->add_option("--depth", sweep.depth, "Normalized depth (PNG or PFM)")->required();
  c_sweep->add_option("--out", sweep.out, "Report CSV path");
  c_sweep->add_option("--values", sweep.values, "d_shift values")->delimiter(',');
  c_sweep->add_option("--target", sweep.params.target_w, "Target resolution (square)");
  c_sweep->add_option("--s-sample", sweep.params.s_sample, "Splat grid scale in (0,1]");
  c_sweep->add_flag("--print-config", sweep.print_config, "Print resolved config and exit");

  try {
    app.parse(argc, argv);
    rect.params.target_h = rect.params.target_w;
    sweep.params.target_h = sweep.params.target_w;
    if (c_rect->parsed()) return run_rectify(rect);
    if (c_synth->parsed()) return run_synth(synth);
    if (c_align->parsed()) return run_align(align);
    if (c_sample->parsed()) return run_sample(smp);
    if (c_eval->parsed()) return run_eval(eval);
    if (c_tile->parsed()) return run_tile_check(tile);
    if (c_sweep->parsed()) return run_sweep(sweep);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
