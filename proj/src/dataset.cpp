#include "matkit/dataset.hpp"

#include <json.hpp>

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "matkit/align.hpp"
#include "matkit/image_io.hpp"
#include "matkit/rectify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace matkit {

void DatasetConfig::validate() const {
  if (views_per_material < 1) throw ValidationError("views must be >= 1");
  if (out_size < 8) throw ValidationError("output size must be >= 8");
  if (camera_radius <= target_radius || target_radius < 0)
    throw ValidationError("camera radius must exceed target radius >= 0");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  scene.validate();
}

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

// FNV-1a, so seed derivation from material ids is stable across platforms.
uint64_t stable_hash(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct SampleOutcome {
  DatasetSample sample;
  Image rgb;
  Mask mask;
  DepthMap depth;
};

SampleOutcome render_sample(const std::string& material_id, const MaterialSet& mat,
                            int view_index, const DatasetConfig& config) {
  SampleOutcome o;
  DatasetSample& s = o.sample;
  s.material_id = material_id;
  s.view_index = view_index;

  // Independent streams per (seed, material, view): the outcome does not
  // depend on how samples are scheduled across threads.
  const uint64_t mat_tag = stable_hash(material_id);
  s.tps_seed = derive_seed(config.master_seed, mat_tag, view_index, 1);
  s.camera_seed = derive_seed(config.master_seed, mat_tag, view_index, 2);
  s.lighting_seed = derive_seed(config.master_seed, mat_tag, view_index, 3);

  Rng tps_rng(s.tps_seed);
  Rng cam_rng(s.camera_seed);
  Rng light_rng(s.lighting_seed);

  s.lighting = sample_lighting(light_rng);
  const PlaneScene scene = build_plane_scene(mat, config.scene, s.lighting, tps_rng);
  s.pose = sample_camera(cam_rng, config.camera_radius * config.scene.extent,
                         config.target_radius * config.scene.extent);
  s.intrinsics = default_intrinsics(config.out_size, config.out_size);
  s.alpha = view_azimuth(s.pose);

  RenderOutput render = rasterize(scene, s.pose, s.intrinsics, config.out_size,
                                  config.out_size);
  s.raw_depth_min = render.raw_depth_min;
  s.raw_depth_max = render.raw_depth_max;

  const std::string stem = material_id + "_v" + std::to_string(view_index);
  s.image_path = stem + "_image.png";
  s.mask_path = stem + "_mask.png";
  s.depth_path = stem + "_depth.pfm";

  o.rgb = std::move(render.rgb);
  o.mask = std::move(render.mask);
  o.depth = std::move(render.depth);
  return o;
}

}  // namespace

std::string sample_to_json(const DatasetSample& s) {
  json j;
  j["material_id"] = s.material_id;
  j["view_index"] = s.view_index;
  j["image"] = s.image_path;
  j["mask"] = s.mask_path;
  j["depth"] = s.depth_path;
  j["intrinsics"] = {{"fx", s.intrinsics.fx},
                     {"fy", s.intrinsics.fy},
                     {"cx", s.intrinsics.cx},
                     {"cy", s.intrinsics.cy}};
  j["pose"] = {{"position", vec3_json(s.pose.position)},
               {"target", vec3_json(s.pose.target)},
               {"up", vec3_json(s.pose.up_hint)}};
  j["alpha"] = s.alpha;
  j["seeds"] = {{"tps", s.tps_seed},
                {"camera", s.camera_seed},
                {"lighting", s.lighting_seed}};
  j["lighting"] = {{"ambient", s.lighting.ambient},
                   {"dir", vec3_json(s.lighting.light_dir)},
                   {"intensity", s.lighting.light_intensity},
                   {"specular", s.lighting.specular_strength}};
  j["raw_depth_range"] = json::array({s.raw_depth_min, s.raw_depth_max});
  return j.dump();
}

DatasetSample sample_from_json(const std::string& line) {
  json j = json::parse(line);
  DatasetSample s;
  s.material_id = j.at("material_id");
  s.view_index = j.at("view_index");
  s.image_path = j.at("image");
  s.mask_path = j.at("mask");
  s.depth_path = j.at("depth");
  const json& k = j.at("intrinsics");
  s.intrinsics = {k.at("fx"), k.at("fy"), k.at("cx"), k.at("cy")};
  const json& p = j.at("pose");
  s.pose.position = vec3_from(p.at("position"));
  s.pose.target = vec3_from(p.at("target"));
  s.pose.up_hint = vec3_from(p.at("up"));
  s.alpha = j.at("alpha");
  const json& seeds = j.at("seeds");
  s.tps_seed = seeds.at("tps");
  s.camera_seed = seeds.at("camera");
  s.lighting_seed = seeds.at("lighting");
  const json& l = j.at("lighting");
  s.lighting.ambient = l.at("ambient");
  s.lighting.light_dir = vec3_from(l.at("dir"));
  s.lighting.light_intensity = l.at("intensity");
  s.lighting.specular_strength = l.at("specular");
  s.raw_depth_min = j.at("raw_depth_range").at(0);
  s.raw_depth_max = j.at("raw_depth_range").at(1);
  return s;
}

std::vector<DatasetSample> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::vector<DatasetSample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    samples.push_back(sample_from_json(line));
  }
  return samples;
}

void write_manifest(const std::string& path, const std::vector<DatasetSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  for (const DatasetSample& s : samples) out << sample_to_json(s) << "\n";
  if (!out) throw IoError("manifest write failed: " + path);
}

std::vector<DatasetSample> generate_dataset(
    const std::vector<std::pair<std::string, MaterialSet>>& materials,
    const DatasetConfig& config, const std::string& out_dir) {
  config.validate();
  if (materials.empty()) throw ValidationError("no materials given");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output dir: " + out_dir);

  const size_t total = materials.size() * config.views_per_material;
  std::vector<DatasetSample> samples(total);
  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= total) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      const size_t mi = i / config.views_per_material;
      const int vi = static_cast<int>(i % config.views_per_material);
      const std::string stem = out_dir + "/" + materials[mi].first + "_v" +
                               std::to_string(vi);
      try {
        SampleOutcome o = render_sample(materials[mi].first, materials[mi].second,
                                        vi, config);
        save_png(out_dir + "/" + o.sample.image_path, o.rgb, 8);
        save_mask_png(out_dir + "/" + o.sample.mask_path, o.mask);
        save_depth_pfm(out_dir + "/" + o.sample.depth_path, o.depth);
        samples[i] = std::move(o.sample);
      } catch (...) {
        for (const char* suffix : {"_image.png", "_mask.png", "_depth.pfm"})
          fs::remove(stem + suffix, ec);
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < config.threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  write_manifest(out_dir + "/manifest.jsonl", samples);
  return samples;
}

MaterialSet aligned_ground_truth(const DatasetSample& sample,
                                 const MaterialSet& material) {
  return rotate_material_set(material, sample.alpha, Sampling::Bilinear);
}

MaterialSet load_material_dir(const std::string& dir) {
  MaterialSet mat;
  mat.albedo = load_png(dir + "/albedo.png");
  mat.normal.encoded = load_png(dir + "/normal.png");
  mat.roughness = load_png(dir + "/roughness.png");
  mat.height = load_png(dir + "/height.png");
  mat.validate();
  return mat;
}

void save_material_dir(const std::string& dir, const MaterialSet& mat) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create material dir: " + dir);
  save_png(dir + "/albedo.png", mat.albedo, 8);
  save_png(dir + "/normal.png", mat.normal.encoded, 16);
  save_png(dir + "/roughness.png", mat.roughness, 8);
  save_png(dir + "/height.png", mat.height, 16);
}

}  // namespace matkit
