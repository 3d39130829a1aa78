#pragma once

#include <string>
#include <vector>

#include "matkit/render.hpp"
#include "matkit/types.hpp"

namespace matkit {

struct DatasetConfig {
  int views_per_material = 20;
  int out_size = 512;
  uint64_t master_seed = 0;
  double camera_radius = 2.2;   // in units of scene extent
  double target_radius = 0.3;
  SceneConfig scene;
  int threads = 1;

  void validate() const;
};

struct DatasetSample {
  std::string material_id;
  int view_index = 0;
  std::string image_path;
  std::string mask_path;
  std::string depth_path;
  Intrinsics intrinsics;
  CameraPose pose;
  double alpha = 0;  // view azimuth, radians
  uint64_t tps_seed = 0;
  uint64_t camera_seed = 0;
  uint64_t lighting_seed = 0;
  LightingConfig lighting;
  double raw_depth_min = 0;
  double raw_depth_max = 0;
};

// Renders views_per_material poses of every material into out_dir
// (<material>_v<k>_{image.png,mask.png,depth.pfm}) and writes manifest.jsonl,
// one record per sample. Every sample draws its RNG streams from
// (master_seed, material index, view index), so the result is independent of
// thread schedule and reruns are byte-identical.
std::vector<DatasetSample> generate_dataset(
    const std::vector<std::pair<std::string, MaterialSet>>& materials,
    const DatasetConfig& config, const std::string& out_dir);

std::string sample_to_json(const DatasetSample& s);
DatasetSample sample_from_json(const std::string& line);

std::vector<DatasetSample> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<DatasetSample>& samples);

// Canonical maps rotated by the sample's stored alpha; what a prediction for
// this view is compared against.
MaterialSet aligned_ground_truth(const DatasetSample& sample, const MaterialSet& material);

// Loads albedo.png / normal.png / roughness.png / height.png from a
// directory.
MaterialSet load_material_dir(const std::string& dir);
void save_material_dir(const std::string& dir, const MaterialSet& mat);

}  // namespace matkit
