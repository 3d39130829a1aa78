#pragma once

#include <vector>

#include "matkit/geometry.hpp"
#include "matkit/rng.hpp"
#include "matkit/types.hpp"

namespace matkit {

struct LightingConfig {
  double ambient = 0.25;
  Vec3 light_dir = {0, 0, 1};  // unit, pointing from surface toward light
  double light_intensity = 1.0;
  double specular_strength = 0.0;

  void validate() const;
};

struct SceneConfig {
  int grid_n = 64;             // vertices per mesh side
  double extent = 1.0;         // plane side length, world units
  int tps_control = 4;         // control grid side for the z-deformation
  double amplitude = 0.08;     // max |z| target, in units of extent
  double height_scale = 0.02;  // height-map displacement, in units of extent

  void validate() const;
};

// Triangulated n-by-n grid over [-e/2, e/2]^2 with TPS-displaced z and
// planar UVs.
struct PlaneScene {
  int grid_n = 0;
  double extent = 0;
  std::vector<Vec3> positions;   // row-major (j * n + i)
  std::vector<Vec3> normals;     // per-vertex, from the displaced geometry
  std::vector<Vec2> uv;          // (i/(n-1), j/(n-1))
  std::vector<int> indices;      // triangle list
  const MaterialSet* material = nullptr;
  LightingConfig lighting;
};

struct RenderOutput {
  Image rgb;           // 3-channel
  Mask mask;           // hit pixels
  DepthMap depth;      // camera-space Z, min-max normalized inside the mask
  double raw_depth_min = 0;
  double raw_depth_max = 0;
  CameraPose pose;
  Intrinsics intrinsics;
};

// Position uniform on the radius-R upper hemisphere (z > 0.1 R), look-at
// target uniform in the radius-r_target ball. Throws unless R > r_target >= 0.
CameraPose sample_camera(Rng& rng, double R, double r_target);

LightingConfig sample_lighting(Rng& rng);

// atan2(v_y, v_x) of the viewing vector target - position. Throws
// ValidationError for a straight-down view (zero xy-projection).
double view_azimuth(const CameraPose& pose);

// TPS z-displacement from a control grid with targets uniform in
// [-amplitude*extent, amplitude*extent]; height map added as displacement
// along the geometric normal afterwards.
PlaneScene build_plane_scene(const MaterialSet& material, const SceneConfig& config,
                             const LightingConfig& lighting, Rng& rng);

// Z-buffered triangle rasterization with perspective-correct attribute
// interpolation and ambient + Lambert + Blinn-Phong shading
// (shininess = 2/(roughness^4 + 1e-4) - 2). Throws if the camera sits inside
// the mesh bounds or nothing projects onto the screen.
RenderOutput rasterize(const PlaneScene& scene, const CameraPose& pose,
                       const Intrinsics& K, int out_w, int out_h);

}  // namespace matkit
