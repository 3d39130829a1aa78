#include "matkit/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matkit/resample.hpp"
#include "matkit/tps.hpp"

namespace matkit {

namespace {

constexpr double kNearPlane = 1e-6;

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Bilinear map sample over UV in [0,1]^2 (corner-aligned).
double sample_map(const Image& img, double u, double v, int c) {
  return sample_bilinear(img, u * (img.width - 1), v * (img.height - 1), c);
}

}  // namespace

void LightingConfig::validate() const {
  if (ambient < 0 || ambient > 1) throw ValidationError("ambient must lie in [0,1]");
  if (std::abs(light_dir.norm() - 1.0) > 1e-6)
    throw ValidationError("light_dir must be unit length");
  if (light_intensity < 0) throw ValidationError("light_intensity must be >= 0");
  if (specular_strength < 0) throw ValidationError("specular_strength must be >= 0");
}

void SceneConfig::validate() const {
  if (grid_n < 2) throw ValidationError("mesh grid must be >= 2 vertices per side");
  if (extent <= 0) throw ValidationError("extent must be > 0");
  if (tps_control < 2) throw ValidationError("TPS control grid must be >= 2");
  if (amplitude < 0) throw ValidationError("amplitude must be >= 0");
  if (height_scale < 0) throw ValidationError("height_scale must be >= 0");
}

CameraPose sample_camera(Rng& rng, double R, double r_target) {
  if (!(R > r_target) || r_target < 0)
    throw ValidationError("camera radius must exceed target radius >= 0");
  CameraPose pose;
  for (;;) {
    // Uniform on the spherical cap z > 0.1 R (area element is uniform in z).
    const double z = R * (0.1 + 0.9 * rng.uniform());
    const double phi = rng.uniform(0.0, 6.283185307179586476925286766559);
    const double rho = std::sqrt(std::max(0.0, R * R - z * z));
    pose.position = {rho * std::cos(phi), rho * std::sin(phi), z};

    pose.target = {0, 0, 0};
    if (r_target > 0) {
      for (;;) {  // rejection-sample the ball
        Vec3 t{rng.uniform(-r_target, r_target), rng.uniform(-r_target, r_target),
               rng.uniform(-r_target, r_target)};
        if (t.norm() <= r_target) {
          pose.target = t;
          break;
        }
      }
    }
    const Vec3 v = pose.target - pose.position;
    if (std::sqrt(v.x * v.x + v.y * v.y) > 1e-9) return pose;
    // Straight-down view has no azimuth; redraw.
  }
}

LightingConfig sample_lighting(Rng& rng) {
  LightingConfig light;
  light.ambient = rng.uniform(0.2, 0.4);
  for (;;) {
    Vec3 d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 1.0)};
    const double n = d.norm();
    if (n > 1e-6 && n <= 1.0) {
      light.light_dir = d * (1.0 / n);
      break;
    }
  }
  light.light_intensity = rng.uniform(0.5, 0.8);
  light.specular_strength = rng.uniform(0.0, 0.25);
  return light;
}

double view_azimuth(const CameraPose& pose) {
  const Vec3 v = pose.target - pose.position;
  if (v.x == 0.0 && v.y == 0.0)
    throw ValidationError("straight-down view has undefined azimuth");
  return std::atan2(v.y, v.x);
}

PlaneScene build_plane_scene(const MaterialSet& material, const SceneConfig& config,
                             const LightingConfig& lighting, Rng& rng) {
  config.validate();
  lighting.validate();

  PlaneScene scene;
  scene.grid_n = config.grid_n;
  scene.extent = config.extent;
  scene.material = &material;
  scene.lighting = lighting;

  const int n = config.grid_n;
  const double e = config.extent;
  const double half = e * 0.5;

  // Control grid spanning the plane, z targets uniform in +-amplitude*extent.
  const int c = config.tps_control;
  std::vector<Vec2> ctrl;
  std::vector<double> ctrl_z;
  ctrl.reserve(static_cast<size_t>(c) * c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < c; ++i) {
      ctrl.push_back({-half + e * i / (c - 1), -half + e * j / (c - 1)});
      ctrl_z.push_back(config.amplitude > 0
                           ? rng.uniform(-config.amplitude * e, config.amplitude * e)
                           : 0.0);
    }
  const TpsSpline zfield = tps_fit(ctrl, ctrl_z, 0.0);

  scene.positions.resize(static_cast<size_t>(n) * n);
  scene.uv.resize(scene.positions.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const size_t idx = static_cast<size_t>(j) * n + i;
      const double x = -half + e * i / (n - 1);
      const double y = -half + e * j / (n - 1);
      scene.positions[idx] = {x, y, config.amplitude > 0 ? zfield.eval({x, y}) : 0.0};
      scene.uv[idx] = {static_cast<double>(i) / (n - 1),
                       static_cast<double>(j) / (n - 1)};
    }

  scene.indices.reserve(static_cast<size_t>(n - 1) * (n - 1) * 6);
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i + 1 < n; ++i) {
      const int v00 = j * n + i, v10 = v00 + 1;
      const int v01 = v00 + n, v11 = v01 + 1;
      scene.indices.insert(scene.indices.end(), {v00, v10, v11});
      scene.indices.insert(scene.indices.end(), {v00, v11, v01});
    }

  auto accumulate_normals = [&](std::vector<Vec3>& normals) {
    normals.assign(scene.positions.size(), {0, 0, 0});
    for (size_t t = 0; t < scene.indices.size(); t += 3) {
      const Vec3& p0 = scene.positions[scene.indices[t]];
      const Vec3& p1 = scene.positions[scene.indices[t + 1]];
      const Vec3& p2 = scene.positions[scene.indices[t + 2]];
      const Vec3 fn = (p1 - p0).cross(p2 - p0);
      for (int k = 0; k < 3; ++k) {
        Vec3& nv = normals[scene.indices[t + k]];
        nv = nv + fn;
      }
    }
    for (Vec3& nv : normals) nv = nv.normalize();
  };
  accumulate_normals(scene.normals);

  if (config.height_scale > 0) {
    // Height relief as displacement along the smooth surface normal.
    const Image& hm = material.height;
    std::vector<Vec3> displaced = scene.positions;
    for (size_t idx = 0; idx < scene.positions.size(); ++idx) {
      const double h = sample_map(hm, scene.uv[idx].x, scene.uv[idx].y, 0);
      const Vec3 d = scene.normals[idx] * (h * config.height_scale * e);
      displaced[idx] = scene.positions[idx] + d;
    }
    scene.positions = std::move(displaced);
    accumulate_normals(scene.normals);
  }
  return scene;
}

RenderOutput rasterize(const PlaneScene& scene, const CameraPose& pose,
                       const Intrinsics& K, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw ValidationError("output dims must be >= 1");
  if (!scene.material) throw ValidationError("scene has no material");
  const CameraFrame frame = make_camera_frame(pose);

  Vec3 lo{std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi = lo * -1.0;
  for (const Vec3& p : scene.positions) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3& cam = pose.position;
  if (cam.x >= lo.x && cam.x <= hi.x && cam.y >= lo.y && cam.y <= hi.y &&
      cam.z >= lo.z && cam.z <= hi.z)
    throw ValidationError("camera position lies inside the mesh bounds");

  struct ProjectedVertex {
    double u, v, z;
  };
  std::vector<ProjectedVertex> proj(scene.positions.size());
  for (size_t i = 0; i < scene.positions.size(); ++i) {
    const CameraSpacePoint p = to_camera(frame, scene.positions[i]);
    proj[i].z = p.z;
    if (p.z > kNearPlane) {
      proj[i].u = K.cx + K.fx * p.x / p.z;
      proj[i].v = K.cy + K.fy * p.y / p.z;
    }
  }

  RenderOutput out;
  out.rgb = Image::create(out_w, out_h, 3);
  out.mask = Mask::create(out_w, out_h, 0);
  out.depth = DepthMap::create(out_w, out_h, 0.0);
  out.pose = pose;
  out.intrinsics = K;

  std::vector<double> zbuf(static_cast<size_t>(out_w) * out_h,
                           std::numeric_limits<double>::infinity());
  const MaterialSet& mat = *scene.material;
  const LightingConfig& light = scene.lighting;

  for (size_t t = 0; t < scene.indices.size(); t += 3) {
    const int i0 = scene.indices[t], i1 = scene.indices[t + 1],
              i2 = scene.indices[t + 2];
    const ProjectedVertex &a = proj[i0], &b = proj[i1], &c = proj[i2];
    if (a.z <= kNearPlane || b.z <= kNearPlane || c.z <= kNearPlane) continue;

    const double area = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
    if (area == 0) continue;

    const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.u, b.u, c.u}))));
    const int x1 = std::min(out_w - 1,
                            static_cast<int>(std::floor(std::max({a.u, b.u, c.u}))));
    const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.v, b.v, c.v}))));
    const int y1 = std::min(out_h - 1,
                            static_cast<int>(std::floor(std::max({a.v, b.v, c.v}))));

    for (int py = y0; py <= y1; ++py)
      for (int px = x0; px <= x1; ++px) {
        // Edge functions; accept both windings by normalizing with the
        // signed area.
        double w0 = (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
        double w1 = (c.u - b.u) * (py - b.v) - (c.v - b.v) * (px - b.u);
        double w2 = (a.u - c.u) * (py - c.v) - (a.v - c.v) * (px - c.u);
        double l0 = w1 / area, l1 = w2 / area, l2 = w0 / area;
        if (l0 < 0 || l1 < 0 || l2 < 0) continue;

        // Perspective-correct interpolation: attr/z is affine in screen
        // space.
        const double inv_z = l0 / a.z + l1 / b.z + l2 / c.z;
        const double z = 1.0 / inv_z;
        const size_t pix = static_cast<size_t>(py) * out_w + px;
        if (z >= zbuf[pix]) continue;
        zbuf[pix] = z;

        const double k0 = l0 / a.z * z, k1 = l1 / b.z * z, k2 = l2 / c.z * z;
        const Vec2 uv = scene.uv[i0] * k0 + scene.uv[i1] * k1 + scene.uv[i2] * k2;
        const Vec3 gn = (scene.normals[i0] * k0 + scene.normals[i1] * k1 +
                         scene.normals[i2] * k2)
                            .normalize();
        const Vec3 wp = scene.positions[i0] * k0 + scene.positions[i1] * k1 +
                        scene.positions[i2] * k2;

        const double uu = clamp01(uv.x), vv = clamp01(uv.y);
        const Vec3 tn = decode_normal({sample_map(mat.normal.encoded, uu, vv, 0),
                                       sample_map(mat.normal.encoded, uu, vv, 1),
                                       sample_map(mat.normal.encoded, uu, vv, 2)});
        // Tangent frame from the geometric normal, x-aligned: matches the
        // mesh's UV axes on a flat plane.
        Vec3 tangent{1 - gn.x * gn.x, -gn.x * gn.y, -gn.x * gn.z};
        const double tl = tangent.norm();
        tangent = tl > 1e-9 ? tangent * (1.0 / tl) : Vec3{0, 1, 0};
        const Vec3 bitangent = gn.cross(tangent);
        const Vec3 n = (tangent * tn.x + bitangent * tn.y + gn * tn.z).normalize();

        const double rough = sample_map(mat.roughness, uu, vv, 0);
        const double r4 = rough * rough * rough * rough;
        const double shininess = std::max(0.0, 2.0 / (r4 + 1e-4) - 2.0);

        const double ndotl = std::max(0.0, n.dot(light.light_dir));
        const Vec3 view = (pose.position - wp).normalize();
        const Vec3 h = (light.light_dir + view).normalize();
        const double spec = light.specular_strength * light.light_intensity *
                            std::pow(std::max(0.0, n.dot(h)), shininess);

        for (int ch = 0; ch < 3; ++ch) {
          const double alb = sample_map(mat.albedo, uu, vv, ch);
          out.rgb.at(px, py, ch) = clamp01(
              light.ambient * alb + ndotl * alb * light.light_intensity + spec);
        }
        out.mask.at(px, py) = 1;
      }
  }

  double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
  size_t hits = 0;
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      if (!out.mask.at(x, y)) continue;
      ++hits;
      const double z = zbuf[static_cast<size_t>(y) * out_w + x];
      zmin = std::min(zmin, z);
      zmax = std::max(zmax, z);
    }
  if (hits == 0) throw ValidationError("mesh projects to zero screen area");

  out.raw_depth_min = zmin;
  out.raw_depth_max = zmax;
  const double range = zmax - zmin;
  if (range > 1e-12)
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x)
        if (out.mask.at(x, y))
          out.depth.at(x, y) =
              (zbuf[static_cast<size_t>(y) * out_w + x] - zmin) / range;
  return out;
}

}  // namespace matkit
