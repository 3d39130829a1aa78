#pragma once

#include "matkit/rng.hpp"
#include "matkit/types.hpp"

namespace matkit {

// Band-limited periodic test texture: a few random sinusoidal plane waves
// with integer frequencies, so the result tiles exactly. Values are min-max
// mapped to [lo, hi].
Image make_periodic_texture(int size, int channels, double lo, double hi, Rng& rng);

// Full periodic material (albedo, height-derived normals, roughness,
// height), suitable as synthetic ground truth.
MaterialSet make_procedural_material(int size, Rng& rng);

}  // namespace matkit
