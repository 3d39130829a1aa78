#pragma once

#include "matkit/types.hpp"

namespace matkit {

enum class Sampling { Nearest, Bilinear };

// Rotates a single map counter-clockwise by alpha about the pixel-grid
// center with wrap-around sampling (materials are treated as periodic).
// Angles within 1e-9 of a multiple of pi/2 take an exact index-permutation
// path, so nearest quarter-turns are byte-identical permutations.
Image rotate_image(const Image& img, double alpha, Sampling sampling);

// Rotates all four maps; decoded normal (x,y) components are rotated by the
// same alpha and re-encoded so lighting stays consistent with the texture.
MaterialSet rotate_material_set(const MaterialSet& mat, double alpha,
                                Sampling sampling = Sampling::Bilinear);

}  // namespace matkit
