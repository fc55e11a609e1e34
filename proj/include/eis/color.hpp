#pragma once

#include <array>

#include "eis/raster.hpp"

namespace eis {

// sRGB (D65) color conversions, shared by every feature set.

// L in [0,100], a/b roughly [-128,127]
std::array<float, 3> rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// h, s, v all in [0,1] (hue wraps)
std::array<float, 3> rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Rec.601 luma in [0,1]
float rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

struct ColorPlanes {
    GrayF32Image rgb[3];  // [0,1]
    GrayF32Image lab[3];  // native Lab units
    GrayF32Image hsv[3];  // [0,1]
    GrayF32Image luma;    // [0,1]
};

ColorPlanes make_color_planes(const Rgb8Image& image);

}  // namespace eis
