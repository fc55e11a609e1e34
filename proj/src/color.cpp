#include "eis/color.hpp"

#include <algorithm>
#include <cmath>

namespace eis {

namespace {

inline float srgb_linearize(float c) {
    return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

inline float lab_f(float t) {
    return t > 0.008856f ? std::cbrt(t) : (7.787f * t + 16.0f / 116.0f);
}

}  // namespace

std::array<float, 3> rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    const float r = srgb_linearize(r8 / 255.0f);
    const float g = srgb_linearize(g8 / 255.0f);
    const float b = srgb_linearize(b8 / 255.0f);

    // sRGB -> XYZ, D65 white point
    const float x = (0.4124564f * r + 0.3575761f * g + 0.1804375f * b) / 0.95047f;
    const float y = 0.2126729f * r + 0.7151522f * g + 0.0721750f * b;
    const float z = (0.0193339f * r + 0.1191920f * g + 0.9503041f * b) / 1.08883f;

    const float fx = lab_f(x);
    const float fy = lab_f(y);
    const float fz = lab_f(z);

    return {116.0f * fy - 16.0f, 500.0f * (fx - fy), 200.0f * (fy - fz)};
}

std::array<float, 3> rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    const float r = r8 / 255.0f;
    const float g = g8 / 255.0f;
    const float b = b8 / 255.0f;

    const float mx = std::max({r, g, b});
    const float mn = std::min({r, g, b});
    const float d = mx - mn;

    float h = 0.0f;
    if (d > 0.0f) {
        if (mx == r) {
            h = (g - b) / d;
            if (h < 0.0f) h += 6.0f;
        } else if (mx == g) {
            h = (b - r) / d + 2.0f;
        } else {
            h = (r - g) / d + 4.0f;
        }
        h /= 6.0f;
    }
    const float s = mx > 0.0f ? d / mx : 0.0f;
    return {h, s, mx};
}

float rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return (0.299f * r + 0.587f * g + 0.114f * b) / 255.0f;
}

ColorPlanes make_color_planes(const Rgb8Image& image) {
    ColorPlanes p;
    for (int c = 0; c < 3; ++c) {
        p.rgb[c] = GrayF32Image(image.width, image.height);
        p.lab[c] = GrayF32Image(image.width, image.height);
        p.hsv[c] = GrayF32Image(image.width, image.height);
    }
    p.luma = GrayF32Image(image.width, image.height);

    const std::size_t n = image.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t r = image.data[i * 3 + 0];
        const std::uint8_t g = image.data[i * 3 + 1];
        const std::uint8_t b = image.data[i * 3 + 2];
        p.rgb[0].data[i] = r / 255.0f;
        p.rgb[1].data[i] = g / 255.0f;
        p.rgb[2].data[i] = b / 255.0f;
        const auto lab = rgb_to_lab(r, g, b);
        const auto hsv = rgb_to_hsv(r, g, b);
        for (int c = 0; c < 3; ++c) {
            p.lab[c].data[i] = lab[c];
            p.hsv[c].data[i] = hsv[c];
        }
        p.luma.data[i] = rgb_to_luma(r, g, b);
    }
    return p;
}

}  // namespace eis
