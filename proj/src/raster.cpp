#include "eis/raster.hpp"

#include <algorithm>
#include <cmath>

namespace eis {

void validate_image_dims(int width, int height, const std::string& what) {
    if (width < kMinImageDim || height < kMinImageDim) {
        throw Error(what + ": image " + std::to_string(width) + "x" + std::to_string(height) +
                    " below pipeline minimum " + std::to_string(kMinImageDim) + "x" +
                    std::to_string(kMinImageDim));
    }
}

SaliencyMap normalize_map(const SaliencyMap& map) {
    const auto& v = map.grid.data;
    if (v.empty()) throw Error("normalize_map: empty map");

    float mn = v[0];
    float mx = v[0];
    for (float x : v) {
        if (!std::isfinite(x)) throw Error("normalize_map: non-finite value");
        mn = std::min(mn, x);
        mx = std::max(mx, x);
    }

    GrayF32Image out(map.grid.width, map.grid.height);
    if (mx > mn) {
        const float range = mx - mn;
        for (std::size_t i = 0; i < v.size(); ++i) out.data[i] = (v[i] - mn) / range;
    }
    // constant input: all zeros (a contrast-free map carries no evidence)
    return SaliencyMap(std::move(out), true);
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t v : grid.data) n += v;
    return n;
}

void validate_binary(const BinaryMask& mask) {
    for (std::uint8_t v : mask.grid.data) {
        if (v > 1) throw Error("mask value outside {0,1}");
    }
}

void validate_box(const BoundingBox& box, int width, int height, const std::string& what) {
    if (box.x_min < 0 || box.y_min < 0 || box.x_min > box.x_max || box.y_min > box.y_max ||
        box.x_max >= width || box.y_max >= height) {
        throw Error(what + ": invalid box " + std::to_string(box.x_min) + " " +
                    std::to_string(box.y_min) + " " + std::to_string(box.x_max) + " " +
                    std::to_string(box.y_max) + " for " + std::to_string(width) + "x" +
                    std::to_string(height));
    }
}

}  // namespace eis
