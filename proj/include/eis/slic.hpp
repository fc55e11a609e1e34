#pragma once

#include <vector>

#include "eis/raster.hpp"

namespace eis {

struct SuperpixelLayer {
    std::vector<std::int32_t> labels;  // one per pixel, row-major, 0..count-1
    int width = 0;
    int height = 0;
    int count = 0;
    int layer_index = 0;
    int target_count = 0;
    double compactness = 0.0;

    std::int32_t label_at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

// CIELAB SLIC: grid-initialized centers perturbed to the lowest-gradient
// pixel of a 3x3 window, 10 assignment/update rounds with distance
// d_lab^2 + (m/S)^2 d_xy^2, then 4-connectivity enforcement (fragments are
// merged into the largest adjacent superpixel). Deterministic.
SuperpixelLayer segment_slic(const Rgb8Image& image, int target_count, double compactness);

// The six coarse-to-fine layers used throughout the pipeline.
std::vector<SuperpixelLayer> build_layers(const Rgb8Image& image,
                                          const std::vector<int>& target_counts,
                                          double compactness);
std::vector<SuperpixelLayer> build_layers(const Rgb8Image& image);

// per-superpixel pixel counts
std::vector<std::uint32_t> superpixel_areas(const SuperpixelLayer& layer);

std::vector<std::uint16_t> labels_as_gray16(const SuperpixelLayer& layer);

}  // namespace eis
