#pragma once

#include <filesystem>

#include "eis/raster.hpp"

namespace eis {

// PNG/PPM readers and writers. Readers accept 8-bit gray/palette/RGB/RGBA
// PNG (converted as needed) and binary PPM/PGM.

Rgb8Image read_image_rgb8(const std::filesystem::path& path);
Gray8Image read_image_gray8(const std::filesystem::path& path);

void write_png_rgb8(const std::filesystem::path& path, const Rgb8Image& image);
void write_png_gray8(const std::filesystem::path& path, const Gray8Image& image);
void write_png_gray16(const std::filesystem::path& path, const std::vector<std::uint16_t>& data,
                      int width, int height);

void write_ppm(const std::filesystem::path& path, const Rgb8Image& image);

// Saliency map output: 8-bit PNG (value = round(255 * score)) plus a
// lossless f32 sidecar in SFv1 layout (rows = height).
void write_map_png(const std::filesystem::path& path, const SaliencyMap& map);
void write_map_sidecar(const std::filesystem::path& path, const SaliencyMap& map);
SaliencyMap read_map_sidecar(const std::filesystem::path& path);

}  // namespace eis
