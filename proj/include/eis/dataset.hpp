#pragma once

#include <filesystem>
#include <vector>

#include "eis/raster.hpp"

namespace eis {

// One manifest record per line: <id>\t<image-path>\t[mask-path]\t[box-path]
// Empty optional fields are allowed; paths are resolved against `root`.
struct ManifestEntry {
    std::string id;
    std::string image_path;
    std::string mask_path;  // empty if absent
    std::string box_path;   // empty if absent
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);

std::vector<BoundingBox> read_box_file(const std::filesystem::path& path, int width, int height);
void write_box_file(const std::filesystem::path& path, const std::vector<BoundingBox>& boxes);

// Grayscale mask files are binarized at threshold 128.
BinaryMask read_mask_file(const std::filesystem::path& path);
void write_mask_file(const std::filesystem::path& path, const BinaryMask& mask);

LabeledImage load_entry(const std::filesystem::path& root, const ManifestEntry& entry);
std::vector<LabeledImage> load_dataset(const std::filesystem::path& root,
                                       const std::filesystem::path& manifest);

}  // namespace eis
