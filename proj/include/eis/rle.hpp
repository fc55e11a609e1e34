#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "eis/raster.hpp"

namespace eis {

// Run-length encoded binary mask over the row-major flattened pixel sequence.
// Runs alternate zero/one starting with a zero run; run lengths sum to w*h.
struct RegionMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> runs;

    // derived, filled by finalize()
    std::uint64_t area = 0;
    int x_min = 0, y_min = 0, x_max = -1, y_max = -1;

    void finalize();  // recompute area and bounding box; validates run sum

    bool empty() const { return area == 0; }
    BoundingBox bbox() const { return {x_min, y_min, x_max, y_max}; }

    BinaryMask to_mask() const;
    static RegionMask from_mask(const BinaryMask& mask);
    // builds the mask of pixels whose label passes `member`
    static RegionMask from_labels(const std::vector<std::int32_t>& labels, int width, int height,
                                  const std::function<bool(std::int32_t)>& member);

    // calls fn(start, len) for every run of ones (flattened offsets)
    template <typename Fn>
    void for_each_one_run(Fn&& fn) const {
        std::uint64_t pos = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if ((i & 1) == 1 && runs[i] > 0) fn(pos, runs[i]);
            pos += runs[i];
        }
    }

    std::uint64_t hash() const;  // FNV-1a over dims and runs
};

std::uint64_t intersection_area(const RegionMask& a, const RegionMask& b);
double iou(const RegionMask& a, const RegionMask& b);
// overlap with an axis-aligned box region
std::uint64_t intersection_area(const RegionMask& a, const BoundingBox& box);
double iou(const RegionMask& a, const BoundingBox& box);

// count of exposed pixel edges (4-neighborhood boundary length)
std::uint64_t perimeter(const RegionMask& mask);

bool is_4_connected(const RegionMask& mask);

// RLEv1 framing: u32 width, u32 height, u32 run lengths (little endian).
// Runs are self-delimiting (they sum to width*height), so blobs concatenate.
void append_rle(std::vector<std::uint8_t>& out, const RegionMask& mask);
RegionMask parse_rle(const std::uint8_t* data, std::size_t size, std::size_t& offset);

void write_rle_file(const std::filesystem::path& path, const RegionMask& mask);
RegionMask read_rle_file(const std::filesystem::path& path);

// pack: u32 mask count, then that many RLEv1 blobs
void write_rle_pack(const std::filesystem::path& path, const std::vector<RegionMask>& masks);
std::vector<RegionMask> read_rle_pack(const std::filesystem::path& path);

}  // namespace eis
