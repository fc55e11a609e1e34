#pragma once

#include <Eigen/Core>
#include <array>

#include "eis/color.hpp"
#include "eis/filter_bank.hpp"
#include "eis/raster.hpp"
#include "eis/rle.hpp"
#include "eis/slic.hpp"

namespace eis {

inline constexpr int kSuperpixelFeatureDim = 30;
inline constexpr int kRegionFeatureDim = 81;
inline constexpr int kDescriptorDim = 512;
inline constexpr int kHistBins = 4;        // per channel, for region signatures
inline constexpr int kBorderWidth = 15;    // background frame width in pixels
inline const char* const kDescriptorVersion = "cg512-v1";

// Rows aligned with superpixel indices; every column standardized to zero
// mean / unit variance across the image (constant columns left at zero).
struct SuperpixelFeatures {
    Eigen::MatrixXd matrix;  // n x 30
};

using RegionFeatures = Eigen::Matrix<float, kRegionFeatureDim, 1>;

struct ImageDescriptor {
    Eigen::VectorXf vector;  // d = 512, unit L2 norm
    std::string descriptor_version = kDescriptorVersion;
};

// Per-image planes shared by the feature extractors: color channels, |filter
// response| planes, and 4-bin histogram indices per channel.
struct ImageContext {
    int width = 0, height = 0;
    ColorPlanes color;
    std::vector<GrayF32Image> filters;             // 15 planes
    std::array<std::vector<std::uint8_t>, 9> bins;  // histogram bin index per pixel

    const GrayF32Image& channel(int c) const {
        return c < 3 ? color.rgb[c] : c < 6 ? color.lab[c - 3] : color.hsv[c - 6];
    }
};

ImageContext make_image_context(const Rgb8Image& image, const FilterBank& bank);

// mask of all pixels within 15 px of an image edge; requires min dim > 30
BinaryMask border_mask(const Rgb8Image& image);
RegionMask border_region(int width, int height);

SuperpixelFeatures superpixel_features(const ImageContext& ctx, const SuperpixelLayer& layer);
SuperpixelFeatures superpixel_features(const Rgb8Image& image, const SuperpixelLayer& layer,
                                       const FilterBank& bank);

RegionFeatures region_features(const ImageContext& ctx, const RegionMask& region,
                               const RegionMask& border);
RegionFeatures region_features(const Rgb8Image& image, const BinaryMask& region,
                               const BinaryMask& border, const FilterBank& bank);

// Global descriptor: 2x2 grid of saturation-weighted 32-bin hue histograms
// split into two saturation bands (256 dims) plus a 4x4 grid of 8-orientation,
// 2-scale gradient histograms (256 dims). Each half is L2-normalized, then the
// concatenation is; an all-zero descriptor degenerates to e0.
ImageDescriptor image_descriptor(const Rgb8Image& image);

double descriptor_sq_distance(const ImageDescriptor& a, const ImageDescriptor& b);

}  // namespace eis
