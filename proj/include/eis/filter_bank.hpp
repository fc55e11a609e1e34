#pragma once

#include <vector>

#include "eis/raster.hpp"

namespace eis {

struct FilterKernel {
    int size = 0;  // odd, size x size
    std::vector<float> weights;
};

// 15 kernels in the spirit of the Leung-Malik set: 6 oriented first
// derivatives of Gaussians (3 orientations x 2 scales), 6 oriented second
// derivatives, 2 LoG, 1 Gaussian. Derivative/LoG kernels sum to zero; all
// kernels are L1-normalized.
struct FilterBank {
    std::vector<FilterKernel> kernels;
    int size() const { return static_cast<int>(kernels.size()); }
};

FilterBank make_default_filter_bank();

// |response| planes of the luma image, one per kernel (clamp-to-edge borders)
std::vector<GrayF32Image> filter_responses(const FilterBank& bank, const GrayF32Image& luma);

}  // namespace eis
