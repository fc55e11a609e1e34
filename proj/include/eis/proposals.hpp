#pragma once

#include <optional>
#include <vector>

#include "eis/features.hpp"
#include "eis/raster.hpp"
#include "eis/rle.hpp"
#include "eis/slic.hpp"

namespace eis {

struct RegionProposal {
    RegionMask mask;
    double confidence = 0.0;                 // eta, in [0,1]
    std::optional<RegionFeatures> features;  // filled when first needed
    std::optional<double> predicted;
};

struct ProposalParams {
    double merge_cutoff = 40.0;  // Lab-mean distance where the sweep stops
    double dedup_iou = 0.95;
};

// Agglomerative proposals: each layer's superpixels are merged greedily by
// Lab-mean distance, collecting every region that exists at some threshold of
// the sweep (regions created and consumed at the same distance never do).
// Initial superpixels are included; near-duplicates collapse to the first
// occurrence.
std::vector<RegionMask> generate_proposals(const Rgb8Image& image,
                                           const std::vector<SuperpixelLayer>& layers,
                                           const ProposalParams& params = {});

struct CenterPriorMap {
    GrayF32Image grid;
    double sigma_x = 0.0;
    double sigma_y = 0.0;
};

// G = exp{-(x-xc)^2 / 2 sigma_x^2 - (y-yc)^2 / 2 sigma_y^2} with the center
// at pixel (floor(w/2), floor(h/2)) so the peak value is exactly 1
CenterPriorMap center_prior(int width, int height, double sigma_x, double sigma_y);

// per-pixel product of the internal map, objectness and center prior, normalized
SaliencyMap psi_map(const SaliencyMap& internal, const SaliencyMap& objectness,
                    const CenterPriorMap& prior);

// confidence eta = (1+tau) sum(psi * R) / (tau sum(psi) + |R|); top N by eta
// descending, ties by smaller area then mask hash. Throws Error when
// sum(psi) = 0; callers fall back to select_regions_by_center_prior.
std::vector<RegionProposal> select_regions(const std::vector<RegionMask>& proposals,
                                           const SaliencyMap& psi, int n, double tau);

// degenerate-psi fallback: rank by mean center-prior value over the region
std::vector<RegionProposal> select_regions_by_center_prior(
    const std::vector<RegionMask>& proposals, const CenterPriorMap& prior, int n);

}  // namespace eis
