#pragma once

#include <Eigen/Core>

#include "eis/features.hpp"
#include "eis/raster.hpp"
#include "eis/slic.hpp"

namespace eis {

struct InternalParams {
    double alpha = 1.0;     // similarity term weight
    double beta = 1.0;      // prior term weight
    double epsilon = 1e-4;  // ridge added for invertibility
    double sigma2 = 0.1;    // affinity bandwidth (features are standardized)
    double kappa = 0.01;    // ridge weight inside the discriminability form
    int objectness_windows = 1000;
    std::vector<double> layer_weights = {1, 1, 1, 1, 1, 1};
};

// Window-accumulation objectness: stratified deterministic window samples
// scored by boundary gradient strength times interior/surround color
// contrast, splatted over covered pixels and normalized.
SaliencyMap objectness_map(const Rgb8Image& image, int window_count = 1000);

// m_i = sum of objectness over the superpixel's pixels, scaled so max = 1
Eigen::VectorXd superpixel_prior(const SaliencyMap& objectness, const SuperpixelLayer& layer);

// U = (1/n) P (I - X (X' P X + n kappa I)^-1 X') P with P the centering
// projection; symmetrized. The quadratic form l'Ul equals the minimum of the
// centered ridge regression residual at labels l.
Eigen::MatrixXd discriminability(const Eigen::MatrixXd& features, double kappa);

struct AffinityMatrix {
    Eigen::MatrixXd weights;  // W, unit diagonal
    Eigen::VectorXd degree;   // row sums of W

    Eigen::MatrixXd laplacian() const;  // D - W
    // (D - W) v computed as degree .* v - W v; exact zeros for v = ones
    Eigen::VectorXd laplacian_apply(const Eigen::VectorXd& v) const;
};

// W_ij = exp(-|x_i - x_j|_2 / sigma^2), distance not squared
AffinityMatrix affinity(const Eigen::MatrixXd& features, double sigma2);

struct LayerSolution {
    Eigen::VectorXd scores;  // l, one per superpixel
    double residual = 0.0;   // |2Al - beta m| / |beta m|
};

// minimize l' {U + alpha (D - W) + eps I} l - beta l'm via SPD factorization
LayerSolution solve_layer(const Eigen::MatrixXd& discrim, const AffinityMatrix& aff,
                          const Eigen::VectorXd& prior, double alpha, double beta, double eps);

// paint per-superpixel scores onto the pixel grid (min-max normalized first)
SaliencyMap paint_layer(const Eigen::VectorXd& scores, const SuperpixelLayer& layer);

struct InternalResult {
    SaliencyMap objectness;
    std::vector<SaliencyMap> layer_maps;  // one per layer
    SaliencyMap map;                      // fused internal saliency map
};

InternalResult run_internal(const Rgb8Image& image, const std::vector<SuperpixelLayer>& layers,
                            const ImageContext& ctx, const InternalParams& params,
                            const SaliencyMap* imported_objectness = nullptr);

// standalone entry point: builds the six layers and fuses them
SaliencyMap internal_map(const Rgb8Image& image, const InternalParams& params = {});

}  // namespace eis
