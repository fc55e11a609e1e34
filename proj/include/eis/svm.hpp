#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "eis/proposals.hpp"
#include "eis/raster.hpp"

namespace eis {

struct LinearModel {
    Eigen::VectorXd weights;     // in standardized feature space
    double bias = 0.0;
    Eigen::VectorXd feat_mean;   // training-set standardization
    Eigen::VectorXd feat_scale;  // population std, 1.0 for constant columns
    int positive_count = 0;
    int negative_count = 0;
    double cost = 1.0;
};

struct TrainTrace {
    std::vector<double> epoch_objectives;  // primal value after each epoch
    double final_gap = 0.0;
    int epochs = 0;
};

// L2-regularized hinge loss, (1/2)|w|^2 + C sum max(0, 1 - y (w'x + b)),
// bias unregularized. Trained by deterministic maximal-violating-pair dual
// updates until the duality gap drops below 1e-6 (or 10,000 epochs).
// Samples are canonically ordered internally, so the result is invariant to
// input order. Throws SingleClassError unless both classes are present.
LinearModel train_linear_svm(const std::vector<Eigen::VectorXd>& samples,
                             const std::vector<int>& labels, double cost,
                             TrainTrace* trace = nullptr);

double predict(const LinearModel& model, const Eigen::VectorXd& raw_features);

// primal objective of the stated loss on raw-feature samples
double svm_objective(const LinearModel& model, const std::vector<Eigen::VectorXd>& samples,
                     const std::vector<int>& labels, double cost);

// effective raw-space coefficients (standardization folded in), one per line,
// bias last
void dump_model(const LinearModel& model, const std::filesystem::path& path);

// S_E = sum over regions of max(score, 0) times the region mask, normalized
// (negative scores pass through when clamping is disabled). Regions are
// accumulated in a canonical order, so the result is invariant to list order.
SaliencyMap external_map(int width, int height, const std::vector<RegionProposal>& regions,
                         bool clamp_negative = true);

}  // namespace eis
