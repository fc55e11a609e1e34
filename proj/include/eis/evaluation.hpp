#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "eis/raster.hpp"

namespace eis {

struct PRPoint {
    double precision = 1.0;
    double recall = 0.0;
};

struct PRCurve {
    std::array<PRPoint, 256> points;  // thresholds 0..255 on the quantized map
};

// Sweeps thresholds over the 8-bit quantization of the map (value > t).
// Precision is defined as 1 when nothing is predicted. Throws on empty gt.
PRCurve pr_curve(const SaliencyMap& map, const BinaryMask& gt);

// Adaptive-threshold F-measure: binarize at twice the map mean (capped just
// below the max so a nonzero map yields a nonempty prediction), then
// (1 + u2) P R / (u2 P + R) with u2 defaulting to 0.3.
double f_measure(const SaliencyMap& map, const BinaryMask& gt, double upsilon_sq = 0.3);

// trapezoidal area over the recall axis, points sorted by recall, clipped to [0,1]
double auc(const PRCurve& curve);

struct ImageScore {
    std::string image_id;
    double precision = 0.0;  // at the adaptive threshold
    double recall = 0.0;
    double f_measure = 0.0;
    double auc = 0.0;
};

struct ScoreReport {
    std::vector<ImageScore> rows;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f = 0.0;
    double mean_auc = 0.0;
};

ImageScore score_image(const std::string& id, const SaliencyMap& map, const BinaryMask& gt,
                       double upsilon_sq = 0.3);
ScoreReport make_report(std::vector<ImageScore> rows);

// image_id,precision,recall,f_measure,auc rows plus a summary row
void write_report_csv(const std::filesystem::path& path, const ScoreReport& report);
void write_curve_csv(const std::filesystem::path& path, const PRCurve& curve);

}  // namespace eis
