#pragma once

#include <filesystem>
#include <optional>

#include "eis/config.hpp"
#include "eis/evaluation.hpp"
#include "eis/fusion.hpp"
#include "eis/svm.hpp"

namespace eis {

struct DetectOptions {
    std::filesystem::path proposals_path;   // file or directory of .rlepack imports
    std::filesystem::path objectness_path;  // file or directory of .f32 imports
    std::filesystem::path dump_internal;    // per-layer maps and labels
    std::filesystem::path dump_model;       // per-image coefficient dumps
};

struct DetectionOutput {
    SaliencyMap internal;
    SaliencyMap external;
    SaliencyMap fused;
    SaliencyMap objectness;
    std::vector<SuperpixelLayer> layers;
    std::vector<SaliencyMap> layer_maps;
    std::vector<RegionProposal> regions;
    std::optional<LinearModel> model;
    double gamma_used = 0.0;
    bool selection_fallback = false;  // degenerate psi, ranked by center prior
    bool single_class_fallback = false;
};

// Full two-branch pipeline for one image. `imported_*` bypass the in-repo
// proposal generator / objectness scorer.
DetectionOutput detect_one(const LabeledImage& image, const RetrievalIndex& index,
                           const PipelineConfig& cfg,
                           const std::vector<RegionMask>* imported_proposals = nullptr,
                           const SaliencyMap* imported_objectness = nullptr);

struct BuildIndexSummary {
    std::size_t records = 0;
    std::size_t proposals = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

BuildIndexSummary cmd_build_index(const std::filesystem::path& manifest,
                                  const std::filesystem::path& root,
                                  const std::filesystem::path& out_dir,
                                  const PipelineConfig& cfg);

struct DetectSummary {
    std::size_t processed = 0;
    std::vector<std::string> failed_ids;
    std::vector<std::string> failure_reasons;
    bool wrote_report = false;
};

DetectSummary cmd_detect(const std::filesystem::path& manifest,
                         const std::filesystem::path& index_dir,
                         const std::filesystem::path& out_dir, const PipelineConfig& cfg,
                         const DetectOptions& options = {});

// `curve_csv`, when non-empty, receives the 256-row mean PR curve over the
// scored images for external plotting.
ScoreReport cmd_eval(const std::filesystem::path& maps_dir,
                     const std::filesystem::path& manifest,
                     const std::filesystem::path& out_csv, const std::string& suffix,
                     double upsilon_sq, const std::filesystem::path& curve_csv = {});

// worker pool with deterministic, index-addressed results
void parallel_for_images(std::size_t count, int jobs,
                         const std::function<void(std::size_t)>& fn);

int resolve_jobs(int jobs);

}  // namespace eis
