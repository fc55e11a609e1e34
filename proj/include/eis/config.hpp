#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eis/internal.hpp"
#include "eis/proposals.hpp"
#include "eis/retrieval.hpp"

namespace eis {

struct PipelineConfig {
    std::vector<int> layer_targets = {50, 100, 150, 200, 300, 400};
    double slic_compactness = 10.0;
    InternalParams internal;
    ProposalParams proposals;
    LabelBand band;
    int region_count = 100;  // N
    double tau = 0.4;
    int topk = 5;
    double svm_cost = 1.0;
    double gamma = 0.5;
    double center_sigma_divisor = 3.0;  // sigma_x = width / divisor
    bool clamp_negative_scores = true;
    std::string descriptor_version = kDescriptorVersion;
    double upsilon_sq = 0.3;
    int jobs = 0;  // 0 = hardware concurrency

    void validate() const;  // throws Error when a value leaves its range
};

// flat `key = value` text; '#' starts a comment; unknown keys are rejected
PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base = {});
void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value);

}  // namespace eis
