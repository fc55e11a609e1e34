#include "eis/config.hpp"

#include <fstream>
#include <sstream>

namespace eis {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (layer_targets.empty()) throw Error("config: layer_targets empty");
    for (int t : layer_targets)
        if (t < 1) throw Error("config: layer target must be positive");
    if (slic_compactness <= 0) throw Error("config: slic_compactness must be positive");
    if (internal.alpha < 0) throw Error("config: alpha must be >= 0");
    if (internal.beta <= 0) throw Error("config: beta must be > 0");
    if (internal.epsilon <= 0) throw Error("config: epsilon must be > 0");
    if (internal.sigma2 <= 0) throw Error("config: sigma2 must be > 0");
    if (internal.kappa <= 0) throw Error("config: kappa must be > 0");
    if (internal.objectness_windows < 1) throw Error("config: objectness_windows must be >= 1");
    if (proposals.merge_cutoff < 0) throw Error("config: merge_cutoff must be >= 0");
    if (proposals.dedup_iou <= 0 || proposals.dedup_iou > 1)
        throw Error("config: dedup_iou outside (0,1]");
    if (band.iou_negative < 0 || band.iou_positive > 1 ||
        band.iou_negative > band.iou_positive)
        throw Error("config: IoU band must satisfy 0 <= negative <= positive <= 1");
    if (region_count < 1) throw Error("config: region_count must be positive");
    if (tau <= 0) throw Error("config: tau must be positive");
    if (topk < 1) throw Error("config: topk must be positive");
    if (svm_cost <= 0) throw Error("config: svm_cost must be positive");
    if (gamma < 0 || gamma > 1) throw Error("config: gamma outside [0,1]");
    if (center_sigma_divisor <= 0) throw Error("config: center_sigma_divisor must be positive");
    if (upsilon_sq <= 0) throw Error("config: upsilon_sq must be positive");
    if (jobs < 0) throw Error("config: jobs must be >= 0");
}

void apply_config_line(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "layer_targets") {
        cfg.layer_targets.clear();
        for (double v : parse_list(value)) cfg.layer_targets.push_back(static_cast<int>(v));
    } else if (key == "layer_weights") {
        cfg.internal.layer_weights = parse_list(value);
    } else if (key == "slic_compactness") {
        cfg.slic_compactness = std::stod(value);
    } else if (key == "alpha") {
        cfg.internal.alpha = std::stod(value);
    } else if (key == "beta") {
        cfg.internal.beta = std::stod(value);
    } else if (key == "epsilon") {
        cfg.internal.epsilon = std::stod(value);
    } else if (key == "sigma2") {
        cfg.internal.sigma2 = std::stod(value);
    } else if (key == "kappa") {
        cfg.internal.kappa = std::stod(value);
    } else if (key == "objectness_windows") {
        cfg.internal.objectness_windows = std::stoi(value);
    } else if (key == "merge_cutoff") {
        cfg.proposals.merge_cutoff = std::stod(value);
    } else if (key == "dedup_iou") {
        cfg.proposals.dedup_iou = std::stod(value);
    } else if (key == "iou_positive") {
        cfg.band.iou_positive = std::stod(value);
    } else if (key == "iou_negative") {
        cfg.band.iou_negative = std::stod(value);
    } else if (key == "region_count") {
        cfg.region_count = std::stoi(value);
    } else if (key == "tau") {
        cfg.tau = std::stod(value);
    } else if (key == "topk") {
        cfg.topk = std::stoi(value);
    } else if (key == "svm_cost") {
        cfg.svm_cost = std::stod(value);
    } else if (key == "gamma") {
        cfg.gamma = std::stod(value);
    } else if (key == "center_sigma_divisor") {
        cfg.center_sigma_divisor = std::stod(value);
    } else if (key == "clamp_negative_scores") {
        cfg.clamp_negative_scores = value == "true" || value == "1";
    } else if (key == "descriptor_version") {
        cfg.descriptor_version = value;
    } else if (key == "upsilon_sq") {
        cfg.upsilon_sq = std::stod(value);
    } else if (key == "jobs") {
        cfg.jobs = std::stoi(value);
    } else {
        throw Error("config: unknown key '" + key + "'");
    }
}

PipelineConfig read_config(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            apply_config_line(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error("config line " + std::to_string(lineno) + ": bad value");
        }
    }
    base.validate();
    return base;
}

}  // namespace eis
