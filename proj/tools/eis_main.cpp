#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "eis/pipeline.hpp"
#include "eis/synthetic.hpp"

namespace {

// exit codes: 0 success, 1 validation error, 2 partial failure
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kPartialFailure = 2;

struct CommonOpts {
    std::string config_path;
    double gamma = -1.0;
    int topk = 0;
    int jobs = -1;
};

eis::PipelineConfig resolve_config(const CommonOpts& opts) {
    eis::PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = eis::read_config(opts.config_path);
    if (opts.gamma >= 0.0) cfg.gamma = opts.gamma;
    if (opts.topk > 0) cfg.topk = opts.topk;
    if (opts.jobs >= 0) cfg.jobs = opts.jobs;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file (key = value lines)");
    cmd->add_option("--gamma", opts.gamma, "fusion weight override")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--topk", opts.topk, "retrieved example count override");
    cmd->add_option("--jobs", opts.jobs, "worker threads (0 = auto)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-branch visual saliency pipeline (internal contrast + retrieval transfer)"};
    app.require_subcommand(1);

    // build-index
    auto* build = app.add_subcommand("build-index", "build the annotation database");
    std::string build_manifest, build_root, build_out;
    CommonOpts build_opts;
    build->add_option("--manifest", build_manifest, "database manifest")->required();
    build->add_option("--root", build_root, "path root (default: manifest directory)");
    build->add_option("--out", build_out, "output index directory")->required();
    add_common(build, build_opts);

    // detect
    auto* detect = app.add_subcommand("detect", "run the pipeline over a test corpus");
    std::string det_manifest, det_index, det_out;
    eis::DetectOptions det_options;
    std::string det_proposals, det_objectness, det_dump_internal, det_dump_model;
    CommonOpts det_opts;
    detect->add_option("--manifest", det_manifest, "test manifest")->required();
    detect->add_option("--index", det_index, "index directory")->required();
    detect->add_option("--out", det_out, "output directory")->required();
    detect->add_option("--proposals", det_proposals,
                       "imported proposal masks (.rlepack file or directory)");
    detect->add_option("--objectness", det_objectness,
                       "imported objectness maps (.f32 file or directory)");
    detect->add_option("--dump-internal", det_dump_internal, "write per-layer maps here");
    detect->add_option("--dump-model", det_dump_model, "write per-image model dumps here");
    add_common(detect, det_opts);

    // eval
    auto* eval = app.add_subcommand("eval", "score saliency maps against ground truth");
    std::string eval_maps, eval_manifest, eval_out, eval_suffix = "fused", eval_curve;
    CommonOpts eval_opts;
    eval->add_option("--maps", eval_maps, "directory with <id>_<suffix>.f32 sidecars")->required();
    eval->add_option("--manifest", eval_manifest, "test manifest")->required();
    eval->add_option("--out", eval_out, "output CSV")->required();
    eval->add_option("--suffix", eval_suffix, "map suffix to score (default: fused)");
    eval->add_option("--curve", eval_curve, "also write the 256-row mean PR curve CSV here");
    add_common(eval, eval_opts);

    // gen-synthetic
    auto* gen = app.add_subcommand("gen-synthetic", "emit the synthetic benchmark corpus");
    std::string gen_out;
    eis::SyntheticParams gen_params;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--seed", gen_params.seed, "RNG seed");
    gen->add_option("--db-size", gen_params.db_count, "database image count");
    gen->add_option("--test-size", gen_params.test_count, "test image count");
    gen->add_option("--width", gen_params.width, "image width");
    gen->add_option("--height", gen_params.height, "image height");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidationError;
    }

    try {
        if (build->parsed()) {
            const eis::PipelineConfig cfg = resolve_config(build_opts);
            const std::filesystem::path manifest(build_manifest);
            const std::filesystem::path root =
                build_root.empty() ? manifest.parent_path() : std::filesystem::path(build_root);
            const eis::BuildIndexSummary s =
                eis::cmd_build_index(manifest, root, build_out, cfg);
            std::printf("index: %zu records, %zu proposals (%zu positive / %zu negative)\n",
                        s.records, s.proposals, s.positives, s.negatives);
            return kOk;
        }
        if (detect->parsed()) {
            const eis::PipelineConfig cfg = resolve_config(det_opts);
            det_options.proposals_path = det_proposals;
            det_options.objectness_path = det_objectness;
            det_options.dump_internal = det_dump_internal;
            det_options.dump_model = det_dump_model;
            const eis::DetectSummary s =
                eis::cmd_detect(det_manifest, det_index, det_out, cfg, det_options);
            std::printf("detect: %zu processed, %zu failed\n", s.processed,
                        s.failed_ids.size());
            for (std::size_t i = 0; i < s.failed_ids.size(); ++i)
                std::fprintf(stderr, "failed %s: %s\n", s.failed_ids[i].c_str(),
                             s.failure_reasons[i].c_str());
            if (!s.failed_ids.empty()) return s.processed > 0 ? kPartialFailure : kValidationError;
            return kOk;
        }
        if (eval->parsed()) {
            const eis::PipelineConfig cfg = resolve_config(eval_opts);
            const eis::ScoreReport r = eis::cmd_eval(eval_maps, eval_manifest, eval_out,
                                                     eval_suffix, cfg.upsilon_sq, eval_curve);
            std::printf("eval: %zu images, mean P %.4f R %.4f F %.4f AUC %.4f\n", r.rows.size(),
                        r.mean_precision, r.mean_recall, r.mean_f, r.mean_auc);
            return kOk;
        }
        if (gen->parsed()) {
            eis::gen_synthetic(gen_out, gen_params);
            std::printf("synthetic corpus written to %s (%d db, %d test)\n", gen_out.c_str(),
                        gen_params.db_count, gen_params.test_count);
            return kOk;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidationError;
    }
    return kValidationError;
}
