#include "eis/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

#include "eis/dataset.hpp"
#include "eis/image_io.hpp"
#include "eis/internal.hpp"

namespace eis {

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_images(std::size_t count, int jobs,
                         const std::function<void(std::size_t)>& fn) {
    const int threads = std::min<std::size_t>(std::max(1, jobs), std::max<std::size_t>(1, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

DetectionOutput detect_one(const LabeledImage& li, const RetrievalIndex& index,
                           const PipelineConfig& cfg,
                           const std::vector<RegionMask>* imported_proposals,
                           const SaliencyMap* imported_objectness) {
    DetectionOutput out;
    const Rgb8Image& image = li.image;
    const FilterBank bank = make_default_filter_bank();
    const ImageContext ctx = make_image_context(image, bank);
    out.layers = build_layers(image, cfg.layer_targets, cfg.slic_compactness);
    const std::vector<SuperpixelLayer>& layers = out.layers;

    InternalResult internal =
        run_internal(image, layers, ctx, cfg.internal, imported_objectness);
    out.objectness = std::move(internal.objectness);
    out.layer_maps = std::move(internal.layer_maps);
    out.internal = std::move(internal.map);

    std::vector<RegionMask> proposals;
    if (imported_proposals) {
        proposals = *imported_proposals;
        for (const RegionMask& m : proposals)
            if (m.width != image.width || m.height != image.height)
                throw Error(li.id + ": imported proposal dimension mismatch");
    } else {
        proposals = generate_proposals(image, layers, cfg.proposals);
    }
    const int n_regions = std::min<int>(cfg.region_count, static_cast<int>(proposals.size()));
    if (n_regions < 1) throw Error(li.id + ": no proposals available");

    const CenterPriorMap prior =
        center_prior(image.width, image.height, image.width / cfg.center_sigma_divisor,
                     image.height / cfg.center_sigma_divisor);
    const SaliencyMap psi = psi_map(out.internal, out.objectness, prior);

    double psi_sum = 0;
    for (float v : psi.grid.data) psi_sum += v;
    if (psi_sum > 0) {
        out.regions = select_regions(proposals, psi, n_regions, cfg.tau);
    } else {
        out.regions = select_regions_by_center_prior(proposals, prior, n_regions);
        out.selection_fallback = true;
    }

    // retrieval + per-image classifier
    const ImageDescriptor desc = image_descriptor(image);
    const int k = std::min<int>(cfg.topk, static_cast<int>(index.size()));
    std::vector<std::size_t> hits = index.query(desc, k);
    // training samples ordered by record id then proposal index
    std::sort(hits.begin(), hits.end(), [&index](std::size_t a, std::size_t b) {
        return index.records[a].image_id < index.records[b].image_id;
    });
    std::vector<Eigen::VectorXd> samples;
    std::vector<int> labels;
    for (std::size_t h : hits) {
        for (const ProposalAnnotation& p : index.records[h].proposals) {
            samples.push_back(p.features.cast<double>());
            labels.push_back(p.label);
        }
    }

    GrayF32Image zero(image.width, image.height, 0.0f);
    try {
        LinearModel model = train_linear_svm(samples, labels, cfg.svm_cost);
        const RegionMask border = border_region(image.width, image.height);
        for (RegionProposal& r : out.regions) {
            r.features = region_features(ctx, r.mask, border);
            r.predicted = predict(model, r.features->cast<double>());
        }
        out.external = external_map(image.width, image.height, out.regions,
                                    cfg.clamp_negative_scores);
        out.model = std::move(model);
        out.gamma_used = cfg.gamma;
    } catch (const SingleClassError&) {
        // retrieval produced degenerate examples: fall back to the internal map
        out.external = SaliencyMap(zero, true);
        out.gamma_used = 0.0;
        out.single_class_fallback = true;
    }

    out.fused = fuse(out.external, out.internal, out.gamma_used);
    return out;
}

BuildIndexSummary cmd_build_index(const std::filesystem::path& manifest,
                                  const std::filesystem::path& root,
                                  const std::filesystem::path& out_dir,
                                  const PipelineConfig& cfg) {
    cfg.validate();
    const std::vector<LabeledImage> database = load_dataset(root, manifest);
    if (database.empty()) throw Error("build-index: empty database manifest");

    ProposalSource source = [&cfg](const LabeledImage& li) {
        const std::vector<SuperpixelLayer> layers =
            build_layers(li.image, cfg.layer_targets, cfg.slic_compactness);
        return generate_proposals(li.image, layers, cfg.proposals);
    };
    const RetrievalIndex index =
        build_index(database, source, cfg.band, resolve_jobs(cfg.jobs));
    std::filesystem::create_directories(out_dir);
    save_index(index, out_dir);

    BuildIndexSummary s;
    s.records = index.records.size();
    for (const auto& rec : index.records) {
        s.proposals += rec.proposals.size();
        for (const auto& p : rec.proposals)
            (p.label > 0 ? s.positives : s.negatives) += 1;
    }
    return s;
}

namespace {

std::vector<RegionMask> load_imported_proposals(const std::filesystem::path& path,
                                                const std::string& id, std::size_t corpus_size) {
    if (std::filesystem::is_directory(path)) return read_rle_pack(path / (id + ".rlepack"));
    if (corpus_size == 1) return read_rle_pack(path);
    throw Error("--proposals must point to a directory of <id>.rlepack files for multi-image runs");
}

SaliencyMap load_imported_objectness(const std::filesystem::path& path, const std::string& id,
                                     std::size_t corpus_size) {
    if (std::filesystem::is_directory(path)) return read_map_sidecar(path / (id + ".f32"));
    if (corpus_size == 1) return read_map_sidecar(path);
    throw Error("--objectness must point to a directory of <id>.f32 files for multi-image runs");
}

}  // namespace

DetectSummary cmd_detect(const std::filesystem::path& manifest,
                         const std::filesystem::path& index_dir,
                         const std::filesystem::path& out_dir, const PipelineConfig& cfg,
                         const DetectOptions& options) {
    cfg.validate();
    const RetrievalIndex index = load_index(index_dir);
    if (index.descriptor_version != cfg.descriptor_version)
        throw Error("detect: index descriptor version '" + index.descriptor_version +
                    "' does not match configured '" + cfg.descriptor_version + "'");

    const auto entries = read_manifest(manifest);
    const std::filesystem::path root = manifest.parent_path();
    std::filesystem::create_directories(out_dir);
    if (!options.dump_internal.empty())
        std::filesystem::create_directories(options.dump_internal);
    if (!options.dump_model.empty()) std::filesystem::create_directories(options.dump_model);

    struct PerImage {
        bool ok = false;
        bool has_gt = false;
        std::string error;
        ImageScore internal_score, external_score, fused_score;
    };
    std::vector<PerImage> results(entries.size());

    parallel_for_images(entries.size(), resolve_jobs(cfg.jobs), [&](std::size_t i) {
        PerImage& r = results[i];
        const ManifestEntry& entry = entries[i];
        try {
            const LabeledImage li = load_entry(root, entry);
            std::vector<RegionMask> imported;
            const std::vector<RegionMask>* imported_ptr = nullptr;
            if (!options.proposals_path.empty()) {
                imported = load_imported_proposals(options.proposals_path, li.id, entries.size());
                imported_ptr = &imported;
            }
            SaliencyMap imported_obj;
            const SaliencyMap* imported_obj_ptr = nullptr;
            if (!options.objectness_path.empty()) {
                imported_obj = load_imported_objectness(options.objectness_path, li.id,
                                                        entries.size());
                imported_obj_ptr = &imported_obj;
            }

            const DetectionOutput det =
                detect_one(li, index, cfg, imported_ptr, imported_obj_ptr);

            auto emit = [&](const char* kind, const SaliencyMap& map) {
                write_map_png(out_dir / (li.id + "_" + kind + ".png"), map);
                write_map_sidecar(out_dir / (li.id + "_" + kind + ".f32"), map);
            };
            emit("internal", det.internal);
            emit("external", det.external);
            emit("fused", det.fused);

            if (!options.dump_internal.empty()) {
                for (std::size_t l = 0; l < det.layer_maps.size(); ++l) {
                    write_map_png(options.dump_internal /
                                      (li.id + "_layer" + std::to_string(l) + ".png"),
                                  det.layer_maps[l]);
                    write_png_gray16(options.dump_internal /
                                         (li.id + "_labels" + std::to_string(l) + ".png"),
                                     labels_as_gray16(det.layers[l]), det.layers[l].width,
                                     det.layers[l].height);
                }
                write_map_png(options.dump_internal / (li.id + "_internal.png"), det.internal);
                write_map_sidecar(options.dump_internal / (li.id + "_internal.f32"),
                                  det.internal);
            }
            if (!options.dump_model.empty() && det.model)
                dump_model(*det.model, options.dump_model / (li.id + ".model"));

            if (li.ground_truth) {
                r.has_gt = true;
                r.internal_score = score_image(li.id, det.internal, *li.ground_truth,
                                               cfg.upsilon_sq);
                r.external_score = score_image(li.id, det.external, *li.ground_truth,
                                               cfg.upsilon_sq);
                r.fused_score = score_image(li.id, det.fused, *li.ground_truth, cfg.upsilon_sq);
            }
            r.ok = true;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    });

    DetectSummary summary;
    std::vector<ImageScore> internal_rows, external_rows, fused_rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok) {
            summary.failed_ids.push_back(entries[i].id);
            summary.failure_reasons.push_back(results[i].error);
            continue;
        }
        ++summary.processed;
        if (results[i].has_gt) {
            internal_rows.push_back(results[i].internal_score);
            external_rows.push_back(results[i].external_score);
            fused_rows.push_back(results[i].fused_score);
        }
    }
    if (!fused_rows.empty()) {
        write_report_csv(out_dir / "report.csv", make_report(std::move(fused_rows)));
        write_report_csv(out_dir / "report_internal.csv", make_report(std::move(internal_rows)));
        write_report_csv(out_dir / "report_external.csv", make_report(std::move(external_rows)));
        summary.wrote_report = true;
    }
    return summary;
}

ScoreReport cmd_eval(const std::filesystem::path& maps_dir,
                     const std::filesystem::path& manifest,
                     const std::filesystem::path& out_csv, const std::string& suffix,
                     double upsilon_sq, const std::filesystem::path& curve_csv) {
    const auto entries = read_manifest(manifest);
    const std::filesystem::path root = manifest.parent_path();
    std::vector<ImageScore> rows;
    PRCurve mean_curve;
    std::size_t curve_count = 0;
    for (auto& pt : mean_curve.points) pt = {0.0, 0.0};
    for (const ManifestEntry& entry : entries) {
        if (entry.mask_path.empty()) continue;
        const BinaryMask gt = read_mask_file(root / entry.mask_path);
        const std::filesystem::path sidecar = maps_dir / (entry.id + "_" + suffix + ".f32");
        if (!std::filesystem::exists(sidecar))
            throw Error("eval: missing sidecar " + sidecar.string());
        const SaliencyMap map = read_map_sidecar(sidecar);
        rows.push_back(score_image(entry.id, map, gt, upsilon_sq));
        if (!curve_csv.empty()) {
            const PRCurve c = pr_curve(map, gt);
            for (int t = 0; t < 256; ++t) {
                mean_curve.points[t].precision += c.points[t].precision;
                mean_curve.points[t].recall += c.points[t].recall;
            }
            ++curve_count;
        }
    }
    const ScoreReport report = make_report(std::move(rows));
    write_report_csv(out_csv, report);
    if (!curve_csv.empty() && curve_count > 0) {
        for (auto& pt : mean_curve.points) {
            pt.precision /= static_cast<double>(curve_count);
            pt.recall /= static_cast<double>(curve_count);
        }
        write_curve_csv(curve_csv, mean_curve);
    }
    return report;
}

}  // namespace eis
