#include <doctest.h>

#include <fstream>

#include "eis/dataset.hpp"
#include "eis/image_io.hpp"
#include "eis/pipeline.hpp"
#include "eis/synthetic.hpp"

using namespace eis;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<char> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

// a small corpus + index shared by the pipeline tests
struct PipelineFixture {
    std::filesystem::path root;
    PipelineConfig cfg;

    PipelineFixture() {
        root = fresh_dir("eis_pipeline_fixture");
        SyntheticParams params;
        params.db_count = 6;
        params.test_count = 3;
        params.width = 96;
        params.height = 72;
        gen_synthetic(root, params);

        cfg.layer_targets = {30, 60, 100};  // keep the fixture fast
        cfg.internal.layer_weights = {1, 1, 1};
        cfg.jobs = 2;
        cmd_build_index(root / "db_manifest.tsv", root, root / "index", cfg);
    }
};

PipelineFixture& fixture() {
    static PipelineFixture f;
    return f;
}

}  // namespace

TEST_CASE("config file parsing with overrides and validation") {
    const auto dir = fresh_dir("eis_config_test");
    {
        std::ofstream out(dir / "run.conf");
        out << "# comment\n";
        out << "gamma = 0.25\n";
        out << "layer_targets = 40, 80\n";
        out << "sigma2 = 0.5\n";
        out << "clamp_negative_scores = false\n";
    }
    const PipelineConfig cfg = read_config(dir / "run.conf");
    CHECK(cfg.gamma == 0.25);
    CHECK(cfg.layer_targets == std::vector<int>{40, 80});
    CHECK(cfg.internal.sigma2 == 0.5);
    CHECK_FALSE(cfg.clamp_negative_scores);

    {
        std::ofstream out(dir / "bad.conf");
        out << "gamma = 1.5\n";
    }
    CHECK_THROWS_AS(read_config(dir / "bad.conf"), Error);
    {
        std::ofstream out(dir / "unknown.conf");
        out << "no_such_key = 1\n";
    }
    CHECK_THROWS_AS(read_config(dir / "unknown.conf"), Error);
}

TEST_CASE("build-index summary counts and byte-identical rebuild") {
    PipelineFixture& f = fixture();
    const BuildIndexSummary s =
        cmd_build_index(f.root / "db_manifest.tsv", f.root, f.root / "index2", f.cfg);
    CHECK(s.records == 6);
    CHECK(s.proposals == s.positives + s.negatives);
    CHECK(s.positives > 0);
    CHECK(s.negatives > 0);

    // rebuild matches the fixture's index byte for byte
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(f.root / "index")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), f.root / "index");
        CHECK(slurp(entry.path()) == slurp(f.root / "index2" / rel));
    }
}

TEST_CASE("build-index reports the image id when boxes are missing") {
    const auto dir = fresh_dir("eis_nobox_test");
    LabeledImage li = make_synthetic_image(5, 64, 48, false);
    write_png_rgb8(dir / "img.png", li.image);
    {
        std::ofstream m(dir / "manifest.tsv");
        m << "lonely\timg.png\n";
    }
    PipelineConfig cfg;
    cfg.layer_targets = {20};
    cfg.internal.layer_weights = {1};
    CHECK_THROWS_WITH_AS(cmd_build_index(dir / "manifest.tsv", dir, dir / "index", cfg),
                         doctest::Contains("lonely"), Error);
}

TEST_CASE("detect writes maps, sidecars and reports") {
    PipelineFixture& f = fixture();
    const auto out = fresh_dir("eis_detect_out");
    const DetectSummary s =
        cmd_detect(f.root / "test_manifest.tsv", f.root / "index", out, f.cfg);
    CHECK(s.processed == 3);
    CHECK(s.failed_ids.empty());
    CHECK(s.wrote_report);

    for (const char* id : {"test000", "test001", "test002"}) {
        for (const char* kind : {"internal", "external", "fused"}) {
            CHECK(std::filesystem::exists(out / (std::string(id) + "_" + kind + ".png")));
            CHECK(std::filesystem::exists(out / (std::string(id) + "_" + kind + ".f32")));
        }
    }
    CHECK(std::filesystem::exists(out / "report.csv"));
    CHECK(std::filesystem::exists(out / "report_internal.csv"));
    CHECK(std::filesystem::exists(out / "report_external.csv"));
}

TEST_CASE("gamma 0 makes fused maps bit-identical to internal maps") {
    PipelineFixture& f = fixture();
    const auto out = fresh_dir("eis_detect_gamma0");
    PipelineConfig cfg = f.cfg;
    cfg.gamma = 0.0;
    const DetectSummary s =
        cmd_detect(f.root / "test_manifest.tsv", f.root / "index", out, cfg);
    CHECK(s.processed == 3);
    for (const char* id : {"test000", "test001", "test002"}) {
        CHECK(slurp(out / (std::string(id) + "_fused.f32")) ==
              slurp(out / (std::string(id) + "_internal.f32")));
    }
}

TEST_CASE("detect runs are bit-identical across repeats and thread counts") {
    PipelineFixture& f = fixture();
    const auto out1 = fresh_dir("eis_detect_det1");
    const auto out2 = fresh_dir("eis_detect_det2");
    PipelineConfig serial = f.cfg;
    serial.jobs = 1;
    cmd_detect(f.root / "test_manifest.tsv", f.root / "index", out1, f.cfg);
    cmd_detect(f.root / "test_manifest.tsv", f.root / "index", out2, serial);
    for (const auto& entry : std::filesystem::directory_iterator(out1)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename();
        if (name.extension() != ".f32" && name.extension() != ".csv") continue;
        CHECK(slurp(entry.path()) == slurp(out2 / name));
    }
}

TEST_CASE("detect without ground truth writes maps but no reports") {
    PipelineFixture& f = fixture();
    const auto dir = fresh_dir("eis_nogt_test");
    std::filesystem::copy_file(f.root / "test" / "test000.png", dir / "img.png");
    {
        std::ofstream m(dir / "manifest.tsv");
        m << "img\timg.png\n";
    }
    const auto out = fresh_dir("eis_nogt_out");
    const DetectSummary s = cmd_detect(dir / "manifest.tsv", f.root / "index", out, f.cfg);
    CHECK(s.processed == 1);
    CHECK_FALSE(s.wrote_report);
    CHECK(std::filesystem::exists(out / "img_fused.png"));
    CHECK_FALSE(std::filesystem::exists(out / "report.csv"));
}

TEST_CASE("per-image failures are isolated") {
    PipelineFixture& f = fixture();
    const auto dir = fresh_dir("eis_partial_test");
    // copy one good image, add one that is too small for the layer targets
    std::filesystem::copy_file(f.root / "test" / "test000.png", dir / "good.png");
    LabeledImage tiny = make_synthetic_image(99, 16, 16, false);  // 16*16/4 < target 100
    write_png_rgb8(dir / "tiny.png", tiny.image);
    {
        std::ofstream m(dir / "manifest.tsv");
        m << "good\tgood.png\n";
        m << "tiny\ttiny.png\n";
    }
    const auto out = fresh_dir("eis_partial_out");
    const DetectSummary s = cmd_detect(dir / "manifest.tsv", f.root / "index", out, f.cfg);
    CHECK(s.processed == 1);
    REQUIRE(s.failed_ids.size() == 1);
    CHECK(s.failed_ids[0] == "tiny");
    CHECK(std::filesystem::exists(out / "good_fused.png"));
}

TEST_CASE("eval scores sidecars against ground truth") {
    PipelineFixture& f = fixture();
    const auto out = fresh_dir("eis_eval_maps");
    // perfect maps: copies of the ground truth
    const auto entries = read_manifest(f.root / "test_manifest.tsv");
    for (const auto& e : entries) {
        const BinaryMask gt = read_mask_file(f.root / e.mask_path);
        GrayF32Image g(gt.width(), gt.height());
        for (std::size_t p = 0; p < g.data.size(); ++p)
            g.data[p] = gt.grid.data[p] ? 1.0f : 0.0f;
        write_map_sidecar(out / (e.id + "_fused.f32"), SaliencyMap(std::move(g), true));
    }
    const ScoreReport r =
        cmd_eval(out, f.root / "test_manifest.tsv", out / "eval.csv", "fused", 0.3);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) CHECK(row.f_measure == doctest::Approx(1.0));

    // all-zero maps: recall 0 everywhere
    for (const auto& e : entries) {
        const BinaryMask gt = read_mask_file(f.root / e.mask_path);
        write_map_sidecar(out / (e.id + "_fused.f32"),
                          SaliencyMap(GrayF32Image(gt.width(), gt.height(), 0.0f), true));
    }
    const ScoreReport rz =
        cmd_eval(out, f.root / "test_manifest.tsv", out / "eval0.csv", "fused", 0.3);
    for (const auto& row : rz.rows) CHECK(row.recall == 0.0);

    // re-running produces an identical CSV
    cmd_eval(out, f.root / "test_manifest.tsv", out / "eval1.csv", "fused", 0.3);
    CHECK(slurp(out / "eval0.csv") == slurp(out / "eval1.csv"));

    // missing sidecar is an error
    std::filesystem::remove(out / (entries[0].id + "_fused.f32"));
    CHECK_THROWS_AS(cmd_eval(out, f.root / "test_manifest.tsv", out / "eval2.csv", "fused", 0.3),
                    Error);
}

TEST_CASE("proposal import path produces a complete run") {
    PipelineFixture& f = fixture();
    const auto entries = read_manifest(f.root / "test_manifest.tsv");
    const LabeledImage li = load_entry(f.root, entries[0]);

    // externally generated proposals: a grid of rectangles
    std::vector<RegionMask> imported;
    for (int by = 0; by + 24 <= li.image.height; by += 12) {
        for (int bx = 0; bx + 24 <= li.image.width; bx += 12) {
            Gray8Image g(li.image.width, li.image.height, 0);
            for (int y = by; y < by + 24; ++y)
                for (int x = bx; x < bx + 24; ++x) g.at(x, y) = 1;
            imported.push_back(RegionMask::from_mask(BinaryMask(std::move(g))));
        }
    }
    const auto dir = fresh_dir("eis_import_test");
    write_rle_pack(dir / (li.id + ".rlepack"), imported);

    PipelineConfig cfg = f.cfg;
    cfg.region_count = 20;
    const RetrievalIndex index = load_index(f.root / "index");
    const auto loaded = read_rle_pack(dir / (li.id + ".rlepack"));
    const DetectionOutput out = detect_one(li, index, cfg, &loaded);
    CHECK(out.fused.normalized);
    CHECK(static_cast<int>(out.regions.size()) == 20);
}

TEST_CASE("cmd_detect with imports and dump flags") {
    PipelineFixture& f = fixture();
    const auto entries = read_manifest(f.root / "test_manifest.tsv");

    // per-image proposal packs + objectness sidecars for the whole corpus
    const auto imports = fresh_dir("eis_import_corpus");
    for (const auto& e : entries) {
        const LabeledImage li = load_entry(f.root, e);
        std::vector<RegionMask> masks;
        for (int by = 0; by + 24 <= li.image.height; by += 12)
            for (int bx = 0; bx + 24 <= li.image.width; bx += 12) {
                Gray8Image g(li.image.width, li.image.height, 0);
                for (int y = by; y < by + 24; ++y)
                    for (int x = bx; x < bx + 24; ++x) g.at(x, y) = 1;
                masks.push_back(RegionMask::from_mask(BinaryMask(std::move(g))));
            }
        write_rle_pack(imports / (e.id + ".rlepack"), masks);

        GrayF32Image obj(li.image.width, li.image.height, 0.0f);
        for (int y = 10; y < li.image.height - 10; ++y)
            for (int x = 10; x < li.image.width - 10; ++x) obj.at(x, y) = 1.0f;
        write_map_sidecar(imports / (e.id + ".f32"), SaliencyMap(std::move(obj), false));
    }

    PipelineConfig cfg = f.cfg;
    cfg.region_count = 20;
    DetectOptions options;
    options.proposals_path = imports;
    options.objectness_path = imports;
    options.dump_internal = imports / "dump_internal";
    options.dump_model = imports / "dump_model";
    const auto out = fresh_dir("eis_import_out");
    const DetectSummary s =
        cmd_detect(f.root / "test_manifest.tsv", f.root / "index", out, cfg, options);
    CHECK(s.processed == 3);
    CHECK(s.wrote_report);
    CHECK(std::filesystem::exists(imports / "dump_internal" / "test000_layer0.png"));
    CHECK(std::filesystem::exists(imports / "dump_internal" / "test000_labels0.png"));
    CHECK(std::filesystem::exists(imports / "dump_internal" / "test000_internal.f32"));
    CHECK(std::filesystem::exists(imports / "dump_model" / "test000.model"));
}

TEST_CASE("degenerate inputs follow the documented fallbacks") {
    PipelineFixture& f = fixture();
    const RetrievalIndex index = load_index(f.root / "index");

    // uniform image: zero internal map, zero psi, fallback selection
    LabeledImage uniform;
    uniform.id = "uniform";
    uniform.image = Rgb8Image(96, 72);
    for (auto& v : uniform.image.data) v = 120;
    const DetectionOutput out = detect_one(uniform, index, f.cfg);
    CHECK(out.selection_fallback);
    for (float v : out.internal.grid.data) CHECK(v == 0.0f);
    CHECK(out.fused.normalized);

    // single-class index: gamma forced to 0, fused == internal
    RetrievalIndex positive_only = index;
    for (auto& rec : positive_only.records)
        for (auto& p : rec.proposals) p.label = 1;
    const auto entries = read_manifest(f.root / "test_manifest.tsv");
    const LabeledImage li = load_entry(f.root, entries[0]);
    const DetectionOutput single = detect_one(li, positive_only, f.cfg);
    CHECK(single.single_class_fallback);
    CHECK(single.gamma_used == 0.0);
    CHECK(single.fused.grid.data == single.internal.grid.data);
}
