#include "eis/retrieval.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "eis/matrix_io.hpp"

namespace eis {

int label_from_boxes(const RegionMask& proposal, const std::vector<BoundingBox>& boxes,
                     const LabelBand& band) {
    double best = 0.0;
    for (const BoundingBox& b : boxes) best = std::max(best, iou(proposal, b));
    if (best >= band.iou_positive) return 1;
    if (best <= band.iou_negative) return -1;
    return 0;
}

std::vector<std::size_t> RetrievalIndex::query(const ImageDescriptor& q, int k) const {
    if (records.empty()) throw Error("query: empty index");
    if (k <= 0 || static_cast<std::size_t>(k) > records.size())
        throw Error("query: k = " + std::to_string(k) + " outside [1, " +
                    std::to_string(records.size()) + "]");
    if (q.descriptor_version != descriptor_version)
        throw Error("query: descriptor version mismatch (" + q.descriptor_version + " vs " +
                    descriptor_version + ")");

    std::vector<std::pair<double, std::size_t>> dist(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        dist[i] = {descriptor_sq_distance(q, records[i].descriptor), i};
    auto cmp = [this](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return records[a.second].image_id < records[b.second].image_id;
    };
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end(), cmp);
    std::vector<std::size_t> out(k);
    for (int i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

RetrievalIndex build_index(const std::vector<LabeledImage>& database,
                           const ProposalSource& proposal_source, const LabelBand& band,
                           int jobs) {
    RetrievalIndex index;
    index.descriptor_version = kDescriptorVersion;
    index.records.resize(database.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_text;
    std::mutex error_mutex;
    const FilterBank bank = make_default_filter_bank();

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= database.size() || failed.load()) break;
            try {
                const LabeledImage& li = database[i];
                if (li.boxes.empty())
                    throw Error("build_index: image '" + li.id + "' has no bounding boxes");
                AnnotationRecord rec;
                rec.image_id = li.id;
                rec.descriptor = image_descriptor(li.image);
                const std::vector<RegionMask> proposals = proposal_source(li);
                const ImageContext ctx = make_image_context(li.image, bank);
                const RegionMask border = border_region(li.image.width, li.image.height);
                for (const RegionMask& p : proposals) {
                    const int label = label_from_boxes(p, li.boxes, band);
                    if (label == 0) continue;
                    ProposalAnnotation ann;
                    ann.features = region_features(ctx, p, border);
                    ann.mask = p;
                    ann.label = label;
                    rec.proposals.push_back(std::move(ann));
                }
                if (rec.proposals.empty())
                    throw Error("build_index: image '" + li.id +
                                "' produced no labeled proposals");
                index.records[i] = std::move(rec);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error_text = e.what();
            }
        }
    };

    const int threads = std::max(1, jobs);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw Error(error_text);
    return index;
}

namespace {

Eigen::MatrixXf features_matrix(const AnnotationRecord& rec) {
    Eigen::MatrixXf m(rec.proposals.size(), kRegionFeatureDim);
    for (std::size_t p = 0; p < rec.proposals.size(); ++p)
        m.row(p) = rec.proposals[p].features.transpose();
    return m;
}

}  // namespace

void save_index(const RetrievalIndex& index, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "records");
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["descriptor_version"] = index.descriptor_version;
    nlohmann::json records = nlohmann::json::array();
    for (const AnnotationRecord& rec : index.records) {
        nlohmann::json jr;
        jr["id"] = rec.image_id;
        nlohmann::json labels = nlohmann::json::array();
        for (const auto& p : rec.proposals) labels.push_back(p.label);
        jr["labels"] = labels;
        records.push_back(jr);

        Eigen::MatrixXf desc(1, rec.descriptor.vector.size());
        desc.row(0) = rec.descriptor.vector.transpose();
        write_sfv1(dir / "records" / (rec.image_id + ".desc"), desc);
        write_sfv1(dir / "records" / (rec.image_id + ".feat"), features_matrix(rec));
        std::vector<RegionMask> masks;
        masks.reserve(rec.proposals.size());
        for (const auto& p : rec.proposals) masks.push_back(p.mask);
        write_rle_pack(dir / "records" / (rec.image_id + ".masks"), masks);
    }
    manifest["records"] = records;
    std::ofstream out(dir / "index.manifest");
    if (!out) throw Error("cannot write index manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
}

RetrievalIndex load_index(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.manifest");
    if (!in) throw Error("cannot open index manifest in " + dir.string());
    nlohmann::json manifest;
    in >> manifest;

    RetrievalIndex index;
    index.descriptor_version = manifest.at("descriptor_version").get<std::string>();
    for (const auto& jr : manifest.at("records")) {
        AnnotationRecord rec;
        rec.image_id = jr.at("id").get<std::string>();
        const Eigen::MatrixXf desc = read_sfv1(dir / "records" / (rec.image_id + ".desc"));
        if (desc.rows() != 1) throw Error("bad descriptor file for " + rec.image_id);
        rec.descriptor.vector = desc.row(0).transpose();
        rec.descriptor.descriptor_version = index.descriptor_version;

        const Eigen::MatrixXf feats = read_sfv1(dir / "records" / (rec.image_id + ".feat"));
        std::vector<RegionMask> masks = read_rle_pack(dir / "records" / (rec.image_id + ".masks"));
        const auto& labels = jr.at("labels");
        if (static_cast<std::size_t>(feats.rows()) != masks.size() ||
            labels.size() != masks.size() || feats.cols() != kRegionFeatureDim)
            throw Error("inconsistent record files for " + rec.image_id);
        rec.proposals.resize(masks.size());
        for (std::size_t p = 0; p < masks.size(); ++p) {
            rec.proposals[p].mask = std::move(masks[p]);
            rec.proposals[p].features = feats.row(p).transpose();
            rec.proposals[p].label = labels[p].get<int>();
            if (rec.proposals[p].label != 1 && rec.proposals[p].label != -1)
                throw Error("bad label in record " + rec.image_id);
        }
        if (rec.proposals.empty()) throw Error("record " + rec.image_id + " has no proposals");
        index.records.push_back(std::move(rec));
    }
    return index;
}

}  // namespace eis
