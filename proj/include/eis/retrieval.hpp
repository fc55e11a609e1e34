#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "eis/features.hpp"
#include "eis/raster.hpp"
#include "eis/rle.hpp"

namespace eis {

struct ProposalAnnotation {
    RegionMask mask;
    RegionFeatures features;
    int label = 0;  // +1 salient, -1 background
};

struct AnnotationRecord {
    std::string image_id;
    ImageDescriptor descriptor;
    std::vector<ProposalAnnotation> proposals;
};

struct LabelBand {
    double iou_positive = 0.5;  // >= -> +1
    double iou_negative = 0.2;  // <= -> -1, in between dropped
};

// +1 / -1 / 0 (dropped) from the best IoU against any ground-truth box
int label_from_boxes(const RegionMask& proposal, const std::vector<BoundingBox>& boxes,
                     const LabelBand& band);

class RetrievalIndex {
public:
    std::string descriptor_version;
    std::vector<AnnotationRecord> records;

    // indices of the k nearest records by squared Euclidean descriptor
    // distance, ascending; ties broken by image_id
    std::vector<std::size_t> query(const ImageDescriptor& q, int k) const;

    std::size_t size() const { return records.size(); }
};

using ProposalSource = std::function<std::vector<RegionMask>(const LabeledImage&)>;

RetrievalIndex build_index(const std::vector<LabeledImage>& database,
                           const ProposalSource& proposal_source, const LabelBand& band,
                           int jobs = 1);

void save_index(const RetrievalIndex& index, const std::filesystem::path& dir);
RetrievalIndex load_index(const std::filesystem::path& dir);

}  // namespace eis
