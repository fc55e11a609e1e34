#include "eis/dataset.hpp"

#include <fstream>
#include <sstream>

#include "eis/image_io.hpp"

namespace eis {

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw Error("cannot open manifest " + manifest.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
            throw Error("manifest line " + std::to_string(lineno) + ": need <id>\\t<image-path>");
        ManifestEntry e;
        e.id = fields[0];
        e.image_path = fields[1];
        if (fields.size() > 2) e.mask_path = fields[2];
        if (fields.size() > 3) e.box_path = fields[3];
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<BoundingBox> read_box_file(const std::filesystem::path& path, int width, int height) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open box file " + path.string());
    std::vector<BoundingBox> boxes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        BoundingBox b;
        std::string extra;
        if (!(ss >> b.x_min >> b.y_min >> b.x_max >> b.y_max) || (ss >> extra))
            throw Error("malformed box line " + std::to_string(lineno) + " in " + path.string());
        validate_box(b, width, height, path.string() + ":" + std::to_string(lineno));
        boxes.push_back(b);
    }
    return boxes;
}

void write_box_file(const std::filesystem::path& path, const std::vector<BoundingBox>& boxes) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& b : boxes)
        out << b.x_min << " " << b.y_min << " " << b.x_max << " " << b.y_max << "\n";
}

BinaryMask read_mask_file(const std::filesystem::path& path) {
    Gray8Image g = read_image_gray8(path);
    for (auto& v : g.data) v = v >= 128 ? 1 : 0;
    return BinaryMask(std::move(g));
}

void write_mask_file(const std::filesystem::path& path, const BinaryMask& mask) {
    Gray8Image g(mask.width(), mask.height());
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = mask.grid.data[i] ? 255 : 0;
    write_png_gray8(path, g);
}

LabeledImage load_entry(const std::filesystem::path& root, const ManifestEntry& entry) {
    LabeledImage li;
    li.id = entry.id;
    li.image = read_image_rgb8(root / entry.image_path);
    validate_image_dims(li.image.width, li.image.height, entry.id);
    if (!entry.mask_path.empty()) {
        BinaryMask m = read_mask_file(root / entry.mask_path);
        if (!m.grid.same_size(li.image.width, li.image.height))
            throw Error(entry.id + ": mask " + std::to_string(m.width()) + "x" +
                        std::to_string(m.height()) + " does not match image " +
                        std::to_string(li.image.width) + "x" + std::to_string(li.image.height));
        li.ground_truth = std::move(m);
    }
    if (!entry.box_path.empty())
        li.boxes = read_box_file(root / entry.box_path, li.image.width, li.image.height);
    return li;
}

std::vector<LabeledImage> load_dataset(const std::filesystem::path& root,
                                       const std::filesystem::path& manifest) {
    const auto entries = read_manifest(manifest);
    std::vector<LabeledImage> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(load_entry(root, e));
    return out;
}

}  // namespace eis
