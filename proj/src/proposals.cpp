#include "eis/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eis/color.hpp"

namespace eis {

namespace {

struct MergeRegion {
    double lab[3] = {};     // area-weighted mean
    double area = 0;
    std::set<std::int32_t> neighbors;
    std::vector<std::int32_t> members;  // superpixel labels
    bool alive = false;
    double created_at = -1.0;   // merge distance that created the region
    double consumed_at = -1.0;  // merge distance that absorbed it (-1 = never)
};

double lab_distance(const MergeRegion& a, const MergeRegion& b) {
    const double dl = a.lab[0] - b.lab[0];
    const double da = a.lab[1] - b.lab[1];
    const double db = a.lab[2] - b.lab[2];
    return std::sqrt(dl * dl + da * da + db * db);
}

// ordered edge key: (distance, lo id, hi id)
struct Edge {
    double dist;
    std::int32_t a, b;
    bool operator<(const Edge& o) const {
        if (dist != o.dist) return dist < o.dist;
        if (a != o.a) return a < o.a;
        return b < o.b;
    }
};

RegionMask materialize(const SuperpixelLayer& layer, const std::vector<std::int32_t>& members) {
    std::vector<char> in(layer.count, 0);
    for (std::int32_t m : members) in[m] = 1;
    return RegionMask::from_labels(layer.labels, layer.width, layer.height,
                                   [&in](std::int32_t l) { return in[l] != 0; });
}

}  // namespace

std::vector<RegionMask> generate_proposals(const Rgb8Image& image,
                                           const std::vector<SuperpixelLayer>& layers,
                                           const ProposalParams& params) {
    if (layers.empty()) throw Error("generate_proposals: need at least one layer");
    const ColorPlanes planes = make_color_planes(image);

    std::vector<RegionMask> accepted;
    auto try_accept = [&](RegionMask&& mask) {
        for (const RegionMask& prev : accepted) {
            // cheap filters before the exact IoU
            const double amin = static_cast<double>(std::min(prev.area, mask.area));
            const double amax = static_cast<double>(std::max(prev.area, mask.area));
            if (amin / amax < params.dedup_iou) continue;
            if (prev.x_min > mask.x_max || mask.x_min > prev.x_max ||
                prev.y_min > mask.y_max || mask.y_min > prev.y_max)
                continue;
            if (iou(prev, mask) >= params.dedup_iou) return;
        }
        accepted.push_back(std::move(mask));
    };

    for (const SuperpixelLayer& layer : layers) {
        if (layer.width != image.width || layer.height != image.height)
            throw Error("generate_proposals: layer does not belong to image");
        const int n = layer.count;
        std::vector<MergeRegion> regions(n);
        for (int i = 0; i < n; ++i) {
            regions[i].alive = true;
            regions[i].members = {static_cast<std::int32_t>(i)};
        }
        const std::size_t total = layer.labels.size();
        const int w = layer.width;
        for (std::size_t p = 0; p < total; ++p) {
            const std::int32_t l = layer.labels[p];
            MergeRegion& r = regions[l];
            r.lab[0] += planes.lab[0].data[p];
            r.lab[1] += planes.lab[1].data[p];
            r.lab[2] += planes.lab[2].data[p];
            r.area += 1;
            const int x = static_cast<int>(p % w);
            if (x + 1 < w) {
                const std::int32_t right = layer.labels[p + 1];
                if (right != l) {
                    r.neighbors.insert(right);
                    regions[right].neighbors.insert(l);
                }
            }
            if (p + w < total) {
                const std::int32_t down = layer.labels[p + w];
                if (down != l) {
                    r.neighbors.insert(down);
                    regions[down].neighbors.insert(l);
                }
            }
        }
        for (auto& r : regions)
            for (double& c : r.lab) c /= r.area;

        // every initial superpixel is a proposal
        for (int i = 0; i < n; ++i) try_accept(materialize(layer, regions[i].members));

        std::set<Edge> edges;
        for (int i = 0; i < n; ++i)
            for (std::int32_t j : regions[i].neighbors)
                if (j > i) edges.insert({lab_distance(regions[i], regions[j]), i, j});

        while (!edges.empty()) {
            const Edge e = *edges.begin();
            if (e.dist > params.merge_cutoff) break;
            edges.erase(edges.begin());
            MergeRegion& ra = regions[e.a];
            MergeRegion& rb = regions[e.b];

            const std::int32_t id = static_cast<std::int32_t>(regions.size());
            MergeRegion merged;
            merged.alive = true;
            merged.created_at = e.dist;
            merged.area = ra.area + rb.area;
            for (int c = 0; c < 3; ++c)
                merged.lab[c] = (ra.lab[c] * ra.area + rb.lab[c] * rb.area) / merged.area;
            merged.members = ra.members;
            merged.members.insert(merged.members.end(), rb.members.begin(), rb.members.end());

            ra.alive = false;
            rb.alive = false;
            ra.consumed_at = e.dist;
            rb.consumed_at = e.dist;

            // rewire neighbors and edges
            for (std::int32_t old : {e.a, e.b}) {
                for (std::int32_t nb : regions[old].neighbors) {
                    if (nb == e.a || nb == e.b) continue;
                    edges.erase({lab_distance(regions[old], regions[nb]), std::min(old, nb),
                                 std::max(old, nb)});
                    if (regions[nb].alive) {
                        regions[nb].neighbors.erase(old);
                        merged.neighbors.insert(nb);
                    }
                }
            }
            regions.push_back(std::move(merged));
            MergeRegion& rm = regions[id];
            for (std::int32_t nb : rm.neighbors) {
                regions[nb].neighbors.insert(id);
                edges.insert({lab_distance(rm, regions[nb]), std::min(id, nb), std::max(id, nb)});
            }
        }

        // emit merged regions that existed over a nonzero threshold interval
        for (std::size_t i = n; i < regions.size(); ++i) {
            const MergeRegion& r = regions[i];
            const bool transient = !r.alive && r.consumed_at - r.created_at <= 1e-9;
            if (transient) continue;
            try_accept(materialize(layer, r.members));
        }
    }
    return accepted;
}

CenterPriorMap center_prior(int width, int height, double sigma_x, double sigma_y) {
    if (sigma_x <= 0 || sigma_y <= 0) throw Error("center_prior: sigma must be positive");
    CenterPriorMap m;
    m.sigma_x = sigma_x;
    m.sigma_y = sigma_y;
    m.grid = GrayF32Image(width, height);
    const int xc = width / 2;
    const int yc = height / 2;
    for (int y = 0; y < height; ++y) {
        const double dy = (y - yc) * (y - yc) / (2.0 * sigma_y * sigma_y);
        for (int x = 0; x < width; ++x) {
            const double dx = (x - xc) * (x - xc) / (2.0 * sigma_x * sigma_x);
            m.grid.at(x, y) = static_cast<float>(std::exp(-dx - dy));
        }
    }
    return m;
}

SaliencyMap psi_map(const SaliencyMap& internal, const SaliencyMap& objectness,
                    const CenterPriorMap& prior) {
    if (internal.width() != objectness.width() || internal.height() != objectness.height() ||
        internal.width() != prior.grid.width || internal.height() != prior.grid.height)
        throw Error("psi_map: dimension mismatch");
    GrayF32Image g(internal.width(), internal.height());
    for (std::size_t p = 0; p < g.data.size(); ++p)
        g.data[p] = internal.grid.data[p] * objectness.grid.data[p] * prior.grid.data[p];
    return normalize_map(SaliencyMap(std::move(g), false));
}

namespace {

std::vector<RegionProposal> take_top(const std::vector<RegionMask>& proposals,
                                     std::vector<double>& score, int n) {
    std::vector<std::size_t> order(proposals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        if (proposals[a].area != proposals[b].area) return proposals[a].area < proposals[b].area;
        return proposals[a].hash() < proposals[b].hash();
    });
    std::vector<RegionProposal> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        RegionProposal rp;
        rp.mask = proposals[order[i]];
        rp.confidence = score[order[i]];
        out.push_back(std::move(rp));
    }
    return out;
}

}  // namespace

std::vector<RegionProposal> select_regions(const std::vector<RegionMask>& proposals,
                                           const SaliencyMap& psi, int n, double tau) {
    if (tau <= 0) throw Error("select_regions: tau must be positive");
    if (n <= 0 || static_cast<std::size_t>(n) > proposals.size())
        throw Error("select_regions: need at least " + std::to_string(n) + " proposals, have " +
                    std::to_string(proposals.size()));
    double psi_sum = 0;
    for (float v : psi.grid.data) psi_sum += v;
    if (psi_sum <= 0) throw Error("select_regions: degenerate psi map (sum = 0)");

    std::vector<double> eta(proposals.size());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const RegionMask& r = proposals[i];
        if (r.width != psi.width() || r.height != psi.height())
            throw Error("select_regions: proposal dimension mismatch");
        double overlap = 0;
        r.for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
            for (std::uint64_t p = start; p < start + len; ++p) overlap += psi.grid.data[p];
        });
        eta[i] = (1.0 + tau) * overlap / (tau * psi_sum + static_cast<double>(r.area));
    }
    return take_top(proposals, eta, n);
}

std::vector<RegionProposal> select_regions_by_center_prior(
    const std::vector<RegionMask>& proposals, const CenterPriorMap& prior, int n) {
    if (n <= 0 || static_cast<std::size_t>(n) > proposals.size())
        throw Error("select_regions_by_center_prior: not enough proposals");
    std::vector<double> score(proposals.size());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        double s = 0;
        proposals[i].for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
            for (std::uint64_t p = start; p < start + len; ++p) s += prior.grid.data[p];
        });
        score[i] = s / static_cast<double>(proposals[i].area);
    }
    return take_top(proposals, score, n);
}

}  // namespace eis
