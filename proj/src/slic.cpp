#include "eis/slic.hpp"

#include <algorithm>
#include <cmath>

#include "eis/color.hpp"

namespace eis {

namespace {

constexpr int kIterations = 10;

struct Center {
    double l = 0, a = 0, b = 0, x = 0, y = 0;
};

// squared Lab gradient, used for seed perturbation
std::vector<double> lab_gradient(const ColorPlanes& p, int w, int h) {
    std::vector<double> g(static_cast<std::size_t>(w) * h, 0.0);
    auto lab = [&](int x, int y, int c) { return static_cast<double>(p.lab[c].at(x, y)); };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
            const int yu = std::max(0, y - 1), yd = std::min(h - 1, y + 1);
            double gx = 0, gy = 0;
            for (int c = 0; c < 3; ++c) {
                const double dx = lab(xr, y, c) - lab(xl, y, c);
                const double dy = lab(x, yd, c) - lab(x, yu, c);
                gx += dx * dx;
                gy += dy * dy;
            }
            g[static_cast<std::size_t>(y) * w + x] = gx + gy;
        }
    }
    return g;
}

}  // namespace

SuperpixelLayer segment_slic(const Rgb8Image& image, int target_count, double compactness) {
    const int w = image.width, h = image.height;
    validate_image_dims(w, h, "segment_slic");
    if (target_count < 1) throw Error("segment_slic: target_count must be positive");
    if (compactness <= 0) throw Error("segment_slic: compactness must be positive");
    const std::int64_t pixels = static_cast<std::int64_t>(w) * h;
    if (target_count > pixels / 4)
        throw Error("segment_slic: target_count " + std::to_string(target_count) +
                    " too large for " + std::to_string(w) + "x" + std::to_string(h));

    const ColorPlanes planes = make_color_planes(image);
    const double step = std::sqrt(static_cast<double>(pixels) / target_count);
    const int nx = std::max(1, static_cast<int>(std::lround(w / step)));
    const int ny = std::max(1, static_cast<int>(std::lround(h / step)));

    // grid seeds, nudged to the lowest-gradient pixel in a 3x3 window
    const std::vector<double> grad = lab_gradient(planes, w, h);
    std::vector<Center> centers;
    centers.reserve(static_cast<std::size_t>(nx) * ny);
    for (int gy = 0; gy < ny; ++gy) {
        for (int gx = 0; gx < nx; ++gx) {
            int cx = std::min(w - 1, static_cast<int>((gx + 0.5) * w / nx));
            int cy = std::min(h - 1, static_cast<int>((gy + 0.5) * h / ny));
            int bx = cx, by = cy;
            double best = grad[static_cast<std::size_t>(cy) * w + cx];
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = cx + dx, y = cy + dy;
                    if (x < 0 || y < 0 || x >= w || y >= h) continue;
                    const double g = grad[static_cast<std::size_t>(y) * w + x];
                    if (g < best) {
                        best = g;
                        bx = x;
                        by = y;
                    }
                }
            }
            Center c;
            c.x = bx;
            c.y = by;
            c.l = planes.lab[0].at(bx, by);
            c.a = planes.lab[1].at(bx, by);
            c.b = planes.lab[2].at(bx, by);
            centers.push_back(c);
        }
    }

    const int k = static_cast<int>(centers.size());
    const double spacing = std::sqrt(static_cast<double>(pixels) / k);
    const double xy_weight = (compactness / spacing) * (compactness / spacing);

    std::vector<std::int32_t> labels(static_cast<std::size_t>(pixels), -1);
    std::vector<double> dist(static_cast<std::size_t>(pixels));

    for (int iter = 0; iter < kIterations; ++iter) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        for (int ci = 0; ci < k; ++ci) {
            const Center& c = centers[ci];
            const int x0 = std::max(0, static_cast<int>(c.x - 2 * spacing));
            const int x1 = std::min(w - 1, static_cast<int>(c.x + 2 * spacing));
            const int y0 = std::max(0, static_cast<int>(c.y - 2 * spacing));
            const int y1 = std::min(h - 1, static_cast<int>(c.y + 2 * spacing));
            for (int y = y0; y <= y1; ++y) {
                const std::size_t row = static_cast<std::size_t>(y) * w;
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t i = row + x;
                    const double dl = planes.lab[0].data[i] - c.l;
                    const double da = planes.lab[1].data[i] - c.a;
                    const double db = planes.lab[2].data[i] - c.b;
                    const double dx = x - c.x;
                    const double dy = y - c.y;
                    const double d = dl * dl + da * da + db * db + xy_weight * (dx * dx + dy * dy);
                    if (d < dist[i]) {
                        dist[i] = d;
                        labels[i] = ci;
                    }
                }
            }
        }
        // recompute centers; empty clusters keep their previous position
        std::vector<Center> acc(k);
        std::vector<std::uint32_t> cnt(k, 0);
        std::size_t i = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x, ++i) {
                const std::int32_t l = labels[i];
                if (l < 0) continue;
                acc[l].l += planes.lab[0].data[i];
                acc[l].a += planes.lab[1].data[i];
                acc[l].b += planes.lab[2].data[i];
                acc[l].x += x;
                acc[l].y += y;
                ++cnt[l];
            }
        }
        for (int ci = 0; ci < k; ++ci) {
            if (cnt[ci] == 0) continue;
            centers[ci].l = acc[ci].l / cnt[ci];
            centers[ci].a = acc[ci].a / cnt[ci];
            centers[ci].b = acc[ci].b / cnt[ci];
            centers[ci].x = acc[ci].x / cnt[ci];
            centers[ci].y = acc[ci].y / cnt[ci];
        }
    }

    // pixels never reached by any search window (possible on extreme aspect
    // ratios): adopt the nearest assigned neighbor in scan order
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (labels[i] >= 0) continue;
            if (x > 0 && labels[i - 1] >= 0)
                labels[i] = labels[i - 1];
            else if (y > 0 && labels[i - w] >= 0)
                labels[i] = labels[i - w];
            else
                labels[i] = 0;
        }
    }

    // connected components of the raw clustering
    std::vector<std::int32_t> comp(static_cast<std::size_t>(pixels), -1);
    std::vector<std::uint32_t> comp_area;
    std::vector<std::int32_t> comp_label;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < labels.size(); ++seed) {
        if (comp[seed] >= 0) continue;
        const std::int32_t cid = static_cast<std::int32_t>(comp_area.size());
        const std::int32_t lab = labels[seed];
        comp_area.push_back(0);
        comp_label.push_back(lab);
        stack.assign(1, seed);
        comp[seed] = cid;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++comp_area[cid];
            const int x = static_cast<int>(p % w);
            const int y = static_cast<int>(p / w);
            const int dx[4] = {1, -1, 0, 0};
            const int dy[4] = {0, 0, 1, -1};
            for (int t = 0; t < 4; ++t) {
                const int nxp = x + dx[t], nyp = y + dy[t];
                if (nxp < 0 || nyp < 0 || nxp >= w || nyp >= h) continue;
                const std::size_t q = static_cast<std::size_t>(nyp) * w + nxp;
                if (comp[q] < 0 && labels[q] == lab) {
                    comp[q] = cid;
                    stack.push_back(q);
                }
            }
        }
    }

    // the largest component of each label is canonical; everything else is a
    // fragment to be absorbed
    const int ncomp = static_cast<int>(comp_area.size());
    std::vector<std::int32_t> canonical(k, -1);
    for (int c = 0; c < ncomp; ++c) {
        const std::int32_t lab = comp_label[c];
        if (canonical[lab] < 0 || comp_area[c] > comp_area[canonical[lab]]) canonical[lab] = c;
    }
    // target component each component currently belongs to (union toward canon)
    std::vector<std::int32_t> remap(ncomp);
    std::vector<std::uint8_t> is_canon(ncomp, 0);
    for (int c = 0; c < ncomp; ++c) remap[c] = c;
    for (int lab = 0; lab < k; ++lab)
        if (canonical[lab] >= 0) is_canon[canonical[lab]] = 1;

    auto find_root = [&remap](std::int32_t c) {
        while (remap[c] != c) {
            remap[c] = remap[remap[c]];
            c = remap[c];
        }
        return c;
    };

    // pixel lists for fragments only (fragments are small)
    std::vector<std::vector<std::uint32_t>> frag_pixels(ncomp);
    for (std::size_t p = 0; p < comp.size(); ++p) {
        if (!is_canon[comp[p]]) frag_pixels[comp[p]].push_back(static_cast<std::uint32_t>(p));
    }

    std::vector<std::uint64_t> merged_area(comp_area.begin(), comp_area.end());
    bool progress = true;
    while (progress) {
        progress = false;
        for (int c = 0; c < ncomp; ++c) {
            if (is_canon[c] || find_root(c) != c) continue;
            // scan this fragment's border for the largest adjacent canonical region
            std::int32_t best = -1;
            std::uint64_t best_area = 0;
            for (std::uint32_t pp : frag_pixels[c]) {
                const std::size_t p = pp;
                const int x = static_cast<int>(p % w);
                const int y = static_cast<int>(p / w);
                const int dx[4] = {1, -1, 0, 0};
                const int dy[4] = {0, 0, 1, -1};
                for (int t = 0; t < 4; ++t) {
                    const int nxp = x + dx[t], nyp = y + dy[t];
                    if (nxp < 0 || nyp < 0 || nxp >= w || nyp >= h) continue;
                    const std::int32_t nc = find_root(comp[static_cast<std::size_t>(nyp) * w + nxp]);
                    if (nc == c || !is_canon[nc]) continue;
                    if (merged_area[nc] > best_area ||
                        (merged_area[nc] == best_area && (best < 0 || nc < best))) {
                        best = nc;
                        best_area = merged_area[nc];
                    }
                }
            }
            if (best >= 0) {
                remap[c] = best;
                merged_area[best] += merged_area[c];
                // absorbed pixels now sit on the canonical region's rim
                progress = true;
            }
        }
    }

    // compact relabel in scan order of first occurrence
    std::vector<std::int32_t> final_label(ncomp, -1);
    std::int32_t next = 0;
    SuperpixelLayer layer;
    layer.labels.resize(static_cast<std::size_t>(pixels));
    for (std::size_t p = 0; p < comp.size(); ++p) {
        const std::int32_t root = find_root(comp[p]);
        if (final_label[root] < 0) final_label[root] = next++;
        layer.labels[p] = final_label[root];
    }
    layer.width = w;
    layer.height = h;
    layer.count = next;
    layer.target_count = target_count;
    layer.compactness = compactness;

    if (layer.count * 2 < target_count || layer.count > 2 * target_count)
        throw Error("segment_slic: superpixel count " + std::to_string(layer.count) +
                    " outside [0.5,2]x target " + std::to_string(target_count));
    return layer;
}

std::vector<SuperpixelLayer> build_layers(const Rgb8Image& image,
                                          const std::vector<int>& target_counts,
                                          double compactness) {
    std::vector<SuperpixelLayer> layers;
    layers.reserve(target_counts.size());
    for (std::size_t i = 0; i < target_counts.size(); ++i) {
        SuperpixelLayer l = segment_slic(image, target_counts[i], compactness);
        l.layer_index = static_cast<int>(i);
        layers.push_back(std::move(l));
    }
    return layers;
}

std::vector<SuperpixelLayer> build_layers(const Rgb8Image& image) {
    return build_layers(image, {50, 100, 150, 200, 300, 400}, 10.0);
}

std::vector<std::uint32_t> superpixel_areas(const SuperpixelLayer& layer) {
    std::vector<std::uint32_t> areas(layer.count, 0);
    for (std::int32_t l : layer.labels) ++areas[l];
    return areas;
}

std::vector<std::uint16_t> labels_as_gray16(const SuperpixelLayer& layer) {
    std::vector<std::uint16_t> out(layer.labels.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint16_t>(layer.labels[i]);
    return out;
}

}  // namespace eis
