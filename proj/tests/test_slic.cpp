#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "eis/slic.hpp"

using namespace eis;

namespace {

Rgb8Image solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Rgb8Image img(w, h);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        img.data[p * 3] = r;
        img.data[p * 3 + 1] = g;
        img.data[p * 3 + 2] = b;
    }
    return img;
}

// partitions equal up to a label bijection?
bool same_partition(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
    if (a.size() != b.size()) return false;
    std::map<std::int32_t, std::int32_t> fwd, bwd;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto f = fwd.find(a[i]);
        if (f == fwd.end()) {
            if (bwd.count(b[i])) return false;
            fwd[a[i]] = b[i];
            bwd[b[i]] = a[i];
        } else if (f->second != b[i]) {
            return false;
        }
    }
    return true;
}

// seeded k-means on (x,y) alone; oracle for uniform-color input where the
// color term vanishes
std::vector<std::int32_t> kmeans_xy(int w, int h, int nx, int ny, int iterations) {
    struct C {
        double x, y;
    };
    std::vector<C> centers;
    for (int gy = 0; gy < ny; ++gy)
        for (int gx = 0; gx < nx; ++gx)
            centers.push_back({std::min<double>(w - 1, static_cast<int>((gx + 0.5) * w / nx)),
                               std::min<double>(h - 1, static_cast<int>((gy + 0.5) * h / ny))});
    std::vector<std::int32_t> labels(static_cast<std::size_t>(w) * h, 0);
    for (int it = 0; it < iterations; ++it) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double best = 1e300;
                std::int32_t bi = 0;
                for (std::size_t c = 0; c < centers.size(); ++c) {
                    const double dx = x - centers[c].x, dy = y - centers[c].y;
                    const double d = dx * dx + dy * dy;
                    if (d < best) {
                        best = d;
                        bi = static_cast<std::int32_t>(c);
                    }
                }
                labels[static_cast<std::size_t>(y) * w + x] = bi;
            }
        std::vector<double> sx(centers.size(), 0), sy(centers.size(), 0), cnt(centers.size(), 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const auto l = labels[static_cast<std::size_t>(y) * w + x];
                sx[l] += x;
                sy[l] += y;
                cnt[l] += 1;
            }
        for (std::size_t c = 0; c < centers.size(); ++c)
            if (cnt[c] > 0) centers[c] = {sx[c] / cnt[c], sy[c] / cnt[c]};
    }
    return labels;
}

}  // namespace

TEST_CASE("uniform image: SLIC equals seeded k-means on coordinates") {
    const Rgb8Image img = solid(64, 64, 120, 120, 120);
    const SuperpixelLayer layer = segment_slic(img, 16, 10.0);
    CHECK(layer.count == 16);
    const auto oracle = kmeans_xy(64, 64, 4, 4, 10);
    CHECK(same_partition(layer.labels, oracle));
    // near-square superpixels of ~256 px (tie-breaking shifts cells a little)
    for (std::uint32_t a : superpixel_areas(layer)) {
        CHECK(a >= 15 * 15);
        CHECK(a <= 17 * 17);
    }
}

TEST_CASE("checkerboard blocks are recovered exactly") {
    // 2x2 blocks of 32x32 solid color
    Rgb8Image img(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            const bool white = ((x / 32) + (y / 32)) % 2 == 0;
            const std::uint8_t v = white ? 255 : 0;
            img.at(x, y, 0) = img.at(x, y, 1) = img.at(x, y, 2) = v;
        }
    const SuperpixelLayer layer = segment_slic(img, 4, 10.0);
    REQUIRE(layer.count == 4);
    // oracle: connected components of the color image = the 4 blocks
    std::vector<std::int32_t> blocks(64 * 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) blocks[y * 64 + x] = (y / 32) * 2 + (x / 32);
    CHECK(same_partition(layer.labels, blocks));
}

TEST_CASE("oversized target count is rejected") {
    const Rgb8Image img = solid(32, 32, 10, 10, 10);
    CHECK_THROWS_AS(segment_slic(img, 32 * 32, 10.0), Error);
}

TEST_CASE("build_layers produces six bounded, deterministic layers") {
    Rgb8Image img(96, 80);
    std::uint32_t state = 12345;
    for (auto& v : img.data) {
        state = state * 1664525u + 1013904223u;
        v = static_cast<std::uint8_t>(state >> 24);
    }
    const auto layers = build_layers(img);
    REQUIRE(layers.size() == 6);
    const int targets[6] = {50, 100, 150, 200, 300, 400};
    for (int i = 0; i < 6; ++i) {
        CHECK(layers[i].layer_index == i);
        CHECK(layers[i].count * 2 >= targets[i]);
        CHECK(layers[i].count <= 2 * targets[i]);
    }
    const auto again = build_layers(img);
    for (int i = 0; i < 6; ++i) CHECK(again[i].labels == layers[i].labels);  // bitwise
}

TEST_CASE("too-small image fails on the fine layer") {
    const Rgb8Image img = solid(16, 16, 50, 60, 70);
    CHECK_THROWS_AS(build_layers(img), Error);  // target 400 > 16*16/4
}

TEST_CASE("256x256 image: all layer counts within the global bounds") {
    Rgb8Image img(256, 256);
    std::uint32_t state = 424242;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        state = state * 1664525u + 1013904223u;
        const std::uint8_t base = (p / 256 / 32 + p % 256 / 32) % 2 ? 180 : 70;
        img.data[p * 3] = base;
        img.data[p * 3 + 1] = static_cast<std::uint8_t>(base + (state >> 27));
        img.data[p * 3 + 2] = static_cast<std::uint8_t>(255 - base);
    }
    const auto layers = build_layers(img);
    REQUIRE(layers.size() == 6);
    for (const auto& l : layers) {
        CHECK(l.count >= 25);
        CHECK(l.count <= 800);
    }
}

TEST_CASE("partition, label coverage and connectivity invariants") {
    Rgb8Image img(70, 54);
    std::uint32_t state = 999;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        state = state * 1664525u + 1013904223u;
        const std::uint8_t v = (p % 70) < 35 ? 200 : 60;
        img.data[p * 3] = v;
        img.data[p * 3 + 1] = static_cast<std::uint8_t>(v + (state >> 28));
        img.data[p * 3 + 2] = static_cast<std::uint8_t>(255 - v);
    }
    const SuperpixelLayer layer = segment_slic(img, 40, 10.0);

    const auto areas = superpixel_areas(layer);
    std::uint64_t total = 0;
    for (std::uint32_t a : areas) {
        CHECK(a > 0);  // every label used
        total += a;
    }
    CHECK(total == img.pixel_count());  // partition

    // connectivity: flood fill from the first pixel of each label covers it
    std::vector<std::uint8_t> seen(layer.labels.size(), 0);
    const int w = layer.width, h = layer.height;
    for (int lab = 0; lab < layer.count; ++lab) {
        std::size_t start = 0;
        while (layer.labels[start] != lab) ++start;
        std::vector<std::size_t> stack{start};
        seen[start] = 1;
        std::uint32_t visited = 0;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++visited;
            const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
            const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
            for (int t = 0; t < 4; ++t) {
                const int nx = x + dx[t], ny = y + dy[t];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
                if (!seen[q] && layer.labels[q] == lab) {
                    seen[q] = 1;
                    stack.push_back(q);
                }
            }
        }
        CHECK(visited == areas[lab]);
    }
}
