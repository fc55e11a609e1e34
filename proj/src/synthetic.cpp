#include "eis/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "eis/dataset.hpp"
#include "eis/image_io.hpp"

namespace eis {

namespace {

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
    return lo + static_cast<int>(unit(rng) * (hi - lo + 1));
}

std::array<std::uint8_t, 3> hsv_to_rgb8(double h, double s, double v) {
    h = h - std::floor(h);  // wrap to [0,1)
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    const double m = v - c;
    auto q = [&](double t) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * (t + m)), 0l, 255l));
    };
    return {q(r), q(g), q(b)};
}

void put_pixel(Rgb8Image& img, int x, int y, const std::array<std::uint8_t, 3>& c) {
    img.at(x, y, 0) = c[0];
    img.at(x, y, 1) = c[1];
    img.at(x, y, 2) = c[2];
}

struct Shape {
    int kind = 0;  // 0 rect, 1 ellipse, 2 diamond
    double cx = 0, cy = 0, rx = 0, ry = 0;

    bool contains(int x, int y) const {
        const double dx = std::abs(x - cx), dy = std::abs(y - cy);
        switch (kind) {
            case 0: return dx <= rx && dy <= ry;
            case 1: return dx * dx / (rx * rx) + dy * dy / (ry * ry) <= 1.0;
            default: return dx / rx + dy / ry <= 1.0;
        }
    }
    BoundingBox bbox(int w, int h) const {
        BoundingBox b;
        b.x_min = std::max(0, static_cast<int>(std::floor(cx - rx)));
        b.y_min = std::max(0, static_cast<int>(std::floor(cy - ry)));
        b.x_max = std::min(w - 1, static_cast<int>(std::ceil(cx + rx)));
        b.y_max = std::min(h - 1, static_cast<int>(std::ceil(cy + ry)));
        return b;
    }
};

void paint_background(Rgb8Image& img, std::mt19937_64& rng, double bg_hue) {
    const int w = img.width, h = img.height;
    const int style = uniform_int(rng, 0, 2);
    const double s1 = uniform(rng, 0.08, 0.25), s2 = uniform(rng, 0.08, 0.25);
    const double v1 = uniform(rng, 0.35, 0.6), v2 = v1 + uniform(rng, 0.08, 0.2);
    const auto c1 = hsv_to_rgb8(bg_hue, s1, v1);
    const auto c2 = hsv_to_rgb8(bg_hue + uniform(rng, -0.06, 0.06), s2, v2);

    if (style == 0) {
        // stripes
        const int period = uniform_int(rng, 8, 16);
        const bool horizontal = unit(rng) < 0.5;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                put_pixel(img, x, y, ((horizontal ? y : x) / period) % 2 == 0 ? c1 : c2);
    } else if (style == 1) {
        // vertical gradient with faint grid lines
        const int grid = uniform_int(rng, 12, 20);
        for (int y = 0; y < h; ++y) {
            const double t = static_cast<double>(y) / (h - 1);
            std::array<std::uint8_t, 3> c;
            for (int ch = 0; ch < 3; ++ch)
                c[ch] = static_cast<std::uint8_t>(std::lround(c1[ch] + t * (c2[ch] - c1[ch])));
            for (int x = 0; x < w; ++x) {
                auto px = c;
                if (x % grid == 0 || y % grid == 0)
                    for (int ch = 0; ch < 3; ++ch)
                        px[ch] = static_cast<std::uint8_t>(px[ch] * 0.85);
                put_pixel(img, x, y, px);
            }
        }
    } else {
        // checkerboard tiles
        const int tile = uniform_int(rng, 12, 24);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                put_pixel(img, x, y, ((x / tile) + (y / tile)) % 2 == 0 ? c1 : c2);
    }
}

LabeledImage generate(std::mt19937_64& rng, int w, int h, bool with_mask) {
    LabeledImage li;
    li.image = Rgb8Image(w, h);
    const double bg_hue = unit(rng);
    paint_background(li.image, rng, bg_hue);

    // distractor speckle, drawn under the shapes
    const int dots = uniform_int(rng, 30, 60);
    for (int d = 0; d < dots; ++d) {
        const int x = uniform_int(rng, 0, w - 1);
        const int y = uniform_int(rng, 0, h - 1);
        const int r = uniform_int(rng, 1, 2);
        const auto c = hsv_to_rgb8(unit(rng), uniform(rng, 0.4, 1.0), uniform(rng, 0.3, 1.0));
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                const int px = x + dx, py = y + dy;
                if (px >= 0 && py >= 0 && px < w && py < h && dx * dx + dy * dy <= r * r)
                    put_pixel(li.image, px, py, c);
            }
    }

    const int shape_count = unit(rng) < 0.7 ? 1 : 2;
    const double min_dim = std::min(w, h);
    std::vector<Shape> shapes;
    for (int s = 0; s < shape_count; ++s) {
        Shape shape;
        shape.kind = uniform_int(rng, 0, 2);
        shape.rx = uniform(rng, 0.12, 0.22) * min_dim;
        shape.ry = uniform(rng, 0.12, 0.22) * min_dim;
        for (int attempt = 0; attempt < 8; ++attempt) {
            shape.cx = uniform(rng, 0.25, 0.75) * w;
            shape.cy = uniform(rng, 0.25, 0.75) * h;
            bool clear = true;
            for (const Shape& other : shapes) {
                const double dx = shape.cx - other.cx, dy = shape.cy - other.cy;
                if (std::sqrt(dx * dx + dy * dy) <
                    (shape.rx + other.rx + shape.ry + other.ry) * 0.5)
                    clear = false;
            }
            if (clear) break;
        }
        shapes.push_back(shape);
    }

    Gray8Image mask(w, h, 0);
    for (const Shape& shape : shapes) {
        // saturated color, hue pushed away from the background hue
        const double hue = bg_hue + uniform(rng, 0.25, 0.75);
        const auto color = hsv_to_rgb8(hue, uniform(rng, 0.8, 1.0), uniform(rng, 0.75, 1.0));
        const BoundingBox b = shape.bbox(w, h);
        for (int y = b.y_min; y <= b.y_max; ++y)
            for (int x = b.x_min; x <= b.x_max; ++x)
                if (shape.contains(x, y)) {
                    put_pixel(li.image, x, y, color);
                    mask.at(x, y) = 1;
                }
        li.boxes.push_back(b);
    }
    if (with_mask) li.ground_truth = BinaryMask(std::move(mask));
    return li;
}

}  // namespace

LabeledImage make_synthetic_image(std::uint64_t seed, int width, int height, bool with_mask) {
    std::mt19937_64 rng(seed);
    LabeledImage li = generate(rng, width, height, with_mask);
    li.id = "synthetic";
    return li;
}

void gen_synthetic(const std::filesystem::path& out_dir, const SyntheticParams& params) {
    std::filesystem::create_directories(out_dir / "db");
    std::filesystem::create_directories(out_dir / "test");

    char name[64];
    {
        std::ofstream manifest(out_dir / "db_manifest.tsv");
        if (!manifest) throw Error("cannot write db manifest");
        for (int i = 0; i < params.db_count; ++i) {
            std::mt19937_64 rng(params.seed + 1000003ull * static_cast<std::uint64_t>(i));
            LabeledImage li = generate(rng, params.width, params.height, false);
            std::snprintf(name, sizeof(name), "db%03d", i);
            li.id = name;
            write_png_rgb8(out_dir / "db" / (li.id + ".png"), li.image);
            write_box_file(out_dir / "db" / (li.id + ".boxes"), li.boxes);
            manifest << li.id << "\tdb/" << li.id << ".png\t\tdb/" << li.id << ".boxes\n";
        }
    }
    {
        std::ofstream manifest(out_dir / "test_manifest.tsv");
        if (!manifest) throw Error("cannot write test manifest");
        for (int i = 0; i < params.test_count; ++i) {
            std::mt19937_64 rng(params.seed + 7777777ull + 1000003ull * static_cast<std::uint64_t>(i));
            LabeledImage li = generate(rng, params.width, params.height, true);
            std::snprintf(name, sizeof(name), "test%03d", i);
            li.id = name;
            write_png_rgb8(out_dir / "test" / (li.id + ".png"), li.image);
            write_mask_file(out_dir / "test" / (li.id + "_mask.png"), *li.ground_truth);
            manifest << li.id << "\ttest/" << li.id << ".png\ttest/" << li.id << "_mask.png\n";
        }
    }
}

}  // namespace eis
