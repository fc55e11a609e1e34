#include "eis/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eis {

namespace {

// fixed histogram ranges per channel index (rgb/hsv in [0,1], Lab native)
constexpr float kChannelLo[9] = {0.f, 0.f, 0.f, 0.f, -128.f, -128.f, 0.f, 0.f, 0.f};
constexpr float kChannelHi[9] = {1.f, 1.f, 1.f, 100.f, 127.f, 127.f, 1.f, 1.f, 1.f};

std::uint8_t bin_of(float v, int channel) {
    const float t = (v - kChannelLo[channel]) / (kChannelHi[channel] - kChannelLo[channel]);
    const int b = static_cast<int>(t * kHistBins);
    return static_cast<std::uint8_t>(std::clamp(b, 0, kHistBins - 1));
}

struct RegionStats {
    double mean[9] = {};             // per channel
    double mad[9] = {};              // mean |v - mean| per channel
    double hist[9][kHistBins] = {};  // normalized per channel
    double filter_mean[15] = {};
    double count = 0;
    double cx = 0, cy = 0;  // centroid
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
};

RegionStats collect_stats(const ImageContext& ctx, const RegionMask& region) {
    if (region.empty()) throw Error("region_features: empty region");
    RegionStats s;
    s.count = static_cast<double>(region.area);
    s.x_min = region.x_min;
    s.y_min = region.y_min;
    s.x_max = region.x_max;
    s.y_max = region.y_max;

    const int w = ctx.width;
    double sum[9] = {};
    double fsum[15] = {};
    double sx = 0, sy = 0;
    region.for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
        for (std::uint64_t p = start; p < start + len; ++p) {
            for (int c = 0; c < 9; ++c) {
                sum[c] += ctx.channel(c).data[p];
                ++s.hist[c][ctx.bins[c][p]];
            }
            for (int f = 0; f < 15; ++f) fsum[f] += ctx.filters[f].data[p];
            sx += static_cast<double>(p % w);
            sy += static_cast<double>(p / w);
        }
    });
    for (int c = 0; c < 9; ++c) s.mean[c] = sum[c] / s.count;
    for (int f = 0; f < 15; ++f) s.filter_mean[f] = fsum[f] / s.count;
    s.cx = sx / s.count;
    s.cy = sy / s.count;
    for (int c = 0; c < 9; ++c)
        for (int b = 0; b < kHistBins; ++b) s.hist[c][b] /= s.count;

    double madsum[9] = {};
    region.for_each_one_run([&](std::uint64_t start, std::uint32_t len) {
        for (std::uint64_t p = start; p < start + len; ++p)
            for (int c = 0; c < 9; ++c) madsum[c] += std::abs(ctx.channel(c).data[p] - s.mean[c]);
    });
    for (int c = 0; c < 9; ++c) s.mad[c] = madsum[c] / s.count;
    return s;
}

// the 30-dim block shared by superpixel rows and the region analogue:
// mean RGB/Lab/HSV (9), mean |filter response| (15), centroid and bounding
// box normalized by the image dimensions (6)
void fill_base30(const RegionStats& s, int w, int h, double* out) {
    for (int c = 0; c < 9; ++c) out[c] = s.mean[c];
    for (int f = 0; f < 15; ++f) out[9 + f] = s.filter_mean[f];
    out[24] = s.cx / w;
    out[25] = s.cy / h;
    out[26] = static_cast<double>(s.x_min) / w;
    out[27] = static_cast<double>(s.y_min) / h;
    out[28] = static_cast<double>(s.x_max) / w;
    out[29] = static_cast<double>(s.y_max) / h;
}

}  // namespace

ImageContext make_image_context(const Rgb8Image& image, const FilterBank& bank) {
    ImageContext ctx;
    ctx.width = image.width;
    ctx.height = image.height;
    ctx.color = make_color_planes(image);
    ctx.filters = filter_responses(bank, ctx.color.luma);
    const std::size_t n = image.pixel_count();
    for (int c = 0; c < 9; ++c) {
        ctx.bins[c].resize(n);
        const GrayF32Image& plane = ctx.channel(c);
        for (std::size_t i = 0; i < n; ++i) ctx.bins[c][i] = bin_of(plane.data[i], c);
    }
    return ctx;
}

BinaryMask border_mask(const Rgb8Image& image) {
    if (std::min(image.width, image.height) <= 2 * kBorderWidth)
        throw Error("border_mask: image must be larger than " +
                    std::to_string(2 * kBorderWidth) + " px in each dimension");
    Gray8Image g(image.width, image.height, 0);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            if (x < kBorderWidth || y < kBorderWidth || x >= image.width - kBorderWidth ||
                y >= image.height - kBorderWidth)
                g.at(x, y) = 1;
    return BinaryMask(std::move(g));
}

RegionMask border_region(int width, int height) {
    Gray8Image g(width, height, 0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (x < kBorderWidth || y < kBorderWidth || x >= width - kBorderWidth ||
                y >= height - kBorderWidth)
                g.at(x, y) = 1;
    return RegionMask::from_mask(BinaryMask(std::move(g)));
}

SuperpixelFeatures superpixel_features(const ImageContext& ctx, const SuperpixelLayer& layer) {
    if (layer.width != ctx.width || layer.height != ctx.height)
        throw Error("superpixel_features: layer does not belong to image");
    const int n = layer.count;
    const int w = ctx.width;

    struct Acc {
        double sum[9] = {};
        double fsum[15] = {};
        double sx = 0, sy = 0;
        std::uint32_t count = 0;
        int x_min, y_min, x_max, y_max;
    };
    std::vector<Acc> acc(n);
    for (auto& a : acc) {
        a.x_min = ctx.width;
        a.y_min = ctx.height;
        a.x_max = -1;
        a.y_max = -1;
    }
    const std::size_t total = static_cast<std::size_t>(ctx.width) * ctx.height;
    for (std::size_t p = 0; p < total; ++p) {
        Acc& a = acc[layer.labels[p]];
        for (int c = 0; c < 9; ++c) a.sum[c] += ctx.channel(c).data[p];
        for (int f = 0; f < 15; ++f) a.fsum[f] += ctx.filters[f].data[p];
        const int x = static_cast<int>(p % w);
        const int y = static_cast<int>(p / w);
        a.sx += x;
        a.sy += y;
        a.x_min = std::min(a.x_min, x);
        a.x_max = std::max(a.x_max, x);
        a.y_min = std::min(a.y_min, y);
        a.y_max = std::max(a.y_max, y);
        ++a.count;
    }

    Eigen::MatrixXd m(n, kSuperpixelFeatureDim);
    for (int i = 0; i < n; ++i) {
        const Acc& a = acc[i];
        RegionStats s;
        s.count = a.count;
        for (int c = 0; c < 9; ++c) s.mean[c] = a.sum[c] / a.count;
        for (int f = 0; f < 15; ++f) s.filter_mean[f] = a.fsum[f] / a.count;
        s.cx = a.sx / a.count;
        s.cy = a.sy / a.count;
        s.x_min = a.x_min;
        s.y_min = a.y_min;
        s.x_max = a.x_max;
        s.y_max = a.y_max;
        double row[kSuperpixelFeatureDim];
        fill_base30(s, ctx.width, ctx.height, row);
        for (int c = 0; c < kSuperpixelFeatureDim; ++c) m(i, c) = row[c];
    }

    // column standardization; constant columns stay zero
    for (int c = 0; c < kSuperpixelFeatureDim; ++c) {
        const double mean = m.col(c).mean();
        const double var = (m.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (sd < 1e-12)
            m.col(c).setZero();
        else
            m.col(c) = (m.col(c).array() - mean) / sd;
    }
    return SuperpixelFeatures{std::move(m)};
}

SuperpixelFeatures superpixel_features(const Rgb8Image& image, const SuperpixelLayer& layer,
                                       const FilterBank& bank) {
    return superpixel_features(make_image_context(image, bank), layer);
}

RegionFeatures region_features(const ImageContext& ctx, const RegionMask& region,
                               const RegionMask& border) {
    if (region.width != ctx.width || region.height != ctx.height ||
        border.width != ctx.width || border.height != ctx.height)
        throw Error("region_features: dimension mismatch");
    if (region.empty()) throw Error("region_features: empty region");
    if (border.empty()) throw Error("region_features: empty border");

    const RegionStats r = collect_stats(ctx, region);
    const RegionStats b = collect_stats(ctx, border);
    const int w = ctx.width, h = ctx.height;

    Eigen::Matrix<double, kRegionFeatureDim, 1> f;
    int k = 0;

    // [0..29] region analogue of the superpixel features
    double base[kSuperpixelFeatureDim];
    fill_base30(r, w, h, base);
    for (int i = 0; i < kSuperpixelFeatureDim; ++i) f(k++) = base[i];

    // [30] area fraction
    f(k++) = r.count / (static_cast<double>(w) * h);

    // [31..42] per-bin chi-square terms between channel-pooled 4-bin
    // histograms, one 4-dim signature per color space
    for (int space = 0; space < 3; ++space) {
        double sig_r[kHistBins] = {}, sig_b[kHistBins] = {};
        for (int c = 0; c < 3; ++c) {
            for (int bin = 0; bin < kHistBins; ++bin) {
                sig_r[bin] += r.hist[space * 3 + c][bin] / 3.0;
                sig_b[bin] += b.hist[space * 3 + c][bin] / 3.0;
            }
        }
        for (int bin = 0; bin < kHistBins; ++bin) {
            const double d = sig_r[bin] - sig_b[bin];
            const double s = sig_r[bin] + sig_b[bin];
            f(k++) = s > 0 ? d * d / s : 0.0;
        }
    }

    // [43..51] |mean - mean| per channel
    for (int c = 0; c < 9; ++c) f(k++) = std::abs(r.mean[c] - b.mean[c]);

    // [52..60] mean-absolute-deviation contrast per channel
    for (int c = 0; c < 9; ++c) f(k++) = std::abs(r.mad[c] - b.mad[c]);

    // [61..75] region minus border mean |filter response|
    for (int i = 0; i < 15; ++i) f(k++) = r.filter_mean[i] - b.filter_mean[i];

    // [76..78] shape: bbox fractions and perimeter^2/area compactness
    f(k++) = static_cast<double>(r.x_max - r.x_min + 1) / w;
    f(k++) = static_cast<double>(r.y_max - r.y_min + 1) / h;
    const double per = static_cast<double>(perimeter(region));
    f(k++) = per * per / r.count;

    // [79..80] centroid offset from the image center
    f(k++) = (r.cx - (w - 1) / 2.0) / w;
    f(k++) = (r.cy - (h - 1) / 2.0) / h;

    RegionFeatures out = f.cast<float>();
    for (int i = 0; i < kRegionFeatureDim; ++i)
        if (!std::isfinite(out(i))) throw Error("region_features: non-finite feature");
    return out;
}

RegionFeatures region_features(const Rgb8Image& image, const BinaryMask& region,
                               const BinaryMask& border, const FilterBank& bank) {
    return region_features(make_image_context(image, bank), RegionMask::from_mask(region),
                           RegionMask::from_mask(border));
}

ImageDescriptor image_descriptor(const Rgb8Image& image) {
    const int w = image.width, h = image.height;
    validate_image_dims(w, h, "image_descriptor");
    Eigen::VectorXd desc = Eigen::VectorXd::Zero(kDescriptorDim);

    // hue block: 2x2 grid x 2 saturation bands x 32 hue bins, saturation votes
    constexpr int kHueBins = 32;
    for (int y = 0; y < h; ++y) {
        const int gy = y * 2 / h;
        for (int x = 0; x < w; ++x) {
            const int gx = x * 2 / w;
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            const auto hsv = rgb_to_hsv(image.data[p * 3], image.data[p * 3 + 1],
                                        image.data[p * 3 + 2]);
            const int band = hsv[1] < 0.5f ? 0 : 1;
            const int bin = std::min(kHueBins - 1, static_cast<int>(hsv[0] * kHueBins));
            desc[((gy * 2 + gx) * 2 + band) * kHueBins + bin] += hsv[1];
        }
    }

    // gradient block: 4x4 grid x 8 orientations x 2 scales on luma
    GrayF32Image luma(w, h);
    for (std::size_t p = 0; p < image.pixel_count(); ++p)
        luma.data[p] = rgb_to_luma(image.data[p * 3], image.data[p * 3 + 1], image.data[p * 3 + 2]);

    constexpr int kOrientBins = 8;
    GrayF32Image scaled = luma;
    for (int scale = 0; scale < 2; ++scale) {
        const int sw = scaled.width, sh = scaled.height;
        for (int y = 0; y < sh; ++y) {
            const int gy = y * 4 / sh;
            for (int x = 0; x < sw; ++x) {
                const int gx = x * 4 / sw;
                const float dx = scaled.at(std::min(sw - 1, x + 1), y) -
                                 scaled.at(std::max(0, x - 1), y);
                const float dy = scaled.at(x, std::min(sh - 1, y + 1)) -
                                 scaled.at(x, std::max(0, y - 1));
                const double mag = std::sqrt(static_cast<double>(dx) * dx +
                                             static_cast<double>(dy) * dy);
                if (mag <= 0) continue;
                double ang = std::atan2(dy, dx);  // orientation mod pi
                if (ang < 0) ang += std::numbers::pi;
                if (ang >= std::numbers::pi) ang -= std::numbers::pi;
                const int bin = std::min(kOrientBins - 1,
                                         static_cast<int>(ang / std::numbers::pi * kOrientBins));
                desc[256 + ((gy * 4 + gx) * 2 + scale) * kOrientBins + bin] += mag;
            }
        }
        if (scale == 0) {
            // 2x box downsample for the second scale
            const int dw = std::max(1, sw / 2), dh = std::max(1, sh / 2);
            GrayF32Image half(dw, dh);
            for (int y = 0; y < dh; ++y)
                for (int x = 0; x < dw; ++x)
                    half.at(x, y) = 0.25f * (scaled.at(2 * x, 2 * y) + scaled.at(2 * x + 1, 2 * y) +
                                             scaled.at(2 * x, 2 * y + 1) +
                                             scaled.at(2 * x + 1, 2 * y + 1));
            scaled = std::move(half);
        }
    }

    const double hue_norm = desc.head(256).norm();
    if (hue_norm > 0) desc.head(256) /= hue_norm;
    const double grad_norm = desc.tail(256).norm();
    if (grad_norm > 0) desc.tail(256) /= grad_norm;
    const double total = desc.norm();
    if (total > 0)
        desc /= total;
    else
        desc[0] = 1.0;  // featureless image: canonical unit vector

    ImageDescriptor out;
    out.vector = desc.cast<float>();
    return out;
}

double descriptor_sq_distance(const ImageDescriptor& a, const ImageDescriptor& b) {
    if (a.vector.size() != b.vector.size()) throw Error("descriptor dimension mismatch");
    double acc = 0;
    for (Eigen::Index i = 0; i < a.vector.size(); ++i) {
        const double d = static_cast<double>(a.vector[i]) - b.vector[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace eis
