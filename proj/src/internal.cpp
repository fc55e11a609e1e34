#include "eis/internal.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <random>

#include "eis/color.hpp"

namespace eis {

namespace {

constexpr int kObjColorBins = 4;  // per RGB channel -> 64 joint bins
constexpr int kObjBins = kObjColorBins * kObjColorBins * kObjColorBins;

struct IntegralPlanes {
    int w = 0, h = 0;
    std::vector<double> gradient;            // (w+1)*(h+1) summed-area
    std::vector<std::uint32_t> hist;         // kObjBins * (w+1)*(h+1)

    double grad_sum(int x0, int y0, int x1, int y1) const {  // inclusive box
        const int stride = w + 1;
        auto at = [&](int x, int y) { return gradient[static_cast<std::size_t>(y) * stride + x]; };
        return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
    }
    void hist_sum(int x0, int y0, int x1, int y1, double* out) const {
        const std::size_t plane = static_cast<std::size_t>(w + 1) * (h + 1);
        const int stride = w + 1;
        for (int b = 0; b < kObjBins; ++b) {
            const std::uint32_t* p = hist.data() + b * plane;
            auto at = [&](int x, int y) { return p[static_cast<std::size_t>(y) * stride + x]; };
            out[b] = static_cast<double>(at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) +
                                         at(x0, y0));
        }
    }
};

IntegralPlanes build_integrals(const Rgb8Image& image) {
    const int w = image.width, h = image.height;
    IntegralPlanes ip;
    ip.w = w;
    ip.h = h;

    GrayF32Image luma(w, h);
    for (std::size_t p = 0; p < image.pixel_count(); ++p)
        luma.data[p] = rgb_to_luma(image.data[p * 3], image.data[p * 3 + 1], image.data[p * 3 + 2]);

    const int stride = w + 1;
    ip.gradient.assign(static_cast<std::size_t>(stride) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double rowsum = 0;
        for (int x = 0; x < w; ++x) {
            const float dx = luma.at(std::min(w - 1, x + 1), y) - luma.at(std::max(0, x - 1), y);
            const float dy = luma.at(x, std::min(h - 1, y + 1)) - luma.at(x, std::max(0, y - 1));
            rowsum += std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
            ip.gradient[static_cast<std::size_t>(y + 1) * stride + x + 1] =
                ip.gradient[static_cast<std::size_t>(y) * stride + x + 1] + rowsum;
        }
    }

    const std::size_t plane = static_cast<std::size_t>(stride) * (h + 1);
    ip.hist.assign(plane * kObjBins, 0);
    for (int y = 0; y < h; ++y) {
        std::array<std::uint32_t, kObjBins> rowsum{};
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            const int br = std::min(kObjColorBins - 1, image.data[p * 3] * kObjColorBins / 256);
            const int bg = std::min(kObjColorBins - 1, image.data[p * 3 + 1] * kObjColorBins / 256);
            const int bb = std::min(kObjColorBins - 1, image.data[p * 3 + 2] * kObjColorBins / 256);
            ++rowsum[(br * kObjColorBins + bg) * kObjColorBins + bb];
            for (int b = 0; b < kObjBins; ++b)
                ip.hist[b * plane + static_cast<std::size_t>(y + 1) * stride + x + 1] =
                    ip.hist[b * plane + static_cast<std::size_t>(y) * stride + x + 1] + rowsum[b];
        }
    }
    return ip;
}

double chi_square(const double* a, const double* b, int n) {
    double sa = 0, sb = 0;
    for (int i = 0; i < n; ++i) {
        sa += a[i];
        sb += b[i];
    }
    if (sa <= 0 || sb <= 0) return 0.0;
    double d = 0;
    for (int i = 0; i < n; ++i) {
        const double pa = a[i] / sa;
        const double pb = b[i] / sb;
        const double s = pa + pb;
        if (s > 0) d += (pa - pb) * (pa - pb) / s;
    }
    return 0.5 * d;
}

inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

SaliencyMap objectness_map(const Rgb8Image& image, int window_count) {
    const int w = image.width, h = image.height;
    validate_image_dims(w, h, "objectness_map");
    const IntegralPlanes ip = build_integrals(image);

    // difference-array accumulation of window scores
    std::vector<double> splat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);

    const double min_dim = std::min(w, h);
    for (int i = 0; i < window_count; ++i) {
        // stratified scale: geometric ramp over [0.12, 0.75] of min dim
        const double frac = 0.12 * std::pow(0.75 / 0.12, (i + unit_double(rng)) / window_count);
        const double aspect = std::pow(2.0, 2.0 * unit_double(rng) - 1.0);  // [0.5, 2]
        int ww = std::clamp(static_cast<int>(min_dim * frac * std::sqrt(aspect)), 4, w - 2);
        int wh = std::clamp(static_cast<int>(min_dim * frac / std::sqrt(aspect)), 4, h - 2);
        const int x0 = 1 + static_cast<int>(unit_double(rng) * (w - ww - 1));
        const int y0 = 1 + static_cast<int>(unit_double(rng) * (h - wh - 1));
        const int x1 = x0 + ww - 1;
        const int y1 = y0 + wh - 1;

        // boundary ring = window minus 2px inset
        const double win_grad = ip.grad_sum(x0, y0, x1, y1);
        double inner_grad = 0;
        std::int64_t inner_area = 0;
        if (ww > 4 && wh > 4) {
            inner_grad = ip.grad_sum(x0 + 2, y0 + 2, x1 - 2, y1 - 2);
            inner_area = static_cast<std::int64_t>(ww - 4) * (wh - 4);
        }
        const std::int64_t ring_area = static_cast<std::int64_t>(ww) * wh - inner_area;
        const double ring_mean = ring_area > 0 ? (win_grad - inner_grad) / ring_area : 0.0;

        // surround = window grown by half its size, clipped, minus window
        const int sx0 = std::max(0, x0 - ww / 2);
        const int sy0 = std::max(0, y0 - wh / 2);
        const int sx1 = std::min(w - 1, x1 + ww / 2);
        const int sy1 = std::min(h - 1, y1 + wh / 2);
        double hist_in[kObjBins], hist_out[kObjBins], hist_sur[kObjBins];
        ip.hist_sum(x0, y0, x1, y1, hist_in);
        ip.hist_sum(sx0, sy0, sx1, sy1, hist_sur);
        for (int b = 0; b < kObjBins; ++b) hist_out[b] = hist_sur[b] - hist_in[b];
        const double contrast = chi_square(hist_in, hist_out, kObjBins);

        const double score = ring_mean * contrast;
        if (score <= 0) continue;
        const int stride = w + 1;
        splat[static_cast<std::size_t>(y0) * stride + x0] += score;
        splat[static_cast<std::size_t>(y0) * stride + x1 + 1] -= score;
        splat[static_cast<std::size_t>(y1 + 1) * stride + x0] -= score;
        splat[static_cast<std::size_t>(y1 + 1) * stride + x1 + 1] += score;
    }

    GrayF32Image out(w, h);
    std::vector<double> row(static_cast<std::size_t>(w), 0.0);
    std::vector<double> col_acc(static_cast<std::size_t>(w), 0.0);
    for (int y = 0; y < h; ++y) {
        double acc = 0;
        for (int x = 0; x < w; ++x) {
            acc += splat[static_cast<std::size_t>(y) * (w + 1) + x];
            col_acc[x] += acc;
            out.at(x, y) = static_cast<float>(col_acc[x]);
        }
    }
    return normalize_map(SaliencyMap(std::move(out), false));
}

Eigen::VectorXd superpixel_prior(const SaliencyMap& objectness, const SuperpixelLayer& layer) {
    if (objectness.width() != layer.width || objectness.height() != layer.height)
        throw Error("superpixel_prior: dimension mismatch");
    Eigen::VectorXd m = Eigen::VectorXd::Zero(layer.count);
    for (std::size_t p = 0; p < layer.labels.size(); ++p)
        m[layer.labels[p]] += objectness.grid.data[p];
    const double mx = m.maxCoeff();
    if (mx > 0) m /= mx;
    return m;
}

Eigen::MatrixXd discriminability(const Eigen::MatrixXd& features, double kappa) {
    const Eigen::Index n = features.rows();
    if (n < 2) throw Error("discriminability: need at least 2 superpixels");

    // P X with P = I - (1/n) 1 1'
    const Eigen::MatrixXd centered = features.rowwise() - features.colwise().mean();
    Eigen::MatrixXd gram = centered.transpose() * centered;  // X' P X
    gram.diagonal().array() += static_cast<double>(n) * kappa;

    // P (I - X G^-1 X') P = P - (P X) G^-1 (P X)'
    Eigen::MatrixXd u = -centered * gram.ldlt().solve(centered.transpose());
    u.array() -= 1.0 / static_cast<double>(n);
    u.diagonal().array() += 1.0;
    u /= static_cast<double>(n);
    return ((u + u.transpose()) * 0.5).eval();
}

Eigen::MatrixXd AffinityMatrix::laplacian() const {
    Eigen::MatrixXd l = -weights;
    l.diagonal() += degree;
    return l;
}

Eigen::VectorXd AffinityMatrix::laplacian_apply(const Eigen::VectorXd& v) const {
    return degree.cwiseProduct(v) - weights * v;
}

AffinityMatrix affinity(const Eigen::MatrixXd& features, double sigma2) {
    if (sigma2 <= 0) throw Error("affinity: sigma^2 must be positive");
    const Eigen::Index n = features.rows();
    AffinityMatrix a;
    a.weights.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a.weights(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = (features.row(i) - features.row(j)).norm();
            const double w = std::exp(-dist / sigma2);
            a.weights(i, j) = w;
            a.weights(j, i) = w;
        }
    }
    a.degree.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) a.degree[i] = a.weights.row(i).sum();
    return a;
}

LayerSolution solve_layer(const Eigen::MatrixXd& discrim, const AffinityMatrix& aff,
                          const Eigen::VectorXd& prior, double alpha, double beta, double eps) {
    if (alpha < 0 || beta <= 0 || eps <= 0)
        throw Error("solve_layer: require alpha >= 0, beta > 0, eps > 0");
    const Eigen::Index n = prior.size();
    Eigen::MatrixXd a = discrim + alpha * aff.laplacian();
    a.diagonal().array() += eps;

    LayerSolution sol;
    if (prior.isZero(0.0)) {
        sol.scores = Eigen::VectorXd::Zero(n);
        return sol;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error("solve_layer: SPD factorization failed (non-PSD input?)");
    sol.scores = llt.solve(0.5 * beta * prior);
    sol.residual = (2.0 * (a * sol.scores) - beta * prior).norm() / (beta * prior.norm());
    if (sol.residual >= 1e-8) {
        // one refinement step keeps the stationarity contract on ill-scaled input
        const Eigen::VectorXd r = 0.5 * beta * prior - a * sol.scores;
        sol.scores += llt.solve(r);
        sol.residual = (2.0 * (a * sol.scores) - beta * prior).norm() / (beta * prior.norm());
    }
    return sol;
}

SaliencyMap paint_layer(const Eigen::VectorXd& scores, const SuperpixelLayer& layer) {
    Eigen::VectorXd s = scores;
    const double mn = s.minCoeff();
    const double mx = s.maxCoeff();
    if (mx > mn)
        s = (s.array() - mn) / (mx - mn);
    else
        s.setZero();
    GrayF32Image g(layer.width, layer.height);
    for (std::size_t p = 0; p < layer.labels.size(); ++p)
        g.data[p] = static_cast<float>(s[layer.labels[p]]);
    return SaliencyMap(std::move(g), false);
}

InternalResult run_internal(const Rgb8Image& image, const std::vector<SuperpixelLayer>& layers,
                            const ImageContext& ctx, const InternalParams& params,
                            const SaliencyMap* imported_objectness) {
    InternalResult res;
    if (imported_objectness) {
        if (imported_objectness->width() != image.width ||
            imported_objectness->height() != image.height)
            throw Error("imported objectness map has wrong dimensions");
        res.objectness = normalize_map(*imported_objectness);
    } else {
        res.objectness = objectness_map(image, params.objectness_windows);
    }

    GrayF32Image fused(image.width, image.height, 0.0f);
    std::vector<double> acc(fused.data.size(), 0.0);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const SuperpixelLayer& layer = layers[li];
        const SuperpixelFeatures feats = superpixel_features(ctx, layer);
        const Eigen::MatrixXd u = discriminability(feats.matrix, params.kappa);
        const AffinityMatrix aff = affinity(feats.matrix, params.sigma2);
        const Eigen::VectorXd m = superpixel_prior(res.objectness, layer);
        const LayerSolution sol =
            solve_layer(u, aff, m, params.alpha, params.beta, params.epsilon);
        SaliencyMap painted = paint_layer(sol.scores, layer);
        const double weight =
            li < params.layer_weights.size() ? params.layer_weights[li] : 1.0;
        for (std::size_t p = 0; p < acc.size(); ++p)
            acc[p] += weight * painted.grid.data[p];
        res.layer_maps.push_back(std::move(painted));
    }
    for (std::size_t p = 0; p < acc.size(); ++p)
        fused.data[p] = static_cast<float>(acc[p] / static_cast<double>(layers.size()));
    res.map = normalize_map(SaliencyMap(std::move(fused), false));
    return res;
}

SaliencyMap internal_map(const Rgb8Image& image, const InternalParams& params) {
    const std::vector<SuperpixelLayer> layers = build_layers(image);
    const ImageContext ctx = make_image_context(image, make_default_filter_bank());
    return run_internal(image, layers, ctx, params).map;
}

}  // namespace eis
