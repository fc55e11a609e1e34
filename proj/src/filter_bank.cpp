#include "eis/filter_bank.hpp"

#include <cmath>
#include <numbers>

namespace eis {

namespace {

FilterKernel finalize_kernel(std::vector<double> raw, int size, bool zero_mean) {
    if (zero_mean) {
        double mean = 0;
        for (double v : raw) mean += v;
        mean /= static_cast<double>(raw.size());
        for (double& v : raw) v -= mean;
    }
    double l1 = 0;
    for (double v : raw) l1 += std::abs(v);
    FilterKernel k;
    k.size = size;
    k.weights.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        k.weights[i] = static_cast<float>(l1 > 0 ? raw[i] / l1 : raw[i]);
    return k;
}

// oriented anisotropic Gaussian derivative; order 1 or 2, taken across the
// orientation axis while smoothing along it with sigma_long = 2 sigma
FilterKernel gaussian_derivative(double sigma, double theta, int order) {
    const double sigma_long = 2.0 * sigma;
    const int half = static_cast<int>(std::ceil(3.0 * sigma_long));
    const int size = 2 * half + 1;
    const double ct = std::cos(theta), st = std::sin(theta);
    std::vector<double> raw(static_cast<std::size_t>(size) * size);
    for (int y = -half; y <= half; ++y) {
        for (int x = -half; x <= half; ++x) {
            const double u = ct * x + st * y;   // across edge
            const double v = -st * x + ct * y;  // along edge
            const double g = std::exp(-0.5 * (u * u / (sigma * sigma) +
                                              v * v / (sigma_long * sigma_long)));
            double d;
            if (order == 1)
                d = -u / (sigma * sigma) * g;
            else
                d = (u * u / (sigma * sigma) - 1.0) / (sigma * sigma) * g;
            raw[static_cast<std::size_t>(y + half) * size + (x + half)] = d;
        }
    }
    return finalize_kernel(std::move(raw), size, true);
}

FilterKernel laplacian_of_gaussian(double sigma) {
    const int half = static_cast<int>(std::ceil(3.0 * sigma));
    const int size = 2 * half + 1;
    std::vector<double> raw(static_cast<std::size_t>(size) * size);
    for (int y = -half; y <= half; ++y) {
        for (int x = -half; x <= half; ++x) {
            const double r2 = x * x + y * y;
            const double s2 = sigma * sigma;
            raw[static_cast<std::size_t>(y + half) * size + (x + half)] =
                (r2 - 2.0 * s2) / (s2 * s2) * std::exp(-r2 / (2.0 * s2));
        }
    }
    return finalize_kernel(std::move(raw), size, true);
}

FilterKernel gaussian(double sigma) {
    const int half = static_cast<int>(std::ceil(3.0 * sigma));
    const int size = 2 * half + 1;
    std::vector<double> raw(static_cast<std::size_t>(size) * size);
    for (int y = -half; y <= half; ++y)
        for (int x = -half; x <= half; ++x)
            raw[static_cast<std::size_t>(y + half) * size + (x + half)] =
                std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    return finalize_kernel(std::move(raw), size, false);
}

}  // namespace

FilterBank make_default_filter_bank() {
    FilterBank bank;
    const double orientations[3] = {0.0, std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0};
    const double scales[2] = {1.0, std::numbers::sqrt2};
    for (double s : scales)
        for (double t : orientations) bank.kernels.push_back(gaussian_derivative(s, t, 1));
    for (double s : scales)
        for (double t : orientations) bank.kernels.push_back(gaussian_derivative(s, t, 2));
    bank.kernels.push_back(laplacian_of_gaussian(1.4));
    bank.kernels.push_back(laplacian_of_gaussian(2.8));
    bank.kernels.push_back(gaussian(2.0));
    return bank;
}

std::vector<GrayF32Image> filter_responses(const FilterBank& bank, const GrayF32Image& luma) {
    const int w = luma.width, h = luma.height;
    std::vector<GrayF32Image> out;
    out.reserve(bank.kernels.size());
    for (const auto& k : bank.kernels) {
        const int half = k.size / 2;
        GrayF32Image plane(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0;
                const float* kw = k.weights.data();
                for (int ky = -half; ky <= half; ++ky) {
                    const int sy = std::clamp(y + ky, 0, h - 1);
                    const std::size_t row = static_cast<std::size_t>(sy) * w;
                    for (int kx = -half; kx <= half; ++kx) {
                        const int sx = std::clamp(x + kx, 0, w - 1);
                        acc += *kw++ * luma.data[row + sx];
                    }
                }
                plane.at(x, y) = static_cast<float>(std::abs(acc));
            }
        }
        out.push_back(std::move(plane));
    }
    return out;
}

}  // namespace eis
