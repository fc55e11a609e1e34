#include "eis/fusion.hpp"

namespace eis {

SaliencyMap fuse(const SaliencyMap& external, const SaliencyMap& internal, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw Error("fuse: gamma outside [0,1]");
    if (external.width() != internal.width() || external.height() != internal.height())
        throw Error("fuse: dimension mismatch");
    if (!external.normalized || !internal.normalized)
        throw Error("fuse: inputs must be normalized");

    if (gamma == 0.0) return internal;
    if (gamma == 1.0) return external;

    GrayF32Image g(external.width(), external.height());
    for (std::size_t p = 0; p < g.data.size(); ++p) {
        // a + gamma (b - a): exact on equal inputs
        const float a = internal.grid.data[p];
        const float b = external.grid.data[p];
        g.data[p] = static_cast<float>(a + gamma * (static_cast<double>(b) - a));
    }
    return normalize_map(SaliencyMap(std::move(g), false));
}

}  // namespace eis
