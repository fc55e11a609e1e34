#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eis {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// thrown when SVM training receives samples of only one class; callers fall
// back to the internal map (gamma = 0) for that image
class SingleClassError : public Error {
public:
    using Error::Error;
};

constexpr int kMinImageDim = 16;

// Row-major, channel-interleaved raster.
template <typename T, int C>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * C, fill) {}

    static constexpr int channels() { return C; }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    T& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * C + c];
    }
    const T& at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * C + c];
    }

    bool same_size(int w, int h) const { return width == w && height == h; }
};

using Rgb8Image = Image<std::uint8_t, 3>;
using Gray8Image = Image<std::uint8_t, 1>;
using GrayF32Image = Image<float, 1>;

// Enforces the pipeline minimum dimensions. Throws Error.
void validate_image_dims(int width, int height, const std::string& what);

// Per-pixel scores on the source image grid. `normalized` marks maps whose
// values are in [0,1] with max 1 (unless identically zero).
struct SaliencyMap {
    GrayF32Image grid;
    bool normalized = false;

    SaliencyMap() = default;
    explicit SaliencyMap(GrayF32Image g, bool norm = false)
        : grid(std::move(g)), normalized(norm) {}

    int width() const { return grid.width; }
    int height() const { return grid.height; }
    float value(int x, int y) const { return grid.at(x, y); }
};

// Affine rescale of the map to [0,1]; a constant map becomes all zeros.
// Throws Error on non-finite values.
SaliencyMap normalize_map(const SaliencyMap& map);

struct BinaryMask {
    Gray8Image grid;  // values strictly in {0,1}

    BinaryMask() = default;
    explicit BinaryMask(Gray8Image g) : grid(std::move(g)) {}

    int width() const { return grid.width; }
    int height() const { return grid.height; }
    bool get(int x, int y) const { return grid.at(x, y) != 0; }
    std::size_t count() const;
};

// Throws unless every grid value is 0 or 1.
void validate_binary(const BinaryMask& mask);

struct BoundingBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }
    std::int64_t area() const { return static_cast<std::int64_t>(width()) * height(); }
    bool contains(int x, int y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
};

// Checks x_min <= x_max < width and y_min <= y_max < height, coordinates >= 0.
void validate_box(const BoundingBox& box, int width, int height, const std::string& what);

struct LabeledImage {
    Rgb8Image image;
    std::optional<BinaryMask> ground_truth;
    std::vector<BoundingBox> boxes;
    std::string id;
};

}  // namespace eis
