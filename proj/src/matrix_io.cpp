#include "eis/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "eis/raster.hpp"

static_assert(std::endian::native == std::endian::little, "SFv1 IO assumes a little-endian host");

namespace eis {

void write_sfv1(const std::filesystem::path& path, const Eigen::MatrixXf& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const char magic[4] = {'S', 'F', 'v', '1'};
    out.write(magic, 4);
    const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    // row-major payload
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            const float v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), 4);
        }
    }
    if (!out) throw Error("write failed: " + path.string());
}

Eigen::MatrixXf read_sfv1(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SFv1", 4) != 0) throw Error("bad SFv1 magic in " + path.string());
    std::uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    if (!in) throw Error("truncated SFv1 header in " + path.string());
    Eigen::MatrixXf m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            float v;
            in.read(reinterpret_cast<char*>(&v), 4);
            if (!in) throw Error("truncated SFv1 payload in " + path.string());
            m(r, c) = v;
        }
    }
    return m;
}

}  // namespace eis
