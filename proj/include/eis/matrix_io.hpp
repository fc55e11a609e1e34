#pragma once

#include <Eigen/Core>
#include <filesystem>

namespace eis {

// SFv1 container: magic "SFv1", u32 rows, u32 cols, f32 row-major payload,
// little endian throughout.
void write_sfv1(const std::filesystem::path& path, const Eigen::MatrixXf& m);
Eigen::MatrixXf read_sfv1(const std::filesystem::path& path);

}  // namespace eis
