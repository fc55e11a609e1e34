#pragma once

#include <filesystem>

#include "eis/raster.hpp"

namespace eis {

struct SyntheticParams {
    std::uint64_t seed = 20240913;
    int db_count = 200;
    int test_count = 40;
    int width = 128;
    int height = 96;
};

// Emits the synthetic benchmark corpus: solid-color shapes with distractor
// speckle on structured backgrounds. Writes db/ (images + box files),
// test/ (images + masks), db_manifest.tsv and test_manifest.tsv under out_dir.
void gen_synthetic(const std::filesystem::path& out_dir, const SyntheticParams& params = {});

// one generated image, usable directly in tests
LabeledImage make_synthetic_image(std::uint64_t seed, int width, int height, bool with_mask);

}  // namespace eis
