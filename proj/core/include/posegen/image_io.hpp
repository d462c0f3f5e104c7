#pragma once

#include <filesystem>

#include "posegen/flow.hpp"

namespace posegen::flow {

/// 8-bit binary PGM (P5, 1 channel) and PPM (P6, 3 channels). Pixel values
/// map to [0, 1] doubles on load; writing clamps to [0, 1] and rounds.
ImageGrid load_image(const std::filesystem::path& path);
void save_image(const ImageGrid& img, const std::filesystem::path& path);

} // namespace posegen::flow
