#pragma once

#include <filesystem>

#include "posegen/types.hpp"

namespace posegen {

/// Reads a pose CSV. Layout:
///   # fps=<int>
///   frame,rx,ry,rz,tx,ty,tz,gx,gy
///   0,<v>,...            (one row per frame, decimal text)
/// Errors carry the 0-based data row index. Throws IoError if the file cannot
/// be opened, ValidationError on format problems (wrong column count,
/// non-numeric or non-finite cells, T < 2).
PoseSequence load_pose_sequence(const std::filesystem::path& path);

/// Writes the CSV form of `seq` with 9 significant digits, which round-trips
/// 32-bit floats exactly. Throws ValidationError on an invalid sequence and
/// IoError on an unwritable path.
void save_pose_sequence(const PoseSequence& seq, const std::filesystem::path& path);

} // namespace posegen
