#pragma once

#include <filesystem>
#include <vector>

#include "posegen/mat.hpp"

namespace posegen {

/// Binary tensor container: `<name>.f32` holds raw little-endian 32-bit
/// floats in row-major order, `<name>.json` is a sidecar of the form
/// {"dtype":"f32","shape":[...]}. Checkpoints use the same container with
/// dtype "f64" and extension `.f64` so that parameter round-trips stay
/// bit-exact.

/// Loads an f32 tensor of rank 1 or 2 (rank 1 becomes a 1 x N matrix).
/// Throws ValidationError on shape/size/dtype mismatch or non-finite values,
/// IoError when files are missing.
MatF load_tensor(const std::filesystem::path& data_path);

/// Writes `m` as shape [rows, cols]. `data_path` must end in ".f32".
void save_tensor(const MatF& m, const std::filesystem::path& data_path);

/// As save_tensor but with an explicit shape (e.g. [1, 512] vs [512]);
/// the element count must match.
void save_tensor(const MatF& m, const std::filesystem::path& data_path,
                 const std::vector<long>& shape);

/// f64 variants used by checkpoints. `data_path` must end in ".f64".
MatD load_tensor_f64(const std::filesystem::path& data_path);
void save_tensor_f64(const MatD& m, const std::filesystem::path& data_path);

} // namespace posegen
