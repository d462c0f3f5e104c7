#pragma once

#include <filesystem>
#include <vector>

#include "posegen/types.hpp"

namespace posegen {

/// Dataset manifest: a JSON list of {pose, text, audio, label} records with
/// paths relative to the manifest file.
std::vector<DatasetRecord> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<DatasetRecord>& records,
                   const std::filesystem::path& path);

/// Resolves a manifest-relative path against the manifest's directory.
std::filesystem::path resolve_record_path(const std::filesystem::path& manifest_path,
                                          const std::string& rel);

} // namespace posegen
