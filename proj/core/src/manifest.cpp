#include "posegen/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "posegen/errors.hpp"

namespace posegen {

using nlohmann::json;

std::vector<DatasetRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": bad manifest JSON: " + e.what());
    }
    if (!j.is_array()) throw ValidationError(path.string() + ": manifest must be a JSON list");
    std::vector<DatasetRecord> records;
    records.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        const auto& r = j[i];
        for (const char* key : {"pose", "text", "audio", "label"})
            if (!r.contains(key) || !r[key].is_string())
                throw ValidationError(path.string() + ": record " + std::to_string(i) +
                                      " missing string field '" + key + "'");
        DatasetRecord rec;
        rec.pose = r["pose"].get<std::string>();
        rec.text = r["text"].get<std::string>();
        rec.audio = r["audio"].get<std::string>();
        rec.label = r["label"].get<std::string>();
        motion_class_from_string(rec.label); // validate
        records.push_back(std::move(rec));
    }
    return records;
}

void save_manifest(const std::vector<DatasetRecord>& records,
                   const std::filesystem::path& path) {
    json j = json::array();
    for (const auto& r : records)
        j.push_back({{"pose", r.pose}, {"text", r.text}, {"audio", r.audio}, {"label", r.label}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

std::filesystem::path resolve_record_path(const std::filesystem::path& manifest_path,
                                          const std::string& rel) {
    const std::filesystem::path p(rel);
    if (p.is_absolute()) return p;
    return manifest_path.parent_path() / p;
}

} // namespace posegen
