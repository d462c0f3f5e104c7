#include "posegen/pose_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "posegen/errors.hpp"

namespace posegen {

namespace {

const char* kHeader = "frame,rx,ry,rz,tx,ty,tz,gx,gy";
constexpr int kColumns = 1 + PoseFrame::kDim;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

float parse_cell(const std::string& cell, int row, const char* col_name) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    float value = 0.0f;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ValidationError("row " + std::to_string(row) + ": non-numeric cell in column " +
                              col_name + " ('" + cell + "')");
    if (!std::isfinite(value))
        throw ValidationError("row " + std::to_string(row) + ": non-finite value in column " +
                              col_name);
    return value;
}

} // namespace

PoseSequence load_pose_sequence(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pose CSV: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    int fps = 0;
    if (std::sscanf(line.c_str(), "# fps=%d", &fps) != 1)
        throw ValidationError(path.string() + ": first line must be '# fps=<int>', got '" +
                              line + "'");
    if (fps <= 0) throw ValidationError(path.string() + ": fps must be positive");

    if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw ValidationError(path.string() + ": header must be '" + std::string(kHeader) +
                              "', got '" + line + "'");

    static const char* col_names[kColumns] = {"frame", "rx", "ry", "rz", "tx",
                                              "ty",    "tz", "gx", "gy"};
    std::vector<float> data;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != kColumns)
            throw ValidationError("row " + std::to_string(row) + ": expected " +
                                  std::to_string(kColumns) + " columns, got " +
                                  std::to_string(cells.size()));
        for (int c = 1; c < kColumns; ++c)
            data.push_back(parse_cell(cells[c], row, col_names[c]));
        ++row;
    }
    if (row < 2)
        throw ValidationError(path.string() + ": need at least 2 frames, got " +
                              std::to_string(row));

    PoseSequence seq;
    seq.fps = fps;
    seq.values = Eigen::Map<const MatF>(data.data(), row, PoseFrame::kDim);
    return seq;
}

void save_pose_sequence(const PoseSequence& seq, const std::filesystem::path& path) {
    if (seq.length() < 2)
        throw ValidationError("refusing to save a pose sequence with fewer than 2 frames");
    if (seq.dim() != PoseFrame::kDim)
        throw ValidationError("pose CSV writer expects D=" + std::to_string(PoseFrame::kDim) +
                              ", got " + std::to_string(seq.dim()));
    if (seq.fps <= 0) throw ValidationError("fps must be positive");
    for (int i = 0; i < seq.length(); ++i)
        for (int j = 0; j < seq.dim(); ++j)
            if (!std::isfinite(seq.values(i, j)))
                throw ValidationError("refusing to save non-finite value at row " +
                                      std::to_string(i));

    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "# fps=" << seq.fps << "\n" << kHeader << "\n";
    char buf[64];
    for (int i = 0; i < seq.length(); ++i) {
        out << i;
        for (int j = 0; j < seq.dim(); ++j) {
            // 9 significant digits: exact round-trip for 32-bit floats.
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(seq.values(i, j)));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace posegen
