#include "posegen/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "posegen/errors.hpp"

namespace posegen {

namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor container assumes a little-endian host");

using nlohmann::json;

json load_sidecar(const std::filesystem::path& data_path) {
    std::filesystem::path side = data_path;
    side.replace_extension(".json");
    std::ifstream in(side);
    if (!in) throw IoError("missing tensor sidecar: " + side.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(side.string() + ": bad sidecar JSON: " + e.what());
    }
    if (!j.contains("dtype") || !j.contains("shape"))
        throw ValidationError(side.string() + ": sidecar needs 'dtype' and 'shape'");
    return j;
}

std::vector<long> sidecar_shape(const json& j, const std::filesystem::path& data_path) {
    std::vector<long> shape;
    for (const auto& v : j.at("shape")) {
        if (!v.is_number_integer() || v.get<long>() <= 0)
            throw ValidationError(data_path.string() + ": shape entries must be positive");
        shape.push_back(v.get<long>());
    }
    if (shape.empty() || shape.size() > 2)
        throw ValidationError(data_path.string() + ": only rank-1 or rank-2 tensors supported");
    return shape;
}

template <typename Scalar>
void read_payload(const std::filesystem::path& data_path, Scalar* dst, long count) {
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw IoError("cannot open tensor payload: " + data_path.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<long long>(in.tellg());
    const auto want = static_cast<long long>(count) * static_cast<long long>(sizeof(Scalar));
    if (bytes != want)
        throw ValidationError(data_path.string() + ": payload is " + std::to_string(bytes) +
                              " bytes, sidecar shape needs " + std::to_string(want));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(dst), want);
    if (!in) throw IoError("read failed: " + data_path.string());
}

void write_sidecar(const std::filesystem::path& data_path, const char* dtype,
                   const std::vector<long>& shape) {
    std::filesystem::path side = data_path;
    side.replace_extension(".json");
    json j;
    j["dtype"] = dtype;
    j["shape"] = shape;
    std::ofstream out(side);
    if (!out) throw IoError("cannot write tensor sidecar: " + side.string());
    out << j.dump() << "\n";
}

template <typename Mat>
void write_payload(const Mat& m, const std::filesystem::path& data_path) {
    std::ofstream out(data_path, std::ios::binary);
    if (!out) throw IoError("cannot write tensor payload: " + data_path.string());
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(typename Mat::Scalar)));
    if (!out) throw IoError("write failed: " + data_path.string());
}

} // namespace

MatF load_tensor(const std::filesystem::path& data_path) {
    const json side = load_sidecar(data_path);
    const std::string dtype = side.at("dtype").get<std::string>();
    if (dtype != "f32")
        throw ValidationError(data_path.string() + ": unsupported dtype '" + dtype +
                              "' (expected f32)");
    const auto shape = sidecar_shape(side, data_path);
    const long rows = shape.size() == 2 ? shape[0] : 1;
    const long cols = shape.size() == 2 ? shape[1] : shape[0];
    MatF m(rows, cols);
    read_payload(data_path, m.data(), rows * cols);
    for (long i = 0; i < m.size(); ++i)
        if (!std::isfinite(m.data()[i]))
            throw ValidationError(data_path.string() + ": non-finite value at flat index " +
                                  std::to_string(i));
    return m;
}

void save_tensor(const MatF& m, const std::filesystem::path& data_path) {
    save_tensor(m, data_path, {static_cast<long>(m.rows()), static_cast<long>(m.cols())});
}

void save_tensor(const MatF& m, const std::filesystem::path& data_path,
                 const std::vector<long>& shape) {
    if (data_path.extension() != ".f32")
        throw ValidationError("f32 tensor path must end in .f32: " + data_path.string());
    long count = 1;
    for (long s : shape) count *= s;
    if (count != m.size())
        throw ValidationError("shape/element count mismatch writing " + data_path.string());
    write_payload(m, data_path);
    write_sidecar(data_path, "f32", shape);
}

MatD load_tensor_f64(const std::filesystem::path& data_path) {
    const json side = load_sidecar(data_path);
    const std::string dtype = side.at("dtype").get<std::string>();
    if (dtype != "f64")
        throw ValidationError(data_path.string() + ": unsupported dtype '" + dtype +
                              "' (expected f64)");
    const auto shape = sidecar_shape(side, data_path);
    const long rows = shape.size() == 2 ? shape[0] : 1;
    const long cols = shape.size() == 2 ? shape[1] : shape[0];
    MatD m(rows, cols);
    read_payload(data_path, m.data(), rows * cols);
    return m;
}

void save_tensor_f64(const MatD& m, const std::filesystem::path& data_path) {
    if (data_path.extension() != ".f64")
        throw ValidationError("f64 tensor path must end in .f64: " + data_path.string());
    write_payload(m, data_path);
    write_sidecar(data_path, "f64",
                  {static_cast<long>(m.rows()), static_cast<long>(m.cols())});
}

} // namespace posegen
