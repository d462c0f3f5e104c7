#include "posegen/image_io.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "posegen/errors.hpp"

namespace posegen::flow {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
    return tok;
}

} // namespace

ImageGrid load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path.string());
    const std::string magic = next_token(in);
    int channels = 0;
    if (magic == "P5") channels = 1;
    else if (magic == "P6") channels = 3;
    else throw ValidationError(path.string() + ": expected P5/P6 magic, got '" + magic + "'");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token(in));
        h = std::stoi(next_token(in));
        maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw ValidationError(path.string() + ": malformed PNM header");
    }
    if (w <= 0 || h <= 0) throw ValidationError(path.string() + ": bad image dimensions");
    if (maxval != 255) throw ValidationError(path.string() + ": only 8-bit images supported");

    std::vector<unsigned char> buf(static_cast<size_t>(w) * h * channels);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw ValidationError(path.string() + ": truncated pixel data");

    ImageGrid img = ImageGrid::zero(h, w, channels);
    size_t i = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c) img.channels[c](y, x) = buf[i++] / 255.0;
    return img;
}

void save_image(const ImageGrid& img, const std::filesystem::path& path) {
    const int c = img.channel_count();
    if (c != 1 && c != 3)
        throw ValidationError("save_image: only 1- or 3-channel images supported");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path.string());
    out << (c == 1 ? "P5" : "P6") << "\n"
        << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> buf;
    buf.reserve(static_cast<size_t>(img.width()) * img.height() * c);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int ch = 0; ch < c; ++ch) {
                const double v = std::min(std::max(img.channels[ch](y, x), 0.0), 1.0);
                buf.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
            }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace posegen::flow
