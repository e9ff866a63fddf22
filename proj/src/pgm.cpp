#include "lagdyn/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "lagdyn/errors.hpp"

namespace lagdyn::io {

void write_pgm(const std::string& path, const Tensor& image) {
    if (image.ndim() != 2) throw UsageError("write_pgm expects an (H, W) image");
    const int h = image.dim(0), w = image.dim(1);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << "P5\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(w));
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double v = std::clamp(image.at(r, c), 0.0, 1.0);
            row[static_cast<size_t>(c)] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        os.write(reinterpret_cast<const char*>(row.data()), w);
    }
    if (!os) throw DataError("write to '" + path + "' failed");
}

namespace {

int read_pgm_int(std::istream& is) {
    // skip whitespace and '#' comments
    int c = is.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = is.get();
        c = is.get();
    }
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = is.get();
    }
    if (!any) throw DataError("malformed PGM header");
    return value;
}

} // namespace

Tensor read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "'");
    char p, five;
    is.get(p);
    is.get(five);
    if (p != 'P' || five != '5') throw DataError("'" + path + "' is not a binary PGM");
    const int w = read_pgm_int(is);
    const int h = read_pgm_int(is);
    const int maxval = read_pgm_int(is);
    if (w < 1 || h < 1 || maxval != 255) throw DataError("unsupported PGM geometry");
    std::vector<unsigned char> bytes(static_cast<size_t>(w) * h);
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!is) throw DataError("PGM pixel data truncated");
    Tensor img({h, w});
    for (int64_t i = 0; i < img.size(); ++i)
        img[i] = static_cast<double>(bytes[static_cast<size_t>(i)]) / 255.0;
    return img;
}

} // namespace lagdyn::io
