#include "qnas/pgm.hpp"

#include <cmath>
#include <fstream>

#include "qnas/errors.hpp"

namespace qnas {

std::vector<std::uint8_t> encode_pgm(std::span<const double> pixels, int width, int height) {
    if (static_cast<std::size_t>(width) * static_cast<std::size_t>(height) != pixels.size())
        throw ContractError("encode_pgm: dimensions do not match the pixel count");
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + pixels.size());
    for (double v : pixels) {
        const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        out.push_back(static_cast<std::uint8_t>(std::nearbyint(clamped * 255.0)));
    }
    return out;
}

void write_pgm(const std::string& path, std::span<const double> pixels, int width, int height) {
    const auto bytes = encode_pgm(pixels, width, height);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("write_pgm: cannot open \"" + path + "\"");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace qnas
