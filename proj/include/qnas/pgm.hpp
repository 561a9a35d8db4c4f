#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qnas {

// Binary PGM (P5, maxval 255); pixel byte = round(value * 255) with IEEE
// round-half-to-even ties (0.5 * 255 = 127.5 quantizes to 128).
std::vector<std::uint8_t> encode_pgm(std::span<const double> pixels, int width, int height);

void write_pgm(const std::string& path, std::span<const double> pixels, int width, int height);

}  // namespace qnas
