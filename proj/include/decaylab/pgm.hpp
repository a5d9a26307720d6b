#pragma once

#include <filesystem>

#include "decaylab/geom.hpp"

namespace decaylab {

/// Quantises to 8 bits as round(v * 255) after clamping to [0, 1].
void write_pgm(const Frame& f, const std::filesystem::path& path);

/// Reads binary P5 with maxval <= 255. Pixel k/maxval becomes k/maxval as float;
/// for maxval 255 this inverts write_pgm exactly on 8-bit-quantised frames.
Frame read_pgm(const std::filesystem::path& path);

/// Snap every pixel to the nearest k/255 level, so the frame survives a PGM round trip.
void quantize_8bit(Frame& f);

}  // namespace decaylab
