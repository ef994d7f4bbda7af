#pragma once

#include <string>

#include "gt2/image.hpp"

namespace gt2 {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 8-bit PNG. Values are clamped to [0,1] and quantized with round(v*255).
// The encoder emits stored (uncompressed) deflate blocks so output bytes
// depend only on pixel content, never on the zlib build.
void write_png(const std::string& path, const Image& img);

// Decodes 8/16-bit gray/rgb/rgba PNG into an RGB Image with values in [0,1].
Image read_png(const std::string& path);

// Lossless float grid: 16-byte header (magic "GT2F", uint32 height, width,
// channels, little-endian) followed by row-major float32 samples.
void write_float_grid(const std::string& path, const Image& img);
Image read_float_grid(const std::string& path);

// Reads either format, keyed on extension (.png vs anything else).
Image read_image(const std::string& path);

// Maps a 1-channel grid through a blue->white->red ramp for inspection.
Image heatmap(const Image& scalar_map);

}  // namespace gt2
