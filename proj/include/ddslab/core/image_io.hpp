#pragma once

#include <string>
#include <vector>

#include "ddslab/core/tensor.hpp"

namespace ddslab {

// Pixel mapping for export: u8 = round((x + 1) * 127.5), clamped to [0, 255].
// Import inverts with x = u8 / 127.5 - 1, so a round trip of in-range pixels
// is accurate to 1/255 per channel.
void write_png(const std::string& path, const Tensor& img);
Tensor read_png(const std::string& path);

// Grayscale heatmap of a single-channel map already scaled to [0, 1].
void write_png_gray(const std::string& path, const Tensor& map);

// Horizontal strip of equally sized images with a 1px separator column.
void write_png_grid(const std::string& path, const std::vector<Tensor>& imgs, int per_row = 0);

}  // namespace ddslab
