#pragma once

#include <string>

#include "latentshield/tensor.hpp"

namespace latentshield {

/// Reads an 8-bit RGB or RGBA PNG into [0,1] floats. Alpha is dropped
/// with a warning on stderr; grayscale and palette images are expanded
/// to RGB. 16-bit files are rejected.
ImageTensor load_png(const std::string& path);

/// Writes an 8-bit RGB PNG; values quantize by round(v * 255) (half away
/// from zero) clamped to [0, 255]. The file is written to a temporary
/// name and renamed into place.
void save_png(const std::string& path, const ImageTensor& image);

}  // namespace latentshield
