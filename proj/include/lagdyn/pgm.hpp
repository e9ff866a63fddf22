#pragma once

#include <string>

#include "lagdyn/tensor.hpp"

namespace lagdyn::io {

/// Write a (H, W) intensity image in [0, 1] as a binary portable graymap
/// (P5, maxval 255).
void write_pgm(const std::string& path, const Tensor& image);

/// Read a binary P5 graymap back into intensities in [0, 1].
Tensor read_pgm(const std::string& path);

} // namespace lagdyn::io
