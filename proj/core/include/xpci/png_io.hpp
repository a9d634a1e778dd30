#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xpci/field.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Minimal 16-bit grayscale PNG codec (one IDAT, filter 0, zlib backend).
struct Png16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;  // row major, row 0 on top

  std::uint16_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

void write_png16(const std::string& path, const Png16& image);
Png16 read_png16(const std::string& path);

enum class PngNorm { MinMax, Fixed, Log };

struct ExportInfo {
  double lo = 0.0;  // value mapped to 0
  double hi = 0.0;  // value mapped to 65535
  PngNorm norm = PngNorm::MinMax;
};

// Quantizes a real map to 16-bit grayscale. MinMax spans the data range
// (flat images become mid gray with warning "export.flat"); Fixed clamps to
// [lo, hi]; Log spans the decades of positive values (<= 0 maps to 0). The
// quantization step is (hi - lo)/65535.
ExportInfo export_png(const std::string& path, const RealField& field, PngNorm norm,
                      double lo = 0.0, double hi = 0.0, WarningLog* log = nullptr);

}  // namespace xpci
