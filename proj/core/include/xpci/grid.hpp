#pragma once

#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace xpci {

// Uniform 2D sampling lattice. Pixel (0,0) sits at the physical corner
// (-nx*dx/2, -ny*dy/2); for even nx the column nx/2 passes through x = 0.
// The frequency lattice follows the standard DFT layout: kx(m) spans
// [-pi/dx, pi/dx) in fft order (non-negative frequencies first).
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;  // meters
  double dy = 0.0;  // meters

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double dx_, double dy_) : nx(nx_), ny(ny_), dx(dx_), dy(dy_) {
    if (nx < 2 || ny < 2)
      throw std::invalid_argument("Grid2D: nx and ny must be >= 2, got " +
                                  std::to_string(nx) + "x" + std::to_string(ny));
    if (!(dx > 0.0) || !(dy > 0.0))
      throw std::invalid_argument("Grid2D: pixel pitch must be positive");
  }

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

  double x(int i) const { return (i - 0.5 * nx) * dx; }
  double y(int j) const { return (j - 0.5 * ny) * dy; }

  // Signed DFT frequency index: 0, 1, ..., n/2-1, -n/2, ..., -1.
  static int freq_index(int m, int n) { return (m < (n + 1) / 2) ? m : m - n; }

  // Angular spatial frequencies, rad/m, in fft order.
  double kx(int m) const {
    return 2.0 * std::numbers::pi * freq_index(m, nx) / (nx * dx);
  }
  double ky(int n) const {
    return 2.0 * std::numbers::pi * freq_index(n, ny) / (ny * dy);
  }

  double kx_nyquist() const { return std::numbers::pi / dx; }
  double ky_nyquist() const { return std::numbers::pi / dy; }

  bool operator==(const Grid2D&) const = default;
};

inline void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b))
    throw std::invalid_argument(std::string(what) + ": grids do not match");
}

}  // namespace xpci
