#include "xpci/field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xpci {

void require_finite(const RealField& f, const char* what) {
  if (f.v.size() != f.grid.size())
    throw std::invalid_argument(std::string(what) + ": sample count does not match grid");
  for (double x : f.v)
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string(what) + ": non-finite sample");
}

void require_finite(const ComplexField& f, const char* what) {
  if (f.v.size() != f.grid.size())
    throw std::invalid_argument(std::string(what) + ": sample count does not match grid");
  if (!(f.wavelength > 0.0))
    throw std::invalid_argument(std::string(what) + ": wavelength must be positive");
  for (const complexd& c : f.v)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument(std::string(what) + ": non-finite sample");
}

IntensityPhase intensity_and_phase(const ComplexField& field) {
  require_finite(field, "intensity_and_phase");
  IntensityPhase out{RealField(field.grid), RealField(field.grid)};
  for (std::size_t i = 0; i < field.v.size(); ++i) {
    const complexd c = field.v[i];
    out.intensity.v[i] = std::norm(c);
    out.phase.v[i] = (c == complexd{0.0, 0.0}) ? 0.0 : std::arg(c);
  }
  return out;
}

VectorField2D transverse_poynting(const ComplexField& field) {
  require_finite(field, "transverse_poynting");
  const int nx = field.grid.nx, ny = field.grid.ny;
  VectorField2D s(field.grid);
  auto idx = [nx](int ix, int iy) { return static_cast<std::size_t>(iy) * nx + ix; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const complexd c = field.v[idx(ix, iy)];
      const double intensity = std::norm(c);
      if (intensity == 0.0) continue;
      // Phase differences between wrapped neighbours; arg of the product is
      // immune to 2pi branch cuts as long as the per-2dx phase step is < pi.
      const complexd px = field.v[idx((ix + 1) % nx, iy)] *
                          std::conj(field.v[idx((ix + nx - 1) % nx, iy)]);
      const complexd py = field.v[idx(ix, (iy + 1) % ny)] *
                          std::conj(field.v[idx(ix, (iy + ny - 1) % ny)]);
      const double gx = (px == complexd{0.0, 0.0}) ? 0.0 : std::arg(px) / (2.0 * field.grid.dx);
      const double gy = (py == complexd{0.0, 0.0}) ? 0.0 : std::arg(py) / (2.0 * field.grid.dy);
      s.x[idx(ix, iy)] = intensity * gx;
      s.y[idx(ix, iy)] = intensity * gy;
    }
  }
  return s;
}

}  // namespace xpci
