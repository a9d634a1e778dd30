#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include "xpci/grid.hpp"

namespace xpci {

using complexd = std::complex<double>;

// Real-valued scalar map on a grid (intensity, phase, thickness, ...).
struct RealField {
  Grid2D grid;
  std::vector<double> v;

  RealField() = default;
  explicit RealField(const Grid2D& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

  double& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }
  double at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }
};

// Scalar complex disturbance of a monochromatic paraxial beam, sampled on a
// grid, with the vacuum wavelength it was computed for.
struct ComplexField {
  Grid2D grid;
  std::vector<complexd> v;
  double wavelength = 0.0;  // meters, > 0

  ComplexField() = default;
  ComplexField(const Grid2D& g, double lambda, complexd fill = {0.0, 0.0})
      : grid(g), v(g.size(), fill), wavelength(lambda) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("ComplexField: wavelength must be positive");
  }

  double wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

  complexd& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }
  complexd at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * grid.nx + ix]; }
};

// Two-component vector map (deflection angles, transverse energy flux).
struct VectorField2D {
  Grid2D grid;
  std::vector<double> x, y;

  VectorField2D() = default;
  explicit VectorField2D(const Grid2D& g) : grid(g), x(g.size(), 0.0), y(g.size(), 0.0) {}
};

// Throws std::invalid_argument if any sample is NaN or infinite.
void require_finite(const RealField& f, const char* what);
void require_finite(const ComplexField& f, const char* what);

struct IntensityPhase {
  RealField intensity;
  RealField phase;
};

// Splits psi into intensity |psi|^2 and principal-value phase arg(psi) in
// (-pi, pi]. Pixels with zero amplitude get phase 0.
IntensityPhase intensity_and_phase(const ComplexField& field);

// Transverse energy-flux direction map: S = I * grad(phase), with the phase
// gradient taken branch-cut free from neighbouring-sample phase differences
// arg(psi[i+1] * conj(psi[i-1])) / (2 dx) (periodic wrap at the frame edge).
// Pixels with zero amplitude carry zero flux. Proportionality constant is 1.
VectorField2D transverse_poynting(const ComplexField& field);

}  // namespace xpci
