#pragma once

#include <cstdint>
#include <vector>

#include "xpci/field.hpp"
#include "xpci/grid.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Voxelized weak refractive object: n = 1 - delta + i*beta per voxel.
// Slice-major storage: value(ix, iy, iz) = data[(iz*ny + iy)*nx + ix].
struct RefractiveVolume {
  int nx = 0, ny = 0, nz = 0;
  double dx = 0.0, dy = 0.0, dz = 0.0;  // meters
  std::vector<float> delta;
  std::vector<float> beta;

  std::size_t slice_size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t size() const { return slice_size() * nz; }
  double thickness() const { return nz * dz; }
  Grid2D transverse_grid() const { return Grid2D(nx, ny, dx, dy); }

  float delta_at(int ix, int iy, int iz) const {
    return delta[(static_cast<std::size_t>(iz) * ny + iy) * nx + ix];
  }
  float beta_at(int ix, int iy, int iz) const {
    return beta[(static_cast<std::size_t>(iz) * ny + iy) * nx + ix];
  }
};

// Validates shape/extents and warns ("volume.weak_index") when any |delta|
// or |beta| reaches 1e-2, where the weak-refraction treatment degrades.
void validate(const RefractiveVolume& vol, WarningLog* log = nullptr);

// Line integrals through an object along the beam: the accumulated phase
// shift -k * integral(delta dz) and attenuation exponent integral(mu dz)
// with mu = 2 k beta; both at a fixed wavelength.
struct ProjectedObject {
  Grid2D grid;
  double wavelength = 0.0;
  std::vector<double> phase_shift;            // radians, Delta phi = -k int delta dz
  std::vector<double> attenuation_integral;   // dimensionless, int mu dz >= 0
};

void validate(const ProjectedObject& obj);

// Projects a volume along z with the midpoint rule (each voxel slice
// contributes value * dz). Streams slice by slice.
ProjectedObject project_volume(const RefractiveVolume& vol, double wavelength,
                               WarningLog* log = nullptr);

// T(x,y) = exp(-att/2) * exp(i phase) as a unit-illumination complex field.
ComplexField transmission_function(const ProjectedObject& obj);

// Multiplies an illumination field by the object's transmission function
// (projection approximation). Wavelengths and grids must match.
ComplexField apply_transmission(const ComplexField& illumination, const ProjectedObject& obj);

// Analytic projected sphere (chord length 2*sqrt(R^2 - r^2)) of uniform
// delta/beta, centred on the grid origin. Warns ("phantom.truncated") when
// the sphere does not fit inside the frame.
ProjectedObject sphere_phantom(const Grid2D& grid, double radius, double delta, double beta,
                               double wavelength, WarningLog* log = nullptr);

// Projected thickness map of the same sphere (chord length), for oracles and
// thickness-retrieval comparisons.
RealField sphere_thickness(const Grid2D& grid, double radius);

}  // namespace xpci
