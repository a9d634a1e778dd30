#include "xpci/sample.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xpci {

void validate(const RefractiveVolume& vol, WarningLog* log) {
  if (vol.nx < 2 || vol.ny < 2)
    throw std::invalid_argument("RefractiveVolume: nx and ny must be >= 2");
  if (vol.nz < 1)
    throw std::invalid_argument("RefractiveVolume: nz must be >= 1");
  if (!(vol.dx > 0.0) || !(vol.dy > 0.0) || !(vol.dz > 0.0))
    throw std::invalid_argument("RefractiveVolume: voxel pitch must be positive");
  if (vol.delta.size() != vol.size() || vol.beta.size() != vol.size())
    throw std::invalid_argument("RefractiveVolume: voxel count does not match shape");

  float worst = 0.0f;
  for (float d : vol.delta) {
    if (!std::isfinite(d)) throw std::invalid_argument("RefractiveVolume: non-finite delta");
    worst = std::max(worst, std::abs(d));
  }
  for (float b : vol.beta) {
    if (!std::isfinite(b)) throw std::invalid_argument("RefractiveVolume: non-finite beta");
    worst = std::max(worst, std::abs(b));
  }
  if (worst >= 1e-2f)
    warn(log, "volume.weak_index",
         "|delta| or |beta| reaches 1e-2; weak-refraction approximations degrade",
         {{"max_abs", worst}});
}

void validate(const ProjectedObject& obj) {
  if (!(obj.wavelength > 0.0))
    throw std::invalid_argument("ProjectedObject: wavelength must be positive");
  if (obj.phase_shift.size() != obj.grid.size() ||
      obj.attenuation_integral.size() != obj.grid.size())
    throw std::invalid_argument("ProjectedObject: sample count does not match grid");
  for (double p : obj.phase_shift)
    if (!std::isfinite(p)) throw std::invalid_argument("ProjectedObject: non-finite phase");
  for (double a : obj.attenuation_integral) {
    if (!std::isfinite(a)) throw std::invalid_argument("ProjectedObject: non-finite attenuation");
    if (a < 0.0)
      throw std::invalid_argument(
          "ProjectedObject: attenuation integral must be >= 0 (gain is unphysical)");
  }
}

ProjectedObject project_volume(const RefractiveVolume& vol, double wavelength,
                               WarningLog* log) {
  validate(vol, log);
  if (!(wavelength > 0.0))
    throw std::invalid_argument("project_volume: wavelength must be positive");

  ProjectedObject obj;
  obj.grid = vol.transverse_grid();
  obj.wavelength = wavelength;
  obj.phase_shift.assign(obj.grid.size(), 0.0);
  obj.attenuation_integral.assign(obj.grid.size(), 0.0);

  const double k = 2.0 * std::numbers::pi / wavelength;
  // Midpoint rule: voxel values are slice-constant, so each slice adds
  // value * dz. Accumulate per slice; never materializes per-slice fields.
  for (int iz = 0; iz < vol.nz; ++iz) {
    const std::size_t base = static_cast<std::size_t>(iz) * vol.slice_size();
    for (std::size_t i = 0; i < vol.slice_size(); ++i) {
      obj.phase_shift[i] -= k * static_cast<double>(vol.delta[base + i]) * vol.dz;
      obj.attenuation_integral[i] +=
          2.0 * k * static_cast<double>(vol.beta[base + i]) * vol.dz;
    }
  }
  validate(obj);
  return obj;
}

ComplexField transmission_function(const ProjectedObject& obj) {
  validate(obj);
  ComplexField t(obj.grid, obj.wavelength);
  for (std::size_t i = 0; i < t.v.size(); ++i) {
    const double amp = std::exp(-0.5 * obj.attenuation_integral[i]);
    t.v[i] = std::polar(amp, obj.phase_shift[i]);
  }
  return t;
}

ComplexField apply_transmission(const ComplexField& illumination, const ProjectedObject& obj) {
  require_finite(illumination, "apply_transmission");
  validate(obj);
  require_same_grid(illumination.grid, obj.grid, "apply_transmission");
  if (illumination.wavelength != obj.wavelength)
    throw std::invalid_argument("apply_transmission: wavelength mismatch between field (" +
                                std::to_string(illumination.wavelength) + " m) and object (" +
                                std::to_string(obj.wavelength) + " m)");
  ComplexField out = illumination;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const double amp = std::exp(-0.5 * obj.attenuation_integral[i]);
    out.v[i] *= std::polar(amp, obj.phase_shift[i]);
  }
  return out;
}

RealField sphere_thickness(const Grid2D& grid, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere_thickness: radius must be > 0");
  RealField t(grid);
  for (int iy = 0; iy < grid.ny; ++iy) {
    const double y = grid.y(iy);
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double x = grid.x(ix);
      const double h2 = radius * radius - x * x - y * y;
      if (h2 > 0.0) t.at(ix, iy) = 2.0 * std::sqrt(h2);
    }
  }
  return t;
}

ProjectedObject sphere_phantom(const Grid2D& grid, double radius, double delta, double beta,
                               double wavelength, WarningLog* log) {
  if (!(wavelength > 0.0))
    throw std::invalid_argument("sphere_phantom: wavelength must be positive");
  if (!std::isfinite(delta) || !std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument("sphere_phantom: delta must be finite and beta >= 0");
  const double half_extent = 0.5 * std::min(grid.nx * grid.dx, grid.ny * grid.dy);
  if (radius > half_extent)
    warn(log, "phantom.truncated", "sphere radius exceeds half the grid extent",
         {{"radius_m", radius}, {"half_extent_m", half_extent}});

  const RealField thickness = sphere_thickness(grid, radius);
  const double k = 2.0 * std::numbers::pi / wavelength;
  ProjectedObject obj;
  obj.grid = grid;
  obj.wavelength = wavelength;
  obj.phase_shift.resize(grid.size());
  obj.attenuation_integral.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    obj.phase_shift[i] = -k * delta * thickness.v[i];
    obj.attenuation_integral[i] = 2.0 * k * beta * thickness.v[i];
  }
  validate(obj);
  return obj;
}

}  // namespace xpci
