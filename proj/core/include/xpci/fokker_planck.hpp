#pragma once

#include <vector>

#include "xpci/field.hpp"
#include "xpci/grid.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Local diffusion model for diffusive (dark-field) transport. Three
// variants:
//  - Isotropic: scalar D(x,y) >= 0, term Delta^2 D lap(I).
//  - Tensor: per-pixel PSD matrix [[Dxx, Dxy], [Dxy, Dyy]], term
//    Delta^2 (Dxx Ixx + Dyy Iyy + 2 Dxy Ixy).
//  - Kernel: scattered fraction F(x,y) in [0,1) plus a nonnegative unit-sum
//    redistribution stencil (shared or per pixel), term
//    sum_x' F(x') K_x'(x - x') I(x') - F(x) I(x), which conserves the total
//    intensity for any F.
struct DiffusionMap {
  enum class Kind { Isotropic, Tensor, Kernel };
  Kind kind = Kind::Isotropic;

  RealField d;              // isotropic
  RealField dxx, dyy, dxy;  // tensor

  RealField fraction;       // kernel: F(x,y)
  int stencil_size = 0;     // odd edge length
  bool shared_stencil = true;
  // shared: stencil_size^2 values; per pixel: grid.size()*stencil_size^2,
  // stencil of pixel (ix,iy) at offset (iy*nx+ix)*stencil_size^2.
  std::vector<double> stencils;
};

DiffusionMap diffusion_isotropic(RealField d);
DiffusionMap diffusion_tensor(RealField dxx, RealField dyy, RealField dxy);
DiffusionMap diffusion_kernel(RealField fraction, int stencil_size,
                              std::vector<double> stencils, bool shared = true);

void validate(const DiffusionMap& map);

// One explicit transport-of-intensity step:
//   I(z + dz) = I - (dz / k) div(I grad phi),
// with spectral (periodic) derivatives. Negative output pixels are clamped
// to zero with warning "tie.negative_clamped".
RealField tie_step(const RealField& intensity, const RealField& phase, double dz,
                   double wavelength, WarningLog* log = nullptr);

// Diffusive one-step evolution: the tie_step drift plus the diffusion term
// of the map (Delta^2-weighted). Same clamping rule, warning
// "fp.negative_clamped".
RealField fp_step(const RealField& intensity, const RealField& phase, const DiffusionMap& map,
                  double delta_z, double wavelength, WarningLog* log = nullptr);

// Effective diffusion coefficient D = F theta^2 of a scattering fraction
// and a local RMS deflection angle (radians); dimensionless.
RealField diffusion_coefficient(const RealField& fraction, const RealField& theta);

// Position-dependent diffusive blur width L = theta * delta_z, meters.
RealField blur_width(const RealField& theta, double delta_z);

// Transverse deflection-angle map theta = grad(phi)/k, in radians. Centered
// finite differences, one-sided at the frame edges (exact for linear and,
// away from the edges, quadratic phase maps).
VectorField2D deflection_angles(const RealField& phase, double wavelength);

}  // namespace xpci
