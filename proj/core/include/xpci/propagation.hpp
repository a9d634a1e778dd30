#pragma once

#include "xpci/field.hpp"
#include "xpci/grid.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Controls one free-space propagation step.
struct PropagationPlan {
  double distance = 0.0;  // meters, signed (negative back-propagates)
  int pad_factor = 2;     // 1, 2 or 4; frame is zero-padded then cropped
  bool apodize = false;   // raised-cosine taper over the outer 8% before FFT
};

void validate(const PropagationPlan& plan);

// Point source at distance z1 upstream of the object, detector z2 downstream.
struct ConeBeamGeometry {
  double z1 = 0.0;  // source-to-object, > 0
  double z2 = 0.0;  // object-to-detector, >= 0

  double magnification() const { return (z1 + z2) / z1; }
};

void validate(const ConeBeamGeometry& geom);

// Paraxial free-space diffraction over plan.distance: multiplies the field
// spectrum by exp(i k d) * exp(-i d (kx^2 + ky^2) / (2k)). Unitary for
// pad_factor 1 without apodization; emits warning "fresnel.sampling" when
// |d| exceeds nx*dx^2/lambda (or the y analogue) and the chirp is aliased.
ComplexField fresnel_propagate(const ComplexField& field, const PropagationPlan& plan,
                               WarningLog* log = nullptr);

// N_F = M a^2 / (lambda z) for feature size a. The near-field/holographic
// crossover is conventionally drawn at N_F = 10.
double fresnel_number(double feature_size, double wavelength, double distance,
                      double magnification = 1.0);

// Cone-beam image via the scaling substitution: propagates the exit field by
// the effective distance z2/M, takes the intensity, and returns it on a grid
// stretched by M with values divided by M^2. z2 = 0 returns the contact
// intensity on the original grid.
RealField spherical_wave_image(const ComplexField& exit_field, const ConeBeamGeometry& geom,
                               int pad_factor = 2, bool apodize = false,
                               WarningLog* log = nullptr);

}  // namespace xpci
