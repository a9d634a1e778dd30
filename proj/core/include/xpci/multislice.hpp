#pragma once

#include "xpci/field.hpp"
#include "xpci/sample.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Operator ordering within each slice. ProjectThenPropagate applies the
// slice transmission first and then diffracts over the slice thickness;
// PropagateThenProject does the reverse. Both apply nz transmissions and nz
// propagation steps; they converge to each other as slices thin.
enum class SliceScheme { ProjectThenPropagate, PropagateThenProject };

struct MultisliceOptions {
  SliceScheme scheme = SliceScheme::ProjectThenPropagate;
  // Each voxel slice is applied as `subdivision` equal sub-slices of
  // thickness dz/subdivision (exact for slice-constant volumes).
  int subdivision = 1;
  int pad_factor = 1;
  bool apodize = false;
};

// Per-slice transmission functions T_j = exp(-i k (delta_j - i beta_j) dz)
// on the volume's transverse grid. Their product is the projection
// approximation transmission of the whole volume.
std::vector<ComplexField> slice_transmissions(const RefractiveVolume& vol, double wavelength,
                                              WarningLog* log = nullptr);

// Beam propagation through a voxelized volume: per computational slice the
// transmission exp(-i k (delta - i beta) dz_sub) and a Fresnel step over
// dz_sub, in the order the scheme dictates. The frame is padded once and all
// slices run inside the padded frame.
ComplexField multislice_propagate(const ComplexField& entrance, const RefractiveVolume& vol,
                                  const MultisliceOptions& opts = {},
                                  WarningLog* log = nullptr);

// Doubles the subdivision until the exit field RMS change drops below
// rms_tol (relative to the RMS of the finer field), starting at 1. Returns
// the converged exit field; reports the subdivision used via out_subdivision
// and warns ("multislice.no_convergence") if max_subdivision is hit first.
ComplexField multislice_auto(const ComplexField& entrance, const RefractiveVolume& vol,
                             MultisliceOptions opts = {}, double rms_tol = 1e-3,
                             int max_subdivision = 64, int* out_subdivision = nullptr,
                             WarningLog* log = nullptr);

}  // namespace xpci
