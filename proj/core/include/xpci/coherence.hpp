#pragma once

#include <vector>

#include "xpci/field.hpp"
#include "xpci/lsi.hpp"
#include "xpci/propagation.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Statistical ensemble {psi_j, c_j} describing a partially coherent beam at
// one wavelength: all members share a grid and wavelength; the statistical
// weights lie in [0,1] and sum to 1 (within 1e-12).
struct Ensemble {
  std::vector<ComplexField> members;
  std::vector<double> weights;
};

void validate(const Ensemble& ens);

// One pixel pair (r1, r2) given as pixel indices.
struct PointPair {
  int x1, y1, x2, y2;
};

// W(r1, r2) = sum_j c_j conj(psi_j(r1)) psi_j(r2).
std::vector<complexd> cross_spectral_density(const Ensemble& ens,
                                             const std::vector<PointPair>& pairs);

// Full (r1, r2) table, row-major in (y2, x2, y1, x1) with r1 fastest:
// W[((y2*nx + x2)*ny + y1)*nx + x1]. Gated to grids of at most 32x32; the
// full 4D table is quadratic in pixel count and anything larger is a bug.
std::vector<complexd> cross_spectral_density_dense(const Ensemble& ens);

// Diagonal of W: S(r) = sum_j c_j |psi_j(r)|^2. Deterministic reduction in
// ascending member order.
RealField spectral_density(const Ensemble& ens);

// One spectral density per frequency sample, strictly increasing omega.
struct SpectralStack {
  std::vector<double> omegas;      // rad/s
  std::vector<RealField> densities;
};

void validate(const SpectralStack& stack);

// Detected intensity integral(S_omega * response(omega) d omega) by the
// trapezoid rule over the stack's (possibly non-uniform) omega samples; a
// single-entry stack uses weight 1.
RealField detected_intensity(const SpectralStack& stack, const std::vector<double>& response);

// Pushes every member through the same cascade; weights are untouched
// (linear optics preserves the statistical mixture). Members run in
// parallel, capped by XPCI_THREADS, with results independent of schedule.
Ensemble propagate_ensemble(const Ensemble& ens, const std::vector<CascadeStage>& stages,
                            WarningLog* log = nullptr);

enum class BlurProfile { Disk, Gaussian };

// Incoherent source blur of an image in a cone-beam geometry: convolution
// (periodic, FFT) with the demagnified source profile of effective width
// D_eff = source_diameter * z2 / z1. Disk kernels use D_eff as diameter,
// Gaussian kernels as FWHM; both are unit-sum. z2 = 0 is the identity.
RealField source_blur(const RealField& image, double source_diameter,
                      const ConeBeamGeometry& geom, BlurProfile profile = BlurProfile::Disk,
                      WarningLog* log = nullptr);

// Multiplies a transfer function by the Gaussian coherence envelope
// exp(-(kx^2+ky^2)/(2 k_c^2)). Infinite k_c returns the input unchanged.
TransferFunction coherence_envelope(const TransferFunction& tf, double k_c);

}  // namespace xpci
