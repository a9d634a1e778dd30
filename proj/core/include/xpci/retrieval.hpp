#pragma once

#include <complex>
#include <vector>

#include "xpci/field.hpp"
#include "xpci/lsi.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Tikhonov-style spectral regularizer: 1/T is replaced by
// conj(T)/(|T|^2 + value). Auto mode picks 1e-4 * max|T|^2 per call.
struct Regularizer {
  double value = 0.0;
  bool auto_mode = true;

  static Regularizer automatic() { return {0.0, true}; }
  static Regularizer fixed(double v) { return {v, false}; }

  double resolve(double max_t2) const;
};

// psi_in = IDFT[ conj(T)/(|T|^2 + reg) . DFT psi_out ]. reg = 0 demands a
// zero-free T; a zero is reported with its frequency index.
ComplexField invert_lsi_single(const ComplexField& output, const TransferFunction& tf,
                               Regularizer reg = Regularizer::automatic());

// Least-squares combination of several views of one input field:
// psi_in = IDFT[ sum_j conj(T_j) DFT psi_j / (sum_p |T_p|^2 + reg) ].
// Deterministic reduction in ascending j.
ComplexField schiske_combine(const std::vector<ComplexField>& outputs,
                             const std::vector<TransferFunction>& tfs,
                             Regularizer reg = Regularizer::automatic());

// Weak-phase retrieval from several defocused/aberrated intensity images:
// phi = IDFT[ sum_j conj(C_j) DFT(I_j - |Omega_j|^2) / (sum_p |C_p|^2 + reg) ]
// with C_j the contrast factor of tf_j. The zero-frequency component is not
// transferred (C(0) = 0); the result is mean free.
RealField ctf_retrieve(const std::vector<RealField>& images,
                       const std::vector<TransferFunction>& tfs,
                       Regularizer reg = Regularizer::automatic());

struct PaganinResult {
  RealField thickness;   // meters
  long long clamped = 0; // pixels floored before the log
};

// Single-material thickness retrieval from one near-field image:
//   T(x,y) = -(1/mu) ln( IDFT[ DFT(I/I0) / (1 + (delta d / mu) k^2) ] ),
// clamping the filtered intensity at 1e-12 * max before the log. delta = 0
// or d = 0 reduces to Beer-Lambert inversion. Warns "paganin.clamped" when
// more than 1% of pixels clamp.
PaganinResult paganin_thickness(const RealField& image, double i0, double delta, double mu,
                                double distance, WarningLog* log = nullptr);

// One-parameter linear transfer state T(kx) = 1 + tau kx of a differential
// (edge-illumination / analyzer style) system. tau is complex, in meters;
// validity needs |tau| k_Nyquist <= 1 (warned otherwise).
struct LinearTFState {
  complexd tau{0.0, 0.0};
};

// Row-wise differential-contrast forward model:
//   I_out/I_in = 1 + 2 Re(tau) dphi/dx + Im(tau) dlnI/dx
//              + |tau|^2 (dphi/dx)^2 + (|tau|^2/4) (dlnI/dx)^2,
// then an optional row-wise Gaussian PSF (standard deviation psf_width
// meters) smears I_out. x-derivatives are spectral per row after linear
// detrending (exact for phase ramps).
RealField gradient_forward(const RealField& i_in, const RealField& phase,
                           const LinearTFState& state, double wavelength, double psf_width,
                           WarningLog* log = nullptr);

struct DarkfieldResult {
  RealField dphi1_dx;          // slow phase gradient, rad/m
  RealField theta2;            // local ripple angular variance, rad^2
  long long negative_theta2 = 0;
};

struct DarkfieldMeasurement {
  RealField i_in;
  RealField i_out;  // PSF-smeared differential image
};

// Two-state separation of refraction from diffusive dark field: per pixel
// solves the 2x2 linear system in (dphi1/dx, theta^2) from the smeared
// model, after moving the known Im(tau) and (|tau|^2/4) log-derivative
// terms to the left side. States with proportional coefficient rows are
// rejected as singular. Negative theta^2 solutions clamp to 0 (counted).
DarkfieldResult darkfield_solve(const DarkfieldMeasurement& a, const DarkfieldMeasurement& b,
                                const LinearTFState& tau_a, const LinearTFState& tau_b,
                                double wavelength, WarningLog* log = nullptr);

}  // namespace xpci
