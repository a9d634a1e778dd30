#pragma once

#include <map>
#include <utility>
#include <variant>
#include <vector>

#include "xpci/field.hpp"
#include "xpci/grid.hpp"
#include "xpci/propagation.hpp"
#include "xpci/warnings.hpp"

namespace xpci {

// Sparse aberration coefficients alpha_mn (SI units of m^(m+n) so that
// alpha_mn * kx^m * ky^n is radians). Real parts are coherent aberrations,
// imaginary parts damping envelopes.
struct AberrationSet {
  std::map<std::pair<int, int>, complexd> coeff;

  complexd& operator()(int m, int n) { return coeff[{m, n}]; }
};

void validate(const AberrationSet& ab);

// Frequency response of a shift-invariant coherent system, sampled on a
// grid's (kx, ky) lattice in fft order. Passive: |T| <= 1 everywhere
// (within 1e-12) unless constructed with allow_gain.
struct TransferFunction {
  Grid2D grid;
  std::vector<complexd> values;

  // Bright-field (zero-frequency) factor Omega = T(0,0).
  complexd omega() const { return values.empty() ? complexd{0, 0} : values[0]; }
};

TransferFunction make_transfer_function(const Grid2D& grid, std::vector<complexd> values,
                                        bool allow_gain = false);

// T(kx,ky) = prod over (m,n) of exp[i alpha_mn kx^m ky^n]. The Fresnel
// kernel is the special case alpha_20 = alpha_02 = -d/(2k) (up to the global
// exp(ikd) factor). Passivity is enforced at sampling time.
TransferFunction transfer_from_aberrations(const Grid2D& grid, const AberrationSet& ab,
                                           bool allow_gain = false);

// psi_out = IDFT[ T . DFT psi_in ].
ComplexField apply_lsi(const ComplexField& field, const TransferFunction& tf);

// One stage of an imaging cascade, applied in list order.
struct TransmissionStage {
  ComplexField t;
};
struct PropagateStage {
  PropagationPlan plan;
};
struct FilterStage {
  TransferFunction tf;
};
using CascadeStage = std::variant<TransmissionStage, PropagateStage, FilterStage>;

ComplexField cascade(const ComplexField& input, const std::vector<CascadeStage>& stages,
                     WarningLog* log = nullptr);

// Discrete phase-contrast factor C(k) = -2 Omega (T(k) - conj(T(-k)))/(2i)
// of a transfer function with real bright-field factor Omega; -k is the
// index reflection (Nyquist rows map to themselves on even grids).
std::vector<complexd> contrast_factor(const TransferFunction& tf);

// Weak-object image I = |Omega|^2 + IDFT[ C . DFT phi ] for a pure, weak
// phase map phi. Requires Omega real (within 1e-12 relative) and nonzero.
RealField weak_phase_image(const RealField& phase, const TransferFunction& tf);

}  // namespace xpci
