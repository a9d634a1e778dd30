#pragma once

#include <complex>
#include <vector>

#include "xpci/field.hpp"
#include "xpci/grid.hpp"

namespace xpci::fft {

// Raw unnormalized 2D DFTs (FFTW backend, deterministic plans). forward_2d
// followed by backward_2d multiplies the data by nx*ny.
void forward_2d(int nx, int ny, complexd* data);
void backward_2d(int nx, int ny, complexd* data);

// Unnormalized 1D DFTs applied independently to each row of an ny-by-nx
// array (transform along x).
void forward_rows(int nx, int ny, complexd* data);
void backward_rows(int nx, int ny, complexd* data);

// Symmetric-measure DFT pair: spectrum scales the raw forward transform by
// sqrt(dx*dy/(nx*ny)) so that Parseval holds in the physical measure,
//   sum |psi|^2 dx dy = sum |spectrum|^2,
// and synthesize inverts it exactly. Spectral samples are stored in fft
// order on the grid's (kx, ky) lattice.
ComplexField spectrum(const ComplexField& field);
ComplexField synthesize(const ComplexField& spec);

}  // namespace xpci::fft
