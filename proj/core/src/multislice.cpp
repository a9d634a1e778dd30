#include "xpci/multislice.hpp"

#include <cmath>
#include <stdexcept>

#include "xpci/fft.hpp"

namespace xpci {

namespace {

// In-place Fresnel step on an already padded frame (no further padding).
void fresnel_step_inplace(const Grid2D& g, double k, double dz, std::vector<complexd>& buf) {
  fft::forward_2d(g.nx, g.ny, buf.data());
  const double chirp = dz / (2.0 * k);
  const double scale = 1.0 / static_cast<double>(g.size());
  // Carrier k*dz stays a single constant factor; folding it into the per-bin
  // angle would quantize the chirp at the carrier's ulp (see fresnel_propagate).
  const complexd carrier = scale * complexd{std::cos(k * dz), std::sin(k * dz)};
  for (int n = 0; n < g.ny; ++n) {
    const double ky2 = g.ky(n) * g.ky(n);
    for (int m = 0; m < g.nx; ++m) {
      const double kx = g.kx(m);
      const double theta = -chirp * (kx * kx + ky2);
      buf[static_cast<std::size_t>(n) * g.nx + m] *=
          carrier * complexd{std::cos(theta), std::sin(theta)};
    }
  }
  fft::backward_2d(g.nx, g.ny, buf.data());
}

}  // namespace

std::vector<ComplexField> slice_transmissions(const RefractiveVolume& vol, double wavelength,
                                              WarningLog* log) {
  validate(vol, log);
  if (!(wavelength > 0.0))
    throw std::invalid_argument("slice_transmissions: wavelength must be positive");
  const double k = 2.0 * std::numbers::pi / wavelength;
  const Grid2D g = vol.transverse_grid();
  std::vector<ComplexField> slices;
  slices.reserve(vol.nz);
  for (int iz = 0; iz < vol.nz; ++iz) {
    ComplexField t(g, wavelength);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        t.at(ix, iy) = std::polar(std::exp(-k * vol.beta_at(ix, iy, iz) * vol.dz),
                                  -k * vol.delta_at(ix, iy, iz) * vol.dz);
    slices.push_back(std::move(t));
  }
  return slices;
}

ComplexField multislice_propagate(const ComplexField& entrance, const RefractiveVolume& vol,
                                  const MultisliceOptions& opts, WarningLog* log) {
  require_finite(entrance, "multislice_propagate");
  validate(vol, log);
  require_same_grid(entrance.grid, vol.transverse_grid(), "multislice_propagate");
  if (opts.subdivision < 1)
    throw std::invalid_argument("multislice_propagate: subdivision must be >= 1");
  if (opts.pad_factor != 1 && opts.pad_factor != 2 && opts.pad_factor != 4)
    throw std::invalid_argument("multislice_propagate: pad_factor must be 1, 2 or 4");

  const Grid2D& g = entrance.grid;
  const double k = entrance.wavenumber();
  const double dz_sub = vol.dz / opts.subdivision;

  const double limit = std::min(g.nx * g.dx * g.dx, g.ny * g.dy * g.dy) / entrance.wavelength;
  if (vol.thickness() > limit)
    warn(log, "fresnel.sampling",
         "volume thickness exceeds the chirp sampling limit; expect aliasing",
         {{"distance_m", vol.thickness()}, {"limit_m", limit}});

  // Pad once; every slice transmission and Fresnel step runs in the padded
  // frame (padding is vacuum, transmission 1).
  const int px = g.nx * opts.pad_factor;
  const int py = g.ny * opts.pad_factor;
  const int offx = (px - g.nx) / 2;
  const int offy = (py - g.ny) / 2;
  const Grid2D padded(px, py, g.dx, g.dy);

  std::vector<complexd> buf(padded.size(), complexd{0.0, 0.0});
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      buf[static_cast<std::size_t>(iy + offy) * px + (ix + offx)] = entrance.at(ix, iy);

  if (opts.apodize) {
    // Same taper convention as fresnel_propagate so mixed pipelines match.
    constexpr double kMargin = 0.08;
    auto taper = [](int i, int n, double margin_frac) {
      const double margin = margin_frac * n;
      const double from_edge = std::min<double>(i, n - 1 - i);
      if (from_edge >= margin) return 1.0;
      const double s = std::sin(0.5 * std::numbers::pi * from_edge / margin);
      return s * s;
    };
    for (int iy = 0; iy < py; ++iy)
      for (int ix = 0; ix < px; ++ix)
        buf[static_cast<std::size_t>(iy) * px + ix] *=
            taper(iy, py, kMargin) * taper(ix, px, kMargin);
  }

  // One voxel slice = `subdivision` identical sub-transmissions, each paired
  // with a dz_sub Fresnel step in scheme order.
  std::vector<complexd> slice_t(vol.slice_size());
  for (int iz = 0; iz < vol.nz; ++iz) {
    const std::size_t base = static_cast<std::size_t>(iz) * vol.slice_size();
    for (std::size_t i = 0; i < vol.slice_size(); ++i) {
      const double d = static_cast<double>(vol.delta[base + i]);
      const double b = static_cast<double>(vol.beta[base + i]);
      // exp(i k (n~ - 1) dz) with n~ = 1 - delta + i beta.
      slice_t[i] = std::polar(std::exp(-k * b * dz_sub), -k * d * dz_sub);
    }
    for (int s = 0; s < opts.subdivision; ++s) {
      if (opts.scheme == SliceScheme::PropagateThenProject)
        fresnel_step_inplace(padded, k, dz_sub, buf);
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
          buf[static_cast<std::size_t>(iy + offy) * px + (ix + offx)] *=
              slice_t[static_cast<std::size_t>(iy) * g.nx + ix];
      if (opts.scheme == SliceScheme::ProjectThenPropagate)
        fresnel_step_inplace(padded, k, dz_sub, buf);
    }
  }

  ComplexField out(g, entrance.wavelength);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      out.at(ix, iy) = buf[static_cast<std::size_t>(iy + offy) * px + (ix + offx)];
  return out;
}

ComplexField multislice_auto(const ComplexField& entrance, const RefractiveVolume& vol,
                             MultisliceOptions opts, double rms_tol, int max_subdivision,
                             int* out_subdivision, WarningLog* log) {
  if (!(rms_tol > 0.0))
    throw std::invalid_argument("multislice_auto: rms_tol must be > 0");
  opts.subdivision = 1;
  ComplexField coarse = multislice_propagate(entrance, vol, opts, log);
  while (true) {
    opts.subdivision *= 2;
    ComplexField fine = multislice_propagate(entrance, vol, opts, nullptr);
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < fine.v.size(); ++i) {
      diff2 += std::norm(fine.v[i] - coarse.v[i]);
      norm2 += std::norm(fine.v[i]);
    }
    const double rel = norm2 > 0.0 ? std::sqrt(diff2 / norm2) : 0.0;
    if (rel < rms_tol) {
      if (out_subdivision) *out_subdivision = opts.subdivision;
      return fine;
    }
    if (opts.subdivision >= max_subdivision) {
      warn(log, "multislice.no_convergence",
           "subdivision cap reached before the exit field settled",
           {{"subdivision", static_cast<double>(opts.subdivision)}, {"last_rms_change", rel}});
      if (out_subdivision) *out_subdivision = opts.subdivision;
      return fine;
    }
    coarse = std::move(fine);
  }
}

}  // namespace xpci
