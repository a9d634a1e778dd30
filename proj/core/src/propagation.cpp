#include "xpci/propagation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "xpci/fft.hpp"

namespace xpci {

namespace {

// Raised-cosine taper to zero over the outer `margin_frac` of each axis.
double taper(int i, int n, double margin_frac) {
  const double margin = margin_frac * n;
  const double from_edge = std::min<double>(i, n - 1 - i);
  if (from_edge >= margin) return 1.0;
  const double t = from_edge / margin;  // 0 at edge, 1 at interior boundary
  const double s = std::sin(0.5 * std::numbers::pi * t);
  return s * s;
}

}  // namespace

void validate(const PropagationPlan& plan) {
  if (!std::isfinite(plan.distance))
    throw std::invalid_argument("PropagationPlan: distance must be finite");
  if (plan.pad_factor != 1 && plan.pad_factor != 2 && plan.pad_factor != 4)
    throw std::invalid_argument("PropagationPlan: pad_factor must be 1, 2 or 4, got " +
                                std::to_string(plan.pad_factor));
}

void validate(const ConeBeamGeometry& geom) {
  if (!(geom.z1 > 0.0))
    throw std::invalid_argument("ConeBeamGeometry: z1 must be > 0");
  if (!(geom.z2 >= 0.0) || !std::isfinite(geom.z2))
    throw std::invalid_argument("ConeBeamGeometry: z2 must be >= 0");
}

ComplexField fresnel_propagate(const ComplexField& field, const PropagationPlan& plan,
                               WarningLog* log) {
  require_finite(field, "fresnel_propagate");
  validate(plan);

  const Grid2D& g = field.grid;
  const double lambda = field.wavelength;
  const double k = field.wavenumber();
  const double d = plan.distance;

  // Nyquist guard for the quadratic chirp: beyond n*dx^2/lambda the kernel
  // phase step between frequency samples exceeds pi and the chirp aliases.
  const double limit_x = g.nx * g.dx * g.dx / lambda;
  const double limit_y = g.ny * g.dy * g.dy / lambda;
  if (std::abs(d) > limit_x || std::abs(d) > limit_y) {
    warn(log, "fresnel.sampling",
         "propagation distance exceeds the chirp sampling limit; expect aliasing",
         {{"distance_m", d}, {"limit_x_m", limit_x}, {"limit_y_m", limit_y}});
  }

  const int px = g.nx * plan.pad_factor;
  const int py = g.ny * plan.pad_factor;
  const int offx = (px - g.nx) / 2;
  const int offy = (py - g.ny) / 2;
  const Grid2D padded(px, py, g.dx, g.dy);

  std::vector<complexd> buf(padded.size(), complexd{0.0, 0.0});
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      buf[static_cast<std::size_t>(iy + offy) * px + (ix + offx)] = field.at(ix, iy);

  if (plan.apodize) {
    constexpr double kMargin = 0.08;
    for (int iy = 0; iy < py; ++iy) {
      const double wy = taper(iy, py, kMargin);
      for (int ix = 0; ix < px; ++ix)
        buf[static_cast<std::size_t>(iy) * px + ix] *= wy * taper(ix, px, kMargin);
    }
  }

  fft::forward_2d(px, py, buf.data());

  // exp(i k d) * exp(-i d k_perp^2 / (2k)). The plane carrier k*d can reach
  // 1e10+ radians at hard X-ray wavelengths, where a single combined angle
  // would quantize the chirp at its ulp; keeping the carrier as one constant
  // factor leaves the per-sample angle small and full precision.
  const double chirp = d / (2.0 * k);
  const complexd carrier{std::cos(k * d), std::sin(k * d)};
  for (int n = 0; n < py; ++n) {
    const double ky = padded.ky(n);
    const double ky2 = ky * ky;
    for (int m = 0; m < px; ++m) {
      const double kx = padded.kx(m);
      const double theta = -chirp * (kx * kx + ky2);
      buf[static_cast<std::size_t>(n) * px + m] *=
          carrier * complexd{std::cos(theta), std::sin(theta)};
    }
  }

  fft::backward_2d(px, py, buf.data());

  ComplexField out(g, lambda);
  const double scale = 1.0 / static_cast<double>(padded.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      out.at(ix, iy) = buf[static_cast<std::size_t>(iy + offy) * px + (ix + offx)] * scale;
  return out;
}

double fresnel_number(double feature_size, double wavelength, double distance,
                      double magnification) {
  if (!(feature_size >= 0.0))
    throw std::invalid_argument("fresnel_number: feature size must be >= 0");
  if (!(wavelength > 0.0))
    throw std::invalid_argument("fresnel_number: wavelength must be > 0");
  if (!(distance > 0.0))
    throw std::invalid_argument("fresnel_number: distance must be > 0");
  if (!(magnification >= 1.0))
    throw std::invalid_argument("fresnel_number: magnification must be >= 1");
  return magnification * feature_size * feature_size / (wavelength * distance);
}

RealField spherical_wave_image(const ComplexField& exit_field, const ConeBeamGeometry& geom,
                               int pad_factor, bool apodize, WarningLog* log) {
  validate(geom);
  if (geom.z2 == 0.0) {
    // Contact image: no propagation, no magnification.
    require_finite(exit_field, "spherical_wave_image");
    RealField out(exit_field.grid);
    for (std::size_t i = 0; i < exit_field.v.size(); ++i) out.v[i] = std::norm(exit_field.v[i]);
    return out;
  }

  const double m = geom.magnification();
  PropagationPlan plan;
  plan.distance = geom.z2 / m;
  plan.pad_factor = pad_factor;
  plan.apodize = apodize;
  ComplexField propagated = fresnel_propagate(exit_field, plan, log);

  const Grid2D& g = exit_field.grid;
  RealField out(Grid2D(g.nx, g.ny, m * g.dx, m * g.dy));
  const double inv_m2 = 1.0 / (m * m);
  for (std::size_t i = 0; i < propagated.v.size(); ++i)
    out.v[i] = std::norm(propagated.v[i]) * inv_m2;
  return out;
}

}  // namespace xpci
