#include "xpci/fokker_planck.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "xpci/fft.hpp"

namespace xpci {

namespace {

std::vector<complexd> forward_of_real(const Grid2D& g, const std::vector<double>& f) {
  std::vector<complexd> spec(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) spec[i] = complexd{f[i], 0.0};
  fft::forward_2d(g.nx, g.ny, spec.data());
  return spec;
}

std::vector<double> backward_to_real(const Grid2D& g, std::vector<complexd> spec) {
  fft::backward_2d(g.nx, g.ny, spec.data());
  std::vector<double> out(spec.size());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i].real() * scale;
  return out;
}

// First derivative multipliers i*k, with the Nyquist mode zeroed (the odd
// derivative of a real signal has no consistent sign there).
double dx_multiplier(const Grid2D& g, int m) {
  return (g.nx % 2 == 0 && m == g.nx / 2) ? 0.0 : g.kx(m);
}
double dy_multiplier(const Grid2D& g, int n) {
  return (g.ny % 2 == 0 && n == g.ny / 2) ? 0.0 : g.ky(n);
}

struct Gradient {
  std::vector<double> x, y;
};

Gradient spectral_gradient(const Grid2D& g, const std::vector<double>& f) {
  const std::vector<complexd> spec = forward_of_real(g, f);
  std::vector<complexd> sx(spec.size()), sy(spec.size());
  for (int n = 0; n < g.ny; ++n) {
    const double ky = dy_multiplier(g, n);
    for (int m = 0; m < g.nx; ++m) {
      const double kx = dx_multiplier(g, m);
      const std::size_t i = static_cast<std::size_t>(n) * g.nx + m;
      sx[i] = complexd{0.0, kx} * spec[i];
      sy[i] = complexd{0.0, ky} * spec[i];
    }
  }
  return {backward_to_real(g, std::move(sx)), backward_to_real(g, std::move(sy))};
}

std::vector<double> spectral_divergence(const Grid2D& g, const std::vector<double>& fx,
                                        const std::vector<double>& fy) {
  const std::vector<complexd> sx = forward_of_real(g, fx);
  const std::vector<complexd> sy = forward_of_real(g, fy);
  std::vector<complexd> div(sx.size());
  for (int n = 0; n < g.ny; ++n) {
    const double ky = dy_multiplier(g, n);
    for (int m = 0; m < g.nx; ++m) {
      const double kx = dx_multiplier(g, m);
      const std::size_t i = static_cast<std::size_t>(n) * g.nx + m;
      div[i] = complexd{0.0, kx} * sx[i] + complexd{0.0, ky} * sy[i];
    }
  }
  return backward_to_real(g, std::move(div));
}

struct SecondDerivatives {
  std::vector<double> xx, yy, xy;
};

SecondDerivatives spectral_second(const Grid2D& g, const std::vector<double>& f) {
  const std::vector<complexd> spec = forward_of_real(g, f);
  std::vector<complexd> sxx(spec.size()), syy(spec.size()), sxy(spec.size());
  for (int n = 0; n < g.ny; ++n) {
    const double ky = g.ky(n);
    const double ky1 = dy_multiplier(g, n);
    for (int m = 0; m < g.nx; ++m) {
      const double kx = g.kx(m);
      const double kx1 = dx_multiplier(g, m);
      const std::size_t i = static_cast<std::size_t>(n) * g.nx + m;
      sxx[i] = -kx * kx * spec[i];
      syy[i] = -ky * ky * spec[i];
      sxy[i] = -kx1 * ky1 * spec[i];
    }
  }
  return {backward_to_real(g, std::move(sxx)), backward_to_real(g, std::move(syy)),
          backward_to_real(g, std::move(sxy))};
}

long long clamp_negative(std::vector<double>& v) {
  long long clamped = 0;
  for (double& x : v)
    if (x < 0.0) {
      x = 0.0;
      ++clamped;
    }
  return clamped;
}

void require_intensity(const RealField& intensity, const char* what) {
  require_finite(intensity, what);
  for (double x : intensity.v)
    if (x < 0.0) throw std::invalid_argument(std::string(what) + ": intensity must be >= 0");
}

}  // namespace

DiffusionMap diffusion_isotropic(RealField d) {
  DiffusionMap map;
  map.kind = DiffusionMap::Kind::Isotropic;
  map.d = std::move(d);
  validate(map);
  return map;
}

DiffusionMap diffusion_tensor(RealField dxx, RealField dyy, RealField dxy) {
  DiffusionMap map;
  map.kind = DiffusionMap::Kind::Tensor;
  map.dxx = std::move(dxx);
  map.dyy = std::move(dyy);
  map.dxy = std::move(dxy);
  validate(map);
  return map;
}

DiffusionMap diffusion_kernel(RealField fraction, int stencil_size,
                              std::vector<double> stencils, bool shared) {
  DiffusionMap map;
  map.kind = DiffusionMap::Kind::Kernel;
  map.fraction = std::move(fraction);
  map.stencil_size = stencil_size;
  map.stencils = std::move(stencils);
  map.shared_stencil = shared;
  validate(map);
  return map;
}

void validate(const DiffusionMap& map) {
  switch (map.kind) {
    case DiffusionMap::Kind::Isotropic: {
      require_finite(map.d, "DiffusionMap");
      for (double d : map.d.v)
        if (d < 0.0)
          throw std::invalid_argument("DiffusionMap: isotropic D must be >= 0 everywhere");
      return;
    }
    case DiffusionMap::Kind::Tensor: {
      require_finite(map.dxx, "DiffusionMap");
      require_finite(map.dyy, "DiffusionMap");
      require_finite(map.dxy, "DiffusionMap");
      require_same_grid(map.dxx.grid, map.dyy.grid, "DiffusionMap tensor");
      require_same_grid(map.dxx.grid, map.dxy.grid, "DiffusionMap tensor");
      for (std::size_t i = 0; i < map.dxx.v.size(); ++i) {
        const double xx = map.dxx.v[i], yy = map.dyy.v[i], xy = map.dxy.v[i];
        // PSD: both diagonal entries >= 0 and det >= 0 (tiny slack for
        // maps computed in floating point).
        if (xx < 0.0 || yy < 0.0 || xx * yy - xy * xy < -1e-15 * (1.0 + xx * yy))
          throw std::invalid_argument(
              "DiffusionMap: tensor must be positive semidefinite per pixel");
      }
      return;
    }
    case DiffusionMap::Kind::Kernel: {
      require_finite(map.fraction, "DiffusionMap");
      for (double f : map.fraction.v)
        if (!(f >= 0.0 && f < 1.0))
          throw std::invalid_argument("DiffusionMap: scattered fraction must lie in [0, 1)");
      if (map.stencil_size < 1 || map.stencil_size % 2 == 0)
        throw std::invalid_argument("DiffusionMap: stencil size must be odd and >= 1");
      const std::size_t per = static_cast<std::size_t>(map.stencil_size) * map.stencil_size;
      const std::size_t expected = map.shared_stencil ? per : per * map.fraction.grid.size();
      if (map.stencils.size() != expected)
        throw std::invalid_argument("DiffusionMap: stencil array has wrong length");
      const std::size_t count = map.stencils.size() / per;
      for (std::size_t s = 0; s < count; ++s) {
        double sum = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
          const double w = map.stencils[s * per + i];
          if (!(w >= 0.0))
            throw std::invalid_argument("DiffusionMap: stencil weights must be >= 0");
          sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
          throw std::invalid_argument("DiffusionMap: each stencil must sum to 1 within 1e-12");
      }
      return;
    }
  }
  throw std::invalid_argument("DiffusionMap: unknown kind");
}

RealField tie_step(const RealField& intensity, const RealField& phase, double dz,
                   double wavelength, WarningLog* log) {
  require_intensity(intensity, "tie_step");
  require_finite(phase, "tie_step");
  require_same_grid(intensity.grid, phase.grid, "tie_step");
  if (!(wavelength > 0.0)) throw std::invalid_argument("tie_step: wavelength must be positive");
  if (!std::isfinite(dz)) throw std::invalid_argument("tie_step: dz must be finite");

  const Grid2D& g = intensity.grid;
  const double k = 2.0 * std::numbers::pi / wavelength;

  const Gradient grad = spectral_gradient(g, phase.v);
  std::vector<double> fx(g.size()), fy(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    fx[i] = intensity.v[i] * grad.x[i];
    fy[i] = intensity.v[i] * grad.y[i];
  }
  const std::vector<double> div = spectral_divergence(g, fx, fy);

  RealField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out.v[i] = intensity.v[i] - (dz / k) * div[i];
  const long long clamped = clamp_negative(out.v);
  if (clamped > 0)
    warn(log, "tie.negative_clamped", "negative intensities clamped to zero",
         {{"clamped_pixels", static_cast<double>(clamped)}});
  return out;
}

RealField fp_step(const RealField& intensity, const RealField& phase, const DiffusionMap& map,
                  double delta_z, double wavelength, WarningLog* log) {
  require_intensity(intensity, "fp_step");
  require_finite(phase, "fp_step");
  require_same_grid(intensity.grid, phase.grid, "fp_step");
  validate(map);
  if (!(wavelength > 0.0)) throw std::invalid_argument("fp_step: wavelength must be positive");
  if (!std::isfinite(delta_z)) throw std::invalid_argument("fp_step: delta_z must be finite");

  const Grid2D& g = intensity.grid;
  const double k = 2.0 * std::numbers::pi / wavelength;

  // Drift (lensing) channel: same operator as tie_step, without clamping so
  // the diffusion term can still refill slightly negative excursions.
  const Gradient grad = spectral_gradient(g, phase.v);
  std::vector<double> fx(g.size()), fy(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    fx[i] = intensity.v[i] * grad.x[i];
    fy[i] = intensity.v[i] * grad.y[i];
  }
  const std::vector<double> div = spectral_divergence(g, fx, fy);

  RealField out(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    out.v[i] = intensity.v[i] - (delta_z / k) * div[i];

  switch (map.kind) {
    case DiffusionMap::Kind::Isotropic: {
      require_same_grid(g, map.d.grid, "fp_step");
      const SecondDerivatives d2 = spectral_second(g, intensity.v);
      const double dz2 = delta_z * delta_z;
      for (std::size_t i = 0; i < g.size(); ++i)
        out.v[i] += dz2 * map.d.v[i] * (d2.xx[i] + d2.yy[i]);
      break;
    }
    case DiffusionMap::Kind::Tensor: {
      require_same_grid(g, map.dxx.grid, "fp_step");
      const SecondDerivatives d2 = spectral_second(g, intensity.v);
      const double dz2 = delta_z * delta_z;
      for (std::size_t i = 0; i < g.size(); ++i)
        out.v[i] += dz2 * (map.dxx.v[i] * d2.xx[i] + map.dyy.v[i] * d2.yy[i] +
                           2.0 * map.dxy.v[i] * d2.xy[i]);
      break;
    }
    case DiffusionMap::Kind::Kernel: {
      require_same_grid(g, map.fraction.grid, "fp_step");
      // Scatter-from-source form: pixel x' removes F(x') I(x') and
      // redistributes it through its stencil. Unit-sum stencils conserve the
      // total exactly, for any spatially varying F.
      const int s = map.stencil_size;
      const int half = s / 2;
      const std::size_t per = static_cast<std::size_t>(s) * s;
      std::vector<double> scattered(g.size(), 0.0);
      for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
          const std::size_t src = static_cast<std::size_t>(iy) * g.nx + ix;
          const double amount = map.fraction.v[src] * intensity.v[src];
          if (amount == 0.0) continue;
          const double* st =
              map.stencils.data() + (map.shared_stencil ? 0 : src * per);
          for (int oy = -half; oy <= half; ++oy) {
            const int ty = (iy + oy + g.ny) % g.ny;
            for (int ox = -half; ox <= half; ++ox) {
              const int tx = (ix + ox + g.nx) % g.nx;
              scattered[static_cast<std::size_t>(ty) * g.nx + tx] +=
                  amount * st[(oy + half) * s + (ox + half)];
            }
          }
        }
      }
      for (std::size_t i = 0; i < g.size(); ++i)
        out.v[i] += scattered[i] - map.fraction.v[i] * intensity.v[i];
      break;
    }
  }

  const long long clamped = clamp_negative(out.v);
  if (clamped > 0)
    warn(log, "fp.negative_clamped", "negative intensities clamped to zero",
         {{"clamped_pixels", static_cast<double>(clamped)}});
  return out;
}

RealField diffusion_coefficient(const RealField& fraction, const RealField& theta) {
  require_finite(fraction, "diffusion_coefficient");
  require_finite(theta, "diffusion_coefficient");
  require_same_grid(fraction.grid, theta.grid, "diffusion_coefficient");
  RealField d(fraction.grid);
  for (std::size_t i = 0; i < d.v.size(); ++i)
    d.v[i] = fraction.v[i] * theta.v[i] * theta.v[i];
  return d;
}

RealField blur_width(const RealField& theta, double delta_z) {
  require_finite(theta, "blur_width");
  if (!std::isfinite(delta_z))
    throw std::invalid_argument("blur_width: delta_z must be finite");
  RealField l(theta.grid);
  for (std::size_t i = 0; i < l.v.size(); ++i) l.v[i] = theta.v[i] * delta_z;
  return l;
}

VectorField2D deflection_angles(const RealField& phase, double wavelength) {
  require_finite(phase, "deflection_angles");
  if (!(wavelength > 0.0))
    throw std::invalid_argument("deflection_angles: wavelength must be positive");
  const Grid2D& g = phase.grid;
  const double inv_k = wavelength / (2.0 * std::numbers::pi);

  VectorField2D theta(g);
  auto idx = [&g](int ix, int iy) { return static_cast<std::size_t>(iy) * g.nx + ix; };
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      double gx, gy;
      if (ix == 0)
        gx = (phase.v[idx(1, iy)] - phase.v[idx(0, iy)]) / g.dx;
      else if (ix == g.nx - 1)
        gx = (phase.v[idx(ix, iy)] - phase.v[idx(ix - 1, iy)]) / g.dx;
      else
        gx = (phase.v[idx(ix + 1, iy)] - phase.v[idx(ix - 1, iy)]) / (2.0 * g.dx);
      if (iy == 0)
        gy = (phase.v[idx(ix, 1)] - phase.v[idx(ix, 0)]) / g.dy;
      else if (iy == g.ny - 1)
        gy = (phase.v[idx(ix, iy)] - phase.v[idx(ix, iy - 1)]) / g.dy;
      else
        gy = (phase.v[idx(ix, iy + 1)] - phase.v[idx(ix, iy - 1)]) / (2.0 * g.dy);
      theta.x[idx(ix, iy)] = gx * inv_k;
      theta.y[idx(ix, iy)] = gy * inv_k;
    }
  }
  return theta;
}

}  // namespace xpci
