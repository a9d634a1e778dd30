#include "xpci/coherence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "xpci/fft.hpp"
#include "xpci/parallel.hpp"

namespace xpci {

void validate(const Ensemble& ens) {
  if (ens.members.empty())
    throw std::invalid_argument("Ensemble: at least one member required");
  if (ens.members.size() != ens.weights.size())
    throw std::invalid_argument("Ensemble: member and weight counts differ");
  const Grid2D& g = ens.members.front().grid;
  const double lambda = ens.members.front().wavelength;
  double sum = 0.0;
  for (std::size_t j = 0; j < ens.members.size(); ++j) {
    require_finite(ens.members[j], "Ensemble member");
    if (!(ens.members[j].grid == g))
      throw std::invalid_argument("Ensemble: member " + std::to_string(j) +
                                  " grid differs from the first member");
    if (ens.members[j].wavelength != lambda)
      throw std::invalid_argument("Ensemble: member " + std::to_string(j) +
                                  " wavelength differs; one ensemble = one wavelength");
    const double w = ens.weights[j];
    if (!(w >= 0.0 && w <= 1.0))
      throw std::invalid_argument("Ensemble: weight " + std::to_string(j) +
                                  " outside [0, 1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("Ensemble: weights sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-12");
}

std::vector<complexd> cross_spectral_density(const Ensemble& ens,
                                             const std::vector<PointPair>& pairs) {
  validate(ens);
  const Grid2D& g = ens.members.front().grid;
  std::vector<complexd> w(pairs.size(), complexd{0.0, 0.0});
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const PointPair& pp = pairs[p];
    if (pp.x1 < 0 || pp.x1 >= g.nx || pp.x2 < 0 || pp.x2 >= g.nx || pp.y1 < 0 ||
        pp.y1 >= g.ny || pp.y2 < 0 || pp.y2 >= g.ny)
      throw std::invalid_argument("cross_spectral_density: pair " + std::to_string(p) +
                                  " indexes outside the grid");
    for (std::size_t j = 0; j < ens.members.size(); ++j)
      w[p] += ens.weights[j] * std::conj(ens.members[j].at(pp.x1, pp.y1)) *
              ens.members[j].at(pp.x2, pp.y2);
  }
  return w;
}

std::vector<complexd> cross_spectral_density_dense(const Ensemble& ens) {
  validate(ens);
  const Grid2D& g = ens.members.front().grid;
  if (g.nx > 32 || g.ny > 32)
    throw std::invalid_argument(
        "cross_spectral_density_dense: gated to grids of at most 32x32 (got " +
        std::to_string(g.nx) + "x" + std::to_string(g.ny) + ")");
  const std::size_t n = g.size();
  std::vector<complexd> w(n * n, complexd{0.0, 0.0});
  for (std::size_t j = 0; j < ens.members.size(); ++j) {
    const double c = ens.weights[j];
    const auto& v = ens.members[j].v;
    for (std::size_t r2 = 0; r2 < n; ++r2)
      for (std::size_t r1 = 0; r1 < n; ++r1) w[r2 * n + r1] += c * std::conj(v[r1]) * v[r2];
  }
  return w;
}

RealField spectral_density(const Ensemble& ens) {
  validate(ens);
  RealField s(ens.members.front().grid);
  for (std::size_t j = 0; j < ens.members.size(); ++j) {
    const double c = ens.weights[j];
    const auto& v = ens.members[j].v;
    for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] += c * std::norm(v[i]);
  }
  return s;
}

void validate(const SpectralStack& stack) {
  if (stack.omegas.empty())
    throw std::invalid_argument("SpectralStack: at least one frequency sample required");
  if (stack.omegas.size() != stack.densities.size())
    throw std::invalid_argument("SpectralStack: omega and density counts differ");
  const Grid2D& g = stack.densities.front().grid;
  for (std::size_t i = 0; i < stack.omegas.size(); ++i) {
    if (!(stack.omegas[i] > 0.0))
      throw std::invalid_argument("SpectralStack: omega samples must be positive");
    if (i > 0 && !(stack.omegas[i] > stack.omegas[i - 1]))
      throw std::invalid_argument("SpectralStack: omega samples must strictly increase");
    require_finite(stack.densities[i], "SpectralStack density");
    if (!(stack.densities[i].grid == g))
      throw std::invalid_argument("SpectralStack: density grids differ");
  }
}

RealField detected_intensity(const SpectralStack& stack, const std::vector<double>& response) {
  validate(stack);
  if (response.size() != stack.omegas.size())
    throw std::invalid_argument("detected_intensity: response must be sampled at the stack's omegas");
  for (double r : response)
    if (!std::isfinite(r) || r < 0.0)
      throw std::invalid_argument("detected_intensity: response must be finite and >= 0");

  const std::size_t n = stack.omegas.size();
  std::vector<double> quad(n, 1.0);  // single entry: degenerate weight 1
  if (n > 1) {
    quad[0] = 0.5 * (stack.omegas[1] - stack.omegas[0]);
    quad[n - 1] = 0.5 * (stack.omegas[n - 1] - stack.omegas[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i)
      quad[i] = 0.5 * (stack.omegas[i + 1] - stack.omegas[i - 1]);
  }

  RealField out(stack.densities.front().grid);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = quad[i] * response[i];
    const auto& s = stack.densities[i].v;
    for (std::size_t p = 0; p < out.v.size(); ++p) out.v[p] += w * s[p];
  }
  return out;
}

Ensemble propagate_ensemble(const Ensemble& ens, const std::vector<CascadeStage>& stages,
                            WarningLog* log) {
  validate(ens);
  Ensemble out;
  out.weights = ens.weights;  // statistical weights are invariant
  out.members.resize(ens.members.size());
  // Each member writes its own slot, so results are schedule independent.
  // Warnings are collected per member and merged in ascending order.
  std::vector<WarningLog> logs(ens.members.size());
  parallel_for(static_cast<int>(ens.members.size()), [&](int j) {
    try {
      out.members[j] = cascade(ens.members[j], stages, log ? &logs[j] : nullptr);
    } catch (const std::exception& e) {
      throw std::runtime_error("ensemble member " + std::to_string(j) + ": " + e.what());
    }
  });
  if (log)
    for (const auto& l : logs) log->merge(l);
  return out;
}

RealField source_blur(const RealField& image, double source_diameter,
                      const ConeBeamGeometry& geom, BlurProfile profile, WarningLog* log) {
  require_finite(image, "source_blur");
  validate(geom);
  if (source_diameter < 0.0)
    throw std::invalid_argument("source_blur: source diameter must be >= 0");

  const double d_eff = source_diameter * geom.z2 / geom.z1;
  if (d_eff == 0.0) return image;  // point source or contact regime

  const Grid2D& g = image.grid;
  if (d_eff > 0.5 * std::min(g.nx * g.dx, g.ny * g.dy))
    warn(log, "blur.kernel_large", "effective source width exceeds half the frame",
         {{"d_eff_m", d_eff}});

  // Kernel centred at pixel (0,0) in wrap-around order so the convolution
  // introduces no shift.
  std::vector<double> kernel(g.size(), 0.0);
  double sum = 0.0;
  if (profile == BlurProfile::Disk) {
    const double r = 0.5 * d_eff;
    // 4x4 supersampling of the disk indicator keeps rim discretization
    // error well below the percent level for kernels a few pixels wide.
    constexpr int ss = 4;
    for (int n = 0; n < g.ny; ++n) {
      const double y0 = Grid2D::freq_index(n, g.ny) * g.dy;
      for (int m = 0; m < g.nx; ++m) {
        const double x0 = Grid2D::freq_index(m, g.nx) * g.dx;
        int hits = 0;
        for (int sy = 0; sy < ss; ++sy)
          for (int sx = 0; sx < ss; ++sx) {
            const double x = x0 + (sx + 0.5) / ss * g.dx - 0.5 * g.dx;
            const double y = y0 + (sy + 0.5) / ss * g.dy - 0.5 * g.dy;
            if (x * x + y * y <= r * r) ++hits;
          }
        const double w = static_cast<double>(hits) / (ss * ss);
        kernel[static_cast<std::size_t>(n) * g.nx + m] = w;
        sum += w;
      }
    }
  } else {
    const double sigma = d_eff / (2.0 * std::sqrt(2.0 * std::log(2.0)));  // FWHM -> sigma
    for (int n = 0; n < g.ny; ++n) {
      const double y = Grid2D::freq_index(n, g.ny) * g.dy;
      for (int m = 0; m < g.nx; ++m) {
        const double x = Grid2D::freq_index(m, g.nx) * g.dx;
        const double w = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(n) * g.nx + m] = w;
        sum += w;
      }
    }
  }
  if (sum == 0.0)
    throw std::invalid_argument("source_blur: effective source smaller than one pixel");

  std::vector<complexd> a(g.size()), b(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i] = complexd{image.v[i], 0.0};
    b[i] = complexd{kernel[i] / sum, 0.0};
  }
  fft::forward_2d(g.nx, g.ny, a.data());
  fft::forward_2d(g.nx, g.ny, b.data());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) a[i] *= b[i] * scale;
  fft::backward_2d(g.nx, g.ny, a.data());

  RealField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out.v[i] = a[i].real();
  return out;
}

TransferFunction coherence_envelope(const TransferFunction& tf, double k_c) {
  if (std::isinf(k_c)) return tf;  // fully coherent limit
  if (!(k_c > 0.0))
    throw std::invalid_argument("coherence_envelope: cutoff k_c must be > 0 or infinite");
  TransferFunction out = tf;
  const Grid2D& g = tf.grid;
  for (int n = 0; n < g.ny; ++n) {
    const double ky2 = g.ky(n) * g.ky(n);
    for (int m = 0; m < g.nx; ++m) {
      const double kx = g.kx(m);
      out.values[static_cast<std::size_t>(n) * g.nx + m] *=
          std::exp(-(kx * kx + ky2) / (2.0 * k_c * k_c));
    }
  }
  return out;
}

}  // namespace xpci
