#include "xpci/retrieval.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "xpci/fft.hpp"

namespace xpci {

namespace {

std::string freq_label(const Grid2D& g, std::size_t i) {
  const int m = static_cast<int>(i) % g.nx;
  const int n = static_cast<int>(i) / g.nx;
  return "(" + std::to_string(Grid2D::freq_index(m, g.nx)) + ", " +
         std::to_string(Grid2D::freq_index(n, g.ny)) + ")";
}

double max_abs2(const std::vector<complexd>& v) {
  double m = 0.0;
  for (const complexd& c : v) m = std::max(m, std::norm(c));
  return m;
}

// Spectral d/dx per row with linear detrending: the endpoint-to-endpoint
// slope is removed first so phase ramps (non-periodic on the frame) come out
// exact and the periodic residual keeps spectral accuracy.
std::vector<double> row_derivative(const Grid2D& g, const std::vector<double>& f) {
  const int nx = g.nx, ny = g.ny;
  std::vector<complexd> buf(f.size());
  std::vector<double> slope(ny);
  for (int iy = 0; iy < ny; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    const double s = (f[row + nx - 1] - f[row]) / ((nx - 1) * g.dx);
    slope[iy] = s;
    for (int ix = 0; ix < nx; ++ix)
      buf[row + ix] = complexd{f[row + ix] - s * ix * g.dx, 0.0};
  }
  fft::forward_rows(nx, ny, buf.data());
  const double scale = 1.0 / nx;
  for (int iy = 0; iy < ny; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    for (int ix = 0; ix < nx; ++ix) {
      const double kx = (nx % 2 == 0 && ix == nx / 2) ? 0.0 : g.kx(ix);
      buf[row + ix] *= complexd{0.0, kx} * scale;
    }
  }
  fft::backward_rows(nx, ny, buf.data());
  std::vector<double> out(f.size());
  for (int iy = 0; iy < ny; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    for (int ix = 0; ix < nx; ++ix) out[row + ix] = buf[row + ix].real() + slope[iy];
  }
  return out;
}

// Row-wise periodic convolution with a unit-sum Gaussian of standard
// deviation sigma meters.
void smear_rows(const Grid2D& g, std::vector<double>& f, double sigma) {
  if (sigma == 0.0) return;
  const int nx = g.nx, ny = g.ny;
  std::vector<double> kernel(nx, 0.0);
  double sum = 0.0;
  for (int ix = 0; ix < nx; ++ix) {
    const double x = Grid2D::freq_index(ix, nx) * g.dx;
    kernel[ix] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += kernel[ix];
  }
  std::vector<complexd> kbuf(nx);
  for (int ix = 0; ix < nx; ++ix) kbuf[ix] = complexd{kernel[ix] / sum, 0.0};
  fft::forward_rows(nx, 1, kbuf.data());

  std::vector<complexd> buf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) buf[i] = complexd{f[i], 0.0};
  fft::forward_rows(nx, ny, buf.data());
  const double scale = 1.0 / nx;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      buf[static_cast<std::size_t>(iy) * nx + ix] *= kbuf[ix] * scale;
  fft::backward_rows(nx, ny, buf.data());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = buf[i].real();
}

void check_tau(const LinearTFState& state, const Grid2D& g, WarningLog* log) {
  if (!std::isfinite(state.tau.real()) || !std::isfinite(state.tau.imag()))
    throw std::invalid_argument("LinearTFState: tau must be finite");
  const double reach = std::abs(state.tau) * g.kx_nyquist();
  if (reach > 1.0)
    warn(log, "lineartf.tau_large",
         "|tau| * k_Nyquist exceeds 1; the linear transfer expansion is unreliable",
         {{"tau_k_nyquist", reach}});
}

std::vector<double> log_derivative(const Grid2D& g, const RealField& i_in, const char* what) {
  std::vector<double> logi(i_in.v.size());
  for (std::size_t i = 0; i < logi.size(); ++i) {
    if (!(i_in.v[i] > 0.0))
      throw std::invalid_argument(std::string(what) + ": input intensity must be > 0 everywhere");
    logi[i] = std::log(i_in.v[i]);
  }
  return row_derivative(g, logi);
}

}  // namespace

double Regularizer::resolve(double max_t2) const {
  if (auto_mode) return 1e-4 * max_t2;
  if (!(value >= 0.0) || !std::isfinite(value))
    throw std::invalid_argument("Regularizer: value must be finite and >= 0");
  return value;
}

ComplexField invert_lsi_single(const ComplexField& output, const TransferFunction& tf,
                               Regularizer reg) {
  require_finite(output, "invert_lsi_single");
  require_same_grid(output.grid, tf.grid, "invert_lsi_single");
  const double eps = reg.resolve(max_abs2(tf.values));

  ComplexField in = output;
  fft::forward_2d(in.grid.nx, in.grid.ny, in.v.data());
  const double scale = 1.0 / static_cast<double>(in.grid.size());
  for (std::size_t i = 0; i < in.v.size(); ++i) {
    const double denom = std::norm(tf.values[i]) + eps;
    if (denom == 0.0)
      throw std::invalid_argument(
          "invert_lsi_single: transfer function is zero at frequency index " +
          freq_label(tf.grid, i) + " and reg = 0");
    in.v[i] *= std::conj(tf.values[i]) * (scale / denom);
  }
  fft::backward_2d(in.grid.nx, in.grid.ny, in.v.data());
  return in;
}

ComplexField schiske_combine(const std::vector<ComplexField>& outputs,
                             const std::vector<TransferFunction>& tfs, Regularizer reg) {
  if (outputs.empty() || outputs.size() != tfs.size())
    throw std::invalid_argument("schiske_combine: need equally many outputs and transfer functions");
  const Grid2D& g = outputs.front().grid;
  const double lambda = outputs.front().wavelength;
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    require_finite(outputs[j], "schiske_combine");
    require_same_grid(outputs[j].grid, g, "schiske_combine");
    require_same_grid(tfs[j].grid, g, "schiske_combine");
    if (outputs[j].wavelength != lambda)
      throw std::invalid_argument("schiske_combine: output wavelengths differ");
  }

  double max_t2 = 0.0;
  for (const auto& tf : tfs) max_t2 = std::max(max_t2, max_abs2(tf.values));
  const double eps = reg.resolve(max_t2);

  // Accumulate conj(T_j) * DFT(psi_j) in ascending j (deterministic).
  std::vector<complexd> acc(g.size(), complexd{0.0, 0.0});
  std::vector<double> denom(g.size(), eps);
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    std::vector<complexd> buf = outputs[j].v;
    fft::forward_2d(g.nx, g.ny, buf.data());
    const auto& t = tfs[j].values;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += std::conj(t[i]) * buf[i];
      denom[i] += std::norm(t[i]);
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (denom[i] == 0.0)
      throw std::invalid_argument(
          "schiske_combine: all transfer functions are zero at frequency index " +
          freq_label(g, i) + " and reg = 0");
    acc[i] /= denom[i] * static_cast<double>(g.size());
  }
  fft::backward_2d(g.nx, g.ny, acc.data());

  ComplexField in(g, lambda);
  in.v = std::move(acc);
  return in;
}

RealField ctf_retrieve(const std::vector<RealField>& images,
                       const std::vector<TransferFunction>& tfs, Regularizer reg) {
  if (images.empty() || images.size() != tfs.size())
    throw std::invalid_argument("ctf_retrieve: need equally many images and transfer functions");
  const Grid2D& g = images.front().grid;
  for (std::size_t j = 0; j < images.size(); ++j) {
    require_finite(images[j], "ctf_retrieve");
    require_same_grid(images[j].grid, g, "ctf_retrieve");
    require_same_grid(tfs[j].grid, g, "ctf_retrieve");
  }

  std::vector<std::vector<complexd>> contrast;
  contrast.reserve(tfs.size());
  double max_c2 = 0.0;
  for (const auto& tf : tfs) {
    contrast.push_back(contrast_factor(tf));
    max_c2 = std::max(max_c2, max_abs2(contrast.back()));
  }
  const double eps = reg.resolve(max_c2);

  std::vector<complexd> acc(g.size(), complexd{0.0, 0.0});
  std::vector<double> denom(g.size(), eps);
  for (std::size_t j = 0; j < images.size(); ++j) {
    const double omega2 = std::norm(tfs[j].omega());
    std::vector<complexd> buf(g.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = complexd{images[j].v[i] - omega2, 0.0};
    fft::forward_2d(g.nx, g.ny, buf.data());
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += std::conj(contrast[j][i]) * buf[i];
      denom[i] += std::norm(contrast[j][i]);
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (denom[i] == 0.0) {
      // The zero-frequency bin never transfers phase contrast; leave the
      // mean at zero rather than failing.
      if (i == 0) {
        acc[i] = complexd{0.0, 0.0};
        continue;
      }
      throw std::invalid_argument(
          "ctf_retrieve: no state transfers frequency index " + freq_label(g, i) +
          " and reg = 0");
    }
    acc[i] /= denom[i] * static_cast<double>(g.size());
  }
  fft::backward_2d(g.nx, g.ny, acc.data());

  RealField phi(g);
  for (std::size_t i = 0; i < phi.v.size(); ++i) phi.v[i] = acc[i].real();
  return phi;
}

PaganinResult paganin_thickness(const RealField& image, double i0, double delta, double mu,
                                double distance, WarningLog* log) {
  require_finite(image, "paganin_thickness");
  if (!(i0 > 0.0)) throw std::invalid_argument("paganin_thickness: I0 must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("paganin_thickness: mu must be > 0");
  if (!(delta >= 0.0)) throw std::invalid_argument("paganin_thickness: delta must be >= 0");
  if (!(distance >= 0.0))
    throw std::invalid_argument("paganin_thickness: propagation distance must be >= 0");

  const Grid2D& g = image.grid;
  std::vector<complexd> buf(g.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = complexd{image.v[i] / i0, 0.0};
  fft::forward_2d(g.nx, g.ny, buf.data());
  const double coeff = delta * distance / mu;
  const double scale = 1.0 / static_cast<double>(g.size());
  for (int n = 0; n < g.ny; ++n) {
    const double ky2 = g.ky(n) * g.ky(n);
    for (int m = 0; m < g.nx; ++m) {
      const double kx = g.kx(m);
      buf[static_cast<std::size_t>(n) * g.nx + m] *=
          scale / (1.0 + coeff * (kx * kx + ky2));
    }
  }
  fft::backward_2d(g.nx, g.ny, buf.data());

  double peak = 0.0;
  for (const complexd& c : buf) peak = std::max(peak, c.real());
  if (!(peak > 0.0))
    throw std::invalid_argument("paganin_thickness: filtered image has no positive intensity");
  const double floor = 1e-12 * peak;

  PaganinResult res{RealField(g), 0};
  for (std::size_t i = 0; i < buf.size(); ++i) {
    double v = buf[i].real();
    if (v < floor) {
      v = floor;
      ++res.clamped;
    }
    res.thickness.v[i] = -std::log(v) / mu;
  }
  if (res.clamped > 0) {
    const double fraction = static_cast<double>(res.clamped) / static_cast<double>(g.size());
    if (fraction > 0.01)
      warn(log, "paganin.clamped", "more than 1% of filtered pixels were floored before the log",
           {{"clamped_pixels", static_cast<double>(res.clamped)}, {"fraction", fraction}});
  }
  return res;
}

RealField gradient_forward(const RealField& i_in, const RealField& phase,
                           const LinearTFState& state, double wavelength, double psf_width,
                           WarningLog* log) {
  require_finite(phase, "gradient_forward");
  require_same_grid(i_in.grid, phase.grid, "gradient_forward");
  if (!(wavelength > 0.0))
    throw std::invalid_argument("gradient_forward: wavelength must be positive");
  if (!(psf_width >= 0.0))
    throw std::invalid_argument("gradient_forward: psf width must be >= 0");
  const Grid2D& g = i_in.grid;
  check_tau(state, g, log);

  const std::vector<double> dlog = log_derivative(g, i_in, "gradient_forward");
  const std::vector<double> dphi = row_derivative(g, phase.v);

  const double re2 = 2.0 * state.tau.real();
  const double im = state.tau.imag();
  const double t2 = std::norm(state.tau);

  RealField out(g);
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const double ratio = 1.0 + re2 * dphi[i] + im * dlog[i] + t2 * dphi[i] * dphi[i] +
                         0.25 * t2 * dlog[i] * dlog[i];
    out.v[i] = i_in.v[i] * ratio;
  }
  smear_rows(g, out.v, psf_width);
  return out;
}

DarkfieldResult darkfield_solve(const DarkfieldMeasurement& a, const DarkfieldMeasurement& b,
                                const LinearTFState& tau_a, const LinearTFState& tau_b,
                                double wavelength, WarningLog* log) {
  require_finite(a.i_out, "darkfield_solve");
  require_finite(b.i_out, "darkfield_solve");
  require_same_grid(a.i_in.grid, a.i_out.grid, "darkfield_solve");
  require_same_grid(a.i_in.grid, b.i_in.grid, "darkfield_solve");
  require_same_grid(a.i_in.grid, b.i_out.grid, "darkfield_solve");
  if (!(wavelength > 0.0))
    throw std::invalid_argument("darkfield_solve: wavelength must be positive");
  const Grid2D& g = a.i_in.grid;
  check_tau(tau_a, g, log);
  check_tau(tau_b, g, log);

  const double k = 2.0 * std::numbers::pi / wavelength;
  const double k2 = k * k;
  // Coefficient rows (2 Re tau, k^2 |tau|^2) per state; the system is
  // singular when the rows are proportional.
  const double ca1 = 2.0 * tau_a.tau.real(), ca2 = k2 * std::norm(tau_a.tau);
  const double cb1 = 2.0 * tau_b.tau.real(), cb2 = k2 * std::norm(tau_b.tau);
  const double det = ca1 * cb2 - cb1 * ca2;
  const double row_a = std::hypot(ca1, ca2), row_b = std::hypot(cb1, cb2);
  if (std::abs(det) <= 1e-12 * row_a * row_b)
    throw std::invalid_argument(
        "darkfield_solve: the two states have proportional coefficient rows (singular system)");

  const std::vector<double> dlog_a = log_derivative(g, a.i_in, "darkfield_solve");
  const std::vector<double> dlog_b = log_derivative(g, b.i_in, "darkfield_solve");
  const double t2a = std::norm(tau_a.tau), t2b = std::norm(tau_b.tau);

  DarkfieldResult res{RealField(g), RealField(g), 0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(a.i_in.v[i] > 0.0) || !(b.i_in.v[i] > 0.0))
      throw std::invalid_argument("darkfield_solve: input intensity must be > 0 everywhere");
    const double ya = a.i_out.v[i] / a.i_in.v[i] - 1.0 - tau_a.tau.imag() * dlog_a[i] -
                      0.25 * t2a * dlog_a[i] * dlog_a[i];
    const double yb = b.i_out.v[i] / b.i_in.v[i] - 1.0 - tau_b.tau.imag() * dlog_b[i] -
                      0.25 * t2b * dlog_b[i] * dlog_b[i];
    res.dphi1_dx.v[i] = (cb2 * ya - ca2 * yb) / det;
    double t = (ca1 * yb - cb1 * ya) / det;
    if (t < 0.0) {
      t = 0.0;
      ++res.negative_theta2;
    }
    res.theta2.v[i] = t;
  }
  if (res.negative_theta2 > 0)
    warn(log, "darkfield.negative_theta2", "negative theta^2 solutions clamped to zero",
         {{"clamped_pixels", static_cast<double>(res.negative_theta2)}});
  return res;
}

}  // namespace xpci
