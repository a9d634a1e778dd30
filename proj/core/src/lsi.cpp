#include "xpci/lsi.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "xpci/fft.hpp"

namespace xpci {

namespace {

constexpr double kGainTol = 1e-12;
// Polynomial order cap: keeps kx^m finite in double for any sane grid.
constexpr int kMaxOrder = 12;

void check_passive(const std::vector<complexd>& values, const Grid2D& grid, bool allow_gain,
                   const char* what) {
  if (allow_gain) return;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) > 1.0 + kGainTol) {
      const int m = static_cast<int>(i) % grid.nx;
      const int n = static_cast<int>(i) / grid.nx;
      throw std::invalid_argument(std::string(what) + ": |T| > 1 at frequency index (" +
                                  std::to_string(Grid2D::freq_index(m, grid.nx)) + ", " +
                                  std::to_string(Grid2D::freq_index(n, grid.ny)) +
                                  "); a passive system cannot amplify");
    }
  }
}

}  // namespace

void validate(const AberrationSet& ab) {
  for (const auto& [mn, a] : ab.coeff) {
    const auto [m, n] = mn;
    if (m < 0 || n < 0)
      throw std::invalid_argument("AberrationSet: powers must be non-negative");
    if (m + n > kMaxOrder)
      throw std::invalid_argument("AberrationSet: total order " + std::to_string(m + n) +
                                  " exceeds the cap of " + std::to_string(kMaxOrder));
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw std::invalid_argument("AberrationSet: non-finite coefficient");
  }
}

TransferFunction make_transfer_function(const Grid2D& grid, std::vector<complexd> values,
                                        bool allow_gain) {
  if (values.size() != grid.size())
    throw std::invalid_argument("TransferFunction: sample count does not match grid");
  for (const complexd& c : values)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("TransferFunction: non-finite sample");
  check_passive(values, grid, allow_gain, "TransferFunction");
  return TransferFunction{grid, std::move(values)};
}

TransferFunction transfer_from_aberrations(const Grid2D& grid, const AberrationSet& ab,
                                           bool allow_gain) {
  validate(ab);
  std::vector<complexd> values(grid.size());
  for (int n = 0; n < grid.ny; ++n) {
    const double ky = grid.ky(n);
    for (int m = 0; m < grid.nx; ++m) {
      const double kx = grid.kx(m);
      // Phase chi = sum alpha_mn kx^m ky^n; T = exp(i chi). A positive
      // imaginary part of alpha_mn damps (never amplifies) only where the
      // monomial is non-negative; passivity is checked after sampling.
      complexd chi{0.0, 0.0};
      for (const auto& [mn, a] : ab.coeff)
        chi += a * std::pow(kx, mn.first) * std::pow(ky, mn.second);
      values[static_cast<std::size_t>(n) * grid.nx + m] =
          std::exp(complexd{-chi.imag(), chi.real()});
    }
  }
  check_passive(values, grid, allow_gain, "transfer_from_aberrations");
  return TransferFunction{grid, std::move(values)};
}

ComplexField apply_lsi(const ComplexField& field, const TransferFunction& tf) {
  require_finite(field, "apply_lsi");
  require_same_grid(field.grid, tf.grid, "apply_lsi");
  ComplexField out = field;
  fft::forward_2d(out.grid.nx, out.grid.ny, out.v.data());
  const double scale = 1.0 / static_cast<double>(out.grid.size());
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= tf.values[i] * scale;
  fft::backward_2d(out.grid.nx, out.grid.ny, out.v.data());
  return out;
}

ComplexField cascade(const ComplexField& input, const std::vector<CascadeStage>& stages,
                     WarningLog* log) {
  ComplexField psi = input;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    try {
      if (const auto* tr = std::get_if<TransmissionStage>(&stages[s])) {
        require_same_grid(psi.grid, tr->t.grid, "cascade transmission");
        if (psi.wavelength != tr->t.wavelength)
          throw std::invalid_argument("cascade transmission: wavelength mismatch");
        for (std::size_t i = 0; i < psi.v.size(); ++i) psi.v[i] *= tr->t.v[i];
      } else if (const auto* pr = std::get_if<PropagateStage>(&stages[s])) {
        psi = fresnel_propagate(psi, pr->plan, log);
      } else {
        psi = apply_lsi(psi, std::get<FilterStage>(stages[s]).tf);
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("cascade stage " + std::to_string(s) + ": " + e.what());
    }
  }
  return psi;
}

std::vector<complexd> contrast_factor(const TransferFunction& tf) {
  const Grid2D& g = tf.grid;
  const complexd omega = tf.omega();
  if (std::abs(omega.imag()) > 1e-12 * std::abs(omega) || omega == complexd{0.0, 0.0})
    throw std::invalid_argument(
        "contrast_factor: bright-field factor Omega = T(0,0) must be real and nonzero");
  std::vector<complexd> c(g.size());
  const complexd unit_i{0.0, 1.0};
  for (int n = 0; n < g.ny; ++n) {
    const int nr = (g.ny - n) % g.ny;  // index of -ky; Nyquist maps to itself
    for (int m = 0; m < g.nx; ++m) {
      const int mr = (g.nx - m) % g.nx;
      const complexd t = tf.values[static_cast<std::size_t>(n) * g.nx + m];
      const complexd t_reflected = tf.values[static_cast<std::size_t>(nr) * g.nx + mr];
      // C = -2 Omega (T(k) - conj(T(-k))) / (2i) = i Omega (T(k) - conj(T(-k))),
      // the first-order response of |LSI[exp(i phi)]|^2 to a real phase map.
      c[static_cast<std::size_t>(n) * g.nx + m] =
          unit_i * omega.real() * (t - std::conj(t_reflected));
    }
  }
  return c;
}

RealField weak_phase_image(const RealField& phase, const TransferFunction& tf) {
  require_finite(phase, "weak_phase_image");
  require_same_grid(phase.grid, tf.grid, "weak_phase_image");
  const std::vector<complexd> c = contrast_factor(tf);
  const double omega2 = std::norm(tf.omega());

  std::vector<complexd> buf(phase.v.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = complexd{phase.v[i], 0.0};
  fft::forward_2d(phase.grid.nx, phase.grid.ny, buf.data());
  const double scale = 1.0 / static_cast<double>(phase.grid.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= c[i] * scale;
  fft::backward_2d(phase.grid.nx, phase.grid.ny, buf.data());

  // C(k) is Hermitian for real Omega, so the image is real up to rounding.
  RealField img(phase.grid);
  for (std::size_t i = 0; i < img.v.size(); ++i) img.v[i] = omega2 + buf[i].real();
  return img;
}

}  // namespace xpci
