#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "support/testutil.hpp"
#include "xpci/field.hpp"
#include "xpci/grid.hpp"

using namespace xpci;
using testutil::rel_err;

TEST_SUITE("field") {

TEST_CASE("grid construction rejects degenerate shapes") {
  CHECK_THROWS_AS(Grid2D(1, 8, 1e-6, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(Grid2D(8, 1, 1e-6, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(Grid2D(8, 8, 0.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(Grid2D(8, 8, 1e-6, -1e-6), std::invalid_argument);
  CHECK_NOTHROW(Grid2D(2, 2, 1e-6, 1e-6));
}

TEST_CASE("grid coordinates are centred and frequencies follow fft order") {
  const Grid2D g(8, 6, 2e-6, 3e-6);
  CHECK(g.x(0) == doctest::Approx(-8e-6));
  CHECK(g.x(4) == doctest::Approx(0.0));
  CHECK(g.y(3) == doctest::Approx(0.0));

  // Signed DFT index layout: 0, 1, ..., n/2-1, -n/2, ..., -1.
  CHECK(g.kx(0) == 0.0);
  CHECK(g.kx(1) == doctest::Approx(2.0 * std::numbers::pi / (8 * 2e-6)));
  CHECK(g.kx(4) == doctest::Approx(-4 * 2.0 * std::numbers::pi / (8 * 2e-6)));
  CHECK(g.kx(7) == doctest::Approx(-2.0 * std::numbers::pi / (8 * 2e-6)));
  CHECK(g.kx_nyquist() == doctest::Approx(std::numbers::pi / g.dx));
  CHECK(g.ky_nyquist() == doctest::Approx(std::numbers::pi / g.dy));
}

TEST_CASE("complex field requires a positive wavelength") {
  const Grid2D g(4, 4, 1e-6, 1e-6);
  CHECK_THROWS_AS(ComplexField(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ComplexField(g, -1e-10), std::invalid_argument);
  const ComplexField f(g, 1e-10);
  CHECK(f.wavenumber() == doctest::Approx(2.0 * std::numbers::pi / 1e-10));
  CHECK(f.v.size() == g.size());
}

TEST_CASE("require_finite rejects NaN and infinity") {
  const Grid2D g(4, 4, 1e-6, 1e-6);
  RealField r(g, 1.0);
  CHECK_NOTHROW(require_finite(r, "test"));
  r.v[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(require_finite(r, "test"), std::invalid_argument);

  ComplexField c(g, 1e-10, complexd{1.0, 0.0});
  CHECK_NOTHROW(require_finite(c, "test"));
  c.v[3] = complexd{0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(require_finite(c, "test"), std::invalid_argument);
}

TEST_CASE("intensity_and_phase handles the unit, rotated and wrapped cases") {
  const Grid2D g(8, 8, 1e-6, 1e-6);

  SUBCASE("psi = 1 gives unit intensity and zero phase") {
    const ComplexField f(g, 1e-10, complexd{1.0, 0.0});
    const auto ip = intensity_and_phase(f);
    for (double v : ip.intensity.v) CHECK(v == doctest::Approx(1.0));
    for (double v : ip.phase.v) CHECK(v == doctest::Approx(0.0));
  }

  SUBCASE("psi = i gives phase pi/2") {
    const ComplexField f(g, 1e-10, complexd{0.0, 1.0});
    const auto ip = intensity_and_phase(f);
    for (double v : ip.intensity.v) CHECK(v == doctest::Approx(1.0));
    for (double v : ip.phase.v) CHECK(v == doctest::Approx(std::numbers::pi / 2));
  }

  SUBCASE("psi = 2 exp(i 3.5) wraps into (-pi, pi]") {
    const ComplexField f(g, 1e-10, std::polar(2.0, 3.5));
    const auto ip = intensity_and_phase(f);
    for (double v : ip.intensity.v) CHECK(rel_err(v, 4.0) < 1e-12);
    // 3.5 - 2 pi, evaluated independently.
    for (double v : ip.phase.v) CHECK(rel_err(v, -2.783185307179586) < 1e-12);
  }

  SUBCASE("zero amplitude pixels get phase 0") {
    ComplexField f(g, 1e-10, complexd{0.0, 1.0});
    f.at(2, 3) = complexd{0.0, 0.0};
    const auto ip = intensity_and_phase(f);
    CHECK(ip.phase.at(2, 3) == 0.0);
    CHECK(ip.intensity.at(2, 3) == 0.0);
  }

  SUBCASE("phase stays in (-pi, pi] and intensity >= 0 on random data") {
    const ComplexField f = testutil::random_field(g, 1e-10, 7);
    const auto ip = intensity_and_phase(f);
    for (double v : ip.phase.v) {
      CHECK(v > -std::numbers::pi);
      CHECK(v <= std::numbers::pi);
    }
    for (double v : ip.intensity.v) CHECK(v >= 0.0);
  }
}

TEST_CASE("transverse_poynting") {
  const Grid2D g(32, 32, 1e-6, 1e-6);

  SUBCASE("plane wave carries no transverse flux") {
    const ComplexField f(g, 1e-10, complexd{1.0, 0.0});
    const VectorField2D s = transverse_poynting(f);
    for (double v : s.x) CHECK(v == 0.0);
    for (double v : s.y) CHECK(v == 0.0);
  }

  SUBCASE("tilted plane wave gives S = (kappa, 0)") {
    // On-grid spatial frequency so the field is exactly periodic.
    const double kappa = g.kx(3);
    ComplexField f(g, 1e-10);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) f.at(ix, iy) = std::polar(1.0, kappa * g.x(ix));
    const VectorField2D s = transverse_poynting(f);
    for (double v : s.x) CHECK(rel_err(v, kappa) < 1e-10);
    for (double v : s.y) CHECK(std::abs(v) < 1e-10 * kappa);
  }

  SUBCASE("zero-intensity pixels carry zero flux") {
    ComplexField f(g, 1e-10);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        f.at(ix, iy) = (ix < 16) ? std::polar(1.0, 0.3 * ix) : complexd{0.0, 0.0};
    const VectorField2D s = transverse_poynting(f);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 16; ix < g.nx; ++ix) {
        CHECK(s.x[static_cast<std::size_t>(iy) * g.nx + ix] == 0.0);
        CHECK(s.y[static_cast<std::size_t>(iy) * g.nx + ix] == 0.0);
      }
  }
}

}  // TEST_SUITE
