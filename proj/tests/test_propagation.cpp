#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "support/testutil.hpp"
#include "xpci/propagation.hpp"

using namespace xpci;
using testutil::max_abs_diff;
using testutil::rel_err;
using testutil::total_energy;

TEST_SUITE("propagation") {

TEST_CASE("plan and geometry validation") {
  PropagationPlan plan;
  plan.distance = 0.1;
  for (int p : {1, 2, 4}) {
    plan.pad_factor = p;
    CHECK_NOTHROW(validate(plan));
  }
  plan.pad_factor = 3;
  CHECK_THROWS_AS(validate(plan), std::invalid_argument);
  plan.pad_factor = 2;
  plan.distance = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(plan), std::invalid_argument);

  CHECK_THROWS_AS(validate(ConeBeamGeometry{0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ConeBeamGeometry{1.0, -0.1}), std::invalid_argument);
  CHECK(ConeBeamGeometry{0.1, 0.2}.magnification() == doctest::Approx(3.0));
}

TEST_CASE("a plane wave is an eigenfunction with eigenvalue exp(ikd)") {
  const Grid2D g(16, 16, 1e-6, 1e-6);
  const ComplexField f(g, 1e-10, complexd{1.0, 0.0});
  const double d = 1e-4;
  const ComplexField out = fresnel_propagate(f, {.distance = d, .pad_factor = 1});

  const double k = f.wavenumber();
  const complexd want{std::cos(k * d), std::sin(k * d)};
  double m = 0.0;
  for (const complexd& c : out.v) m = std::max(m, std::abs(c - want));
  CHECK(m < 1e-12);
}

TEST_CASE("gaussian beam diffraction matches the closed form") {
  const Grid2D g(256, 256, 1e-6, 1e-6);
  const double lambda = 1e-10;
  const double sigma = 5e-6;
  const double z = 1.0;  // within the 2.56 m chirp sampling limit

  const ComplexField start = testutil::gaussian_beam(g, lambda, sigma, 0.0);
  const ComplexField got = fresnel_propagate(start, {.distance = z, .pad_factor = 1});
  const ComplexField want = testutil::gaussian_beam(g, lambda, sigma, z);

  CHECK(max_abs_diff(got.v, want.v) < 1e-10);
  CHECK(rel_err(total_energy(got), total_energy(start)) < 1e-12);
}

TEST_CASE("unpadded propagation is unitary and invertible") {
  const Grid2D g(64, 64, 1e-6, 1e-6);
  const ComplexField f = testutil::random_field(g, 1e-10, 31);

  SUBCASE("energy conservation") {
    const ComplexField out = fresnel_propagate(f, {.distance = 0.3, .pad_factor = 1});
    CHECK(rel_err(total_energy(out), total_energy(f)) < 1e-12);
  }
  SUBCASE("semigroup composition") {
    const ComplexField two = fresnel_propagate(
        fresnel_propagate(f, {.distance = 0.2, .pad_factor = 1}),
        {.distance = 0.3, .pad_factor = 1});
    const ComplexField one = fresnel_propagate(f, {.distance = 0.5, .pad_factor = 1});
    CHECK(testutil::rel_rms_diff(two.v, one.v) < 1e-10);
  }
  SUBCASE("back propagation inverts") {
    const ComplexField there = fresnel_propagate(f, {.distance = 0.25, .pad_factor = 1});
    const ComplexField back = fresnel_propagate(there, {.distance = -0.25, .pad_factor = 1});
    CHECK(max_abs_diff(back.v, f.v) < 1e-12);
  }
}

TEST_CASE("padding changes nothing for a beam that never reaches the frame edge") {
  const Grid2D g(128, 128, 1e-6, 1e-6);
  const ComplexField start = testutil::gaussian_beam(g, 1e-10, 5e-6, 0.0);
  const ComplexField p1 = fresnel_propagate(start, {.distance = 0.5, .pad_factor = 1});
  const ComplexField p2 = fresnel_propagate(start, {.distance = 0.5, .pad_factor = 2});
  const ComplexField p4 = fresnel_propagate(start, {.distance = 0.5, .pad_factor = 4});
  CHECK(max_abs_diff(p2.v, p1.v) < 1e-10);
  CHECK(max_abs_diff(p4.v, p2.v) < 1e-10);
}

TEST_CASE("chirp sampling guard fires on the tighter axis") {
  const Grid2D g(64, 32, 1e-6, 1e-6);  // limits: x 0.64 m, y 0.32 m
  const ComplexField f(g, 1e-10, complexd{1.0, 0.0});

  WarningLog quiet;
  fresnel_propagate(f, {.distance = 0.25, .pad_factor = 1}, &quiet);
  CHECK(quiet.empty());

  WarningLog loud;
  fresnel_propagate(f, {.distance = 0.4, .pad_factor = 1}, &loud);
  REQUIRE(loud.has("fresnel.sampling"));
  const Warning& w = loud.items().front();
  double limit_y = 0.0, distance = 0.0;
  for (const auto& [key, value] : w.data) {
    if (key == "limit_y_m") limit_y = value;
    if (key == "distance_m") distance = value;
  }
  CHECK(limit_y == doctest::Approx(0.32));
  CHECK(distance == doctest::Approx(0.4));

  WarningLog negative;
  fresnel_propagate(f, {.distance = -0.4, .pad_factor = 1}, &negative);
  CHECK(negative.has("fresnel.sampling"));
}

TEST_CASE("zero distance is the identity; apodization imprints the taper window") {
  const Grid2D g(64, 64, 1e-6, 1e-6);
  const ComplexField f = testutil::random_field(g, 1e-10, 8);

  const ComplexField same = fresnel_propagate(f, {.distance = 0.0, .pad_factor = 2});
  CHECK(max_abs_diff(same.v, f.v) < 1e-13);

  // At d = 0 the kernel is exactly 1, so the apodized output is the
  // raised-cosine window itself: zero on the frame edge, one inside the
  // outer 8% margin.
  const ComplexField ones(g, 1e-10, complexd{1.0, 0.0});
  const ComplexField win =
      fresnel_propagate(ones, {.distance = 0.0, .pad_factor = 1, .apodize = true});
  CHECK(std::abs(win.at(32, 32) - complexd{1.0, 0.0}) < 1e-13);
  CHECK(std::abs(win.at(0, 32)) < 1e-13);
  CHECK(std::abs(win.at(32, 0)) < 1e-13);
  const double band = std::abs(win.at(1, 32));  // inside the taper band
  CHECK(band > 0.01);
  CHECK(band < 0.5);
}

TEST_CASE("fresnel number") {
  CHECK(rel_err(fresnel_number(2e-6, 1.5e-10, 1e-2), 8.0 / 3.0) < 1e-12);
  CHECK(rel_err(fresnel_number(1e-5, 1.5e-10, 1e-3), 2000.0 / 3.0) < 1e-12);
  CHECK(rel_err(fresnel_number(2e-6, 1.5e-10, 1e-2, 2.0), 16.0 / 3.0) < 1e-12);
  CHECK(fresnel_number(0.0, 1e-10, 1.0) == 0.0);

  CHECK_THROWS_AS(fresnel_number(-1e-6, 1e-10, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(fresnel_number(1e-6, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(fresnel_number(1e-6, 1e-10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fresnel_number(1e-6, 1e-10, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(fresnel_number(1e-6, 1e-10, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("cone-beam image scaling") {
  const Grid2D g(32, 32, 1e-6, 1e-6);

  SUBCASE("contact image is the exit intensity on the same grid") {
    const ComplexField f = testutil::random_field(g, 1e-10, 3);
    const RealField img = spherical_wave_image(f, {1.0, 0.0});
    CHECK(img.grid == g);
    for (std::size_t i = 0; i < f.v.size(); ++i)
      CHECK(img.v[i] == doctest::Approx(std::norm(f.v[i])));
  }

  SUBCASE("uniform illumination dilutes by the magnification squared") {
    const ComplexField f(g, 1e-10, complexd{1.0, 0.0});
    const RealField img = spherical_wave_image(f, {1.0, 1.0}, 1);
    CHECK(img.grid.dx == doctest::Approx(2e-6));
    CHECK(img.grid.dy == doctest::Approx(2e-6));
    for (double v : img.v) CHECK(rel_err(v, 0.25) < 1e-12);
  }
}

}  // TEST_SUITE
