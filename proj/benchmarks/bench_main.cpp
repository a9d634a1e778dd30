// Microbenchmarks for the hot paths: free-space propagation, multislice
// stepping, and the two workhorse retrievals.

#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "xpci/lsi.hpp"
#include "xpci/multislice.hpp"
#include "xpci/propagation.hpp"
#include "xpci/retrieval.hpp"
#include "xpci/sample.hpp"

namespace {

xpci::ComplexField random_field(const xpci::Grid2D& g, double wavelength, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  xpci::ComplexField f(g, wavelength);
  for (auto& c : f.v) c = {u(rng), u(rng)};
  return f;
}

void bm_fresnel_propagate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int pad = static_cast<int>(state.range(1));
  const xpci::Grid2D g(n, n, 1e-6, 1e-6);
  const xpci::ComplexField f = random_field(g, 1e-10, 1);
  const xpci::PropagationPlan plan{0.05, pad, false};
  for (auto _ : state) {
    benchmark::DoNotOptimize(xpci::fresnel_propagate(f, plan));
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}

void bm_multislice(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int nz = static_cast<int>(state.range(1));
  const xpci::Grid2D g(n, n, 2e-6, 2e-6);
  xpci::RefractiveVolume vol;
  vol.nx = n;
  vol.ny = n;
  vol.nz = nz;
  vol.dx = 2e-6;
  vol.dy = 2e-6;
  vol.dz = 1e-3;
  vol.delta.resize(vol.size());
  vol.beta.assign(vol.size(), 0.0f);
  for (std::size_t i = 0; i < vol.size(); ++i)
    vol.delta[i] = 1e-9f * (1.0f + 0.5f * static_cast<float>(i % 13));
  const xpci::ComplexField entrance(g, 1e-10, {1.0, 0.0});
  xpci::MultisliceOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(xpci::multislice_propagate(entrance, vol, opts));
  }
  state.SetItemsProcessed(state.iterations() * vol.size());
}

void bm_paganin(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double wl = 0.5e-10;
  const double k = 2.0 * std::numbers::pi / wl;
  const double mu = 2.0 * k * 1e-9;
  const xpci::Grid2D g(n, n, 2.5e-6, 2.5e-6);
  const xpci::ComplexField t =
      xpci::transmission_function(xpci::sphere_phantom(g, 0.2e-3, 1e-6, 1e-9, wl));
  const xpci::PropagationPlan plan{0.3, 2, false};
  const xpci::ComplexField prop = xpci::fresnel_propagate(t, plan);
  xpci::RealField img(g);
  for (std::size_t i = 0; i < img.v.size(); ++i) img.v[i] = std::norm(prop.v[i]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(xpci::paganin_thickness(img, 1.0, 1e-6, mu, 0.3));
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}

void bm_ctf_retrieve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double wl = 1e-10;
  const double k = 2.0 * std::numbers::pi / wl;
  const xpci::Grid2D g(n, n, 1e-6, 1e-6);
  xpci::RealField phi(g);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      phi.at(ix, iy) = 0.01 * std::cos(2.0 * std::numbers::pi * 3.0 * ix / n) *
                       std::sin(2.0 * std::numbers::pi * 2.0 * iy / n);
  std::vector<xpci::RealField> images;
  std::vector<xpci::TransferFunction> tfs;
  for (const double dist : {0.05, 0.09, 0.14}) {
    xpci::AberrationSet ab;
    ab(2, 0) = xpci::complexd{-dist / (2.0 * k), 0.0};
    ab(0, 2) = xpci::complexd{-dist / (2.0 * k), 0.0};
    tfs.push_back(xpci::transfer_from_aberrations(g, ab));
    images.push_back(xpci::weak_phase_image(phi, tfs.back()));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(xpci::ctf_retrieve(images, tfs));
  }
  state.SetItemsProcessed(state.iterations() * g.size());
}

BENCHMARK(bm_fresnel_propagate)->Args({256, 1})->Args({256, 2})->Args({512, 2});
BENCHMARK(bm_multislice)->Args({128, 16})->Args({256, 32});
BENCHMARK(bm_paganin)->Arg(256)->Arg(512);
BENCHMARK(bm_ctf_retrieve)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
