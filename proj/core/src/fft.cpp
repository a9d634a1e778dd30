#include "xpci/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace xpci::fft {

namespace {

// FFTW plan creation is not thread safe; executing distinct plans on
// distinct buffers is. Plans are cached per shape and reused via the
// new-array execute interface (FFTW_UNALIGNED keeps that legal for
// arbitrarily aligned std::vector storage).
class PlanCache {
 public:
  fftw_plan get2d(int nx, int ny, int sign) {
    std::scoped_lock lock(mutex_);
    auto key = std::make_tuple(nx, ny, sign, 0);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> scratch(static_cast<std::size_t>(nx) * ny);
    // FFTW's row-major convention: first dimension is the slow one (ny rows).
    fftw_plan p = fftw_plan_dft_2d(ny, nx, scratch.data(), scratch.data(), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  fftw_plan get_rows(int nx, int ny, int sign) {
    std::scoped_lock lock(mutex_);
    auto key = std::make_tuple(nx, ny, sign, 1);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> scratch(static_cast<std::size_t>(nx) * ny);
    int n[] = {nx};
    fftw_plan p = fftw_plan_many_dft(1, n, ny, scratch.data(), nullptr, 1, nx,
                                     scratch.data(), nullptr, 1, nx, sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void execute(fftw_plan plan, complexd* data) {
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, raw, raw);
}

}  // namespace

void forward_2d(int nx, int ny, complexd* data) {
  execute(cache().get2d(nx, ny, FFTW_FORWARD), data);
}

void backward_2d(int nx, int ny, complexd* data) {
  execute(cache().get2d(nx, ny, FFTW_BACKWARD), data);
}

void forward_rows(int nx, int ny, complexd* data) {
  execute(cache().get_rows(nx, ny, FFTW_FORWARD), data);
}

void backward_rows(int nx, int ny, complexd* data) {
  execute(cache().get_rows(nx, ny, FFTW_BACKWARD), data);
}

ComplexField spectrum(const ComplexField& field) {
  ComplexField out = field;
  forward_2d(out.grid.nx, out.grid.ny, out.v.data());
  const double scale =
      std::sqrt(out.grid.dx * out.grid.dy / static_cast<double>(out.grid.size()));
  for (auto& c : out.v) c *= scale;
  return out;
}

ComplexField synthesize(const ComplexField& spec) {
  ComplexField out = spec;
  backward_2d(out.grid.nx, out.grid.ny, out.v.data());
  const double scale =
      1.0 / std::sqrt(out.grid.dx * out.grid.dy * static_cast<double>(out.grid.size()));
  for (auto& c : out.v) c *= scale;
  return out;
}

}  // namespace xpci::fft
