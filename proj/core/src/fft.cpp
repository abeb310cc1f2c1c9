#include "vlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "vlab/types.hpp"

namespace vlab::fft {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans;

  fftw_plan get(int ny, int nx, bool fwd) {
    std::lock_guard lock(mu);
    auto key = std::make_tuple(ny, nx, fwd);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    const std::size_t nr = static_cast<std::size_t>(ny) * nx;
    const std::size_t nc = static_cast<std::size_t>(ny) * (nx / 2 + 1);
    double* r = fftw_alloc_real(nr);
    fftw_complex* c = fftw_alloc_complex(nc);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = fwd ? fftw_plan_dft_r2c_2d(ny, nx, r, c, flags)
                      : fftw_plan_dft_c2r_2d(ny, nx, c, r, flags);
    fftw_free(r);
    fftw_free(c);
    if (p == nullptr) throw NumericalFailure("fftw planning failed");
    plans.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void forward(int ny, int nx, std::span<const double> in, std::span<Complex> out) {
  require(in.size() == static_cast<std::size_t>(ny) * nx, "fft::forward: input size mismatch");
  require(out.size() == static_cast<std::size_t>(ny) * (nx / 2 + 1),
          "fft::forward: output size mismatch");
  fftw_plan p = cache().get(ny, nx, true);
  // r2c does not modify its input.
  fftw_execute_dft_r2c(p, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse(int ny, int nx, std::span<const Complex> in, std::span<double> out) {
  require(in.size() == static_cast<std::size_t>(ny) * (nx / 2 + 1),
          "fft::inverse: input size mismatch");
  require(out.size() == static_cast<std::size_t>(ny) * nx, "fft::inverse: output size mismatch");
  fftw_plan p = cache().get(ny, nx, false);
  std::vector<Complex> scratch(in.begin(), in.end());  // c2r destroys its input
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double s = 1.0 / (static_cast<double>(ny) * nx);
  for (double& v : out) v *= s;
}

int good_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace vlab::fft
