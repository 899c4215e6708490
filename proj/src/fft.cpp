#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace sparsehm::fft {
namespace {

enum class Kind { kR2C, kC2R, kC2CBackward };

// FFTW_UNALIGNED lets the plans run on std::vector storage of any alignment,
// and FFTW_ESTIMATE keeps plan choice independent of timing measurements.
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Kind kind, int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({kind, n});
    if (it != plans_.end()) return it->second;
    fftw_plan plan = nullptr;
    // Scratch buffers only serve the planner; execution uses caller arrays.
    std::vector<double> real(static_cast<std::size_t>(n));
    std::vector<Complex> cplx(static_cast<std::size_t>(n));
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    switch (kind) {
      case Kind::kR2C:
        plan = fftw_plan_dft_r2c_1d(n, real.data(), c, kFlags);
        break;
      case Kind::kC2R:
        plan = fftw_plan_dft_c2r_1d(n, c, real.data(), kFlags);
        break;
      case Kind::kC2CBackward: {
        std::vector<Complex> out(static_cast<std::size_t>(n));
        plan = fftw_plan_dft_1d(n, c, reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                kFlags);
        break;
      }
    }
    plans_.emplace(std::make_tuple(kind, n), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<Kind, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

std::vector<Complex> forward_real(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x.begin(), x.end());
  std::vector<Complex> out(x.size() / 2 + 1);
  fftw_execute_dft_r2c(cache().get(Kind::kR2C, n), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> inverse_real(std::span<const Complex> half_spectrum, std::size_t n) {
  // c2r overwrites its input.
  std::vector<Complex> in(half_spectrum.begin(), half_spectrum.end());
  in.resize(n / 2 + 1);
  std::vector<double> out(n);
  fftw_execute_dft_c2r(cache().get(Kind::kC2R, static_cast<int>(n)),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<Complex> inverse_complex(std::span<const Complex> spectrum) {
  const std::size_t n = spectrum.size();
  std::vector<Complex> in(spectrum.begin(), spectrum.end());
  std::vector<Complex> out(n);
  fftw_execute_dft(cache().get(Kind::kC2CBackward, static_cast<int>(n)),
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (Complex& v : out) v *= scale;
  return out;
}

}  // namespace sparsehm::fft
