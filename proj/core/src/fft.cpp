#include "fft.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include <fftw3.h>

namespace thzmono::detail {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is. Plans
// are created once per size with FFTW_UNALIGNED so they can be executed on
// arbitrary caller buffers via the new-array interface.
std::mutex plan_mutex;
std::map<int, fftw_plan>& plan_cache() {
  static std::map<int, fftw_plan> cache;
  return cache;
}

fftw_plan plan_for(int n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<std::complex<double>> dummy_in(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> dummy_out(static_cast<std::size_t>(n));
  fftw_plan p = fftw_plan_dft_1d(
      n, reinterpret_cast<fftw_complex*>(dummy_in.data()),
      reinterpret_cast<fftw_complex*>(dummy_out.data()), FFTW_BACKWARD,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache[n] = p;
  return p;
}

}  // namespace

void idft(std::span<const std::complex<double>> in,
          std::span<std::complex<double>> out) {
  const int n = static_cast<int>(out.size());
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(n), {0.0, 0.0});
  const std::size_t ncopy = std::min(in.size(), out.size());
  std::copy_n(in.begin(), ncopy, buf.begin());
  fftw_execute_dft(plan_for(n), reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace thzmono::detail
