#pragma once

#include <complex>
#include <span>
#include <vector>

namespace thzmono::detail {

/// Unnormalized inverse DFT, out[k] = sum_n in[n] exp(+2 pi i n k / N) with
/// N = out.size(); the input is zero-padded (or truncated) to N. Thread-safe
/// for concurrent calls.
void idft(std::span<const std::complex<double>> in,
          std::span<std::complex<double>> out);

inline std::vector<std::complex<double>> idft_zero_padded(
    std::span<const std::complex<double>> in, int n_out) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n_out));
  idft(in, out);
  return out;
}

}  // namespace thzmono::detail
