#include "thzmono/padp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fft.hpp"
#include "thzmono/errors.hpp"
#include "thzmono/parallel.hpp"

namespace thzmono {

Window window_from_string(const std::string& s) {
  if (s == "rect") return Window::rect;
  if (s == "hann") return Window::hann;
  throw SchemaError("unknown window '" + s + "' (expected rect or hann)");
}

const char* to_string(Window w) {
  return w == Window::rect ? "rect" : "hann";
}

int Pdp::peak_bin() const {
  return static_cast<int>(std::max_element(power_db.begin(), power_db.end()) -
                          power_db.begin());
}

double Pdp::peak_power_db() const { return power_db[static_cast<std::size_t>(peak_bin())]; }

Pdp cfr_to_pdp(std::span<const std::complex<double>> row,
               const FrequencyGrid& freqs, Window window, double angle_deg) {
  const int n = freqs.n;
  if (static_cast<int>(row.size()) != n) {
    throw std::invalid_argument("cfr_to_pdp: row length " +
                                std::to_string(row.size()) +
                                " does not match grid n_freq " +
                                std::to_string(n));
  }

  std::vector<std::complex<double>> windowed;
  std::span<const std::complex<double>> input = row;
  if (window == Window::hann) {
    windowed.resize(row.size());
    double energy = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (n - 1)));
      windowed[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(i)] * w;
      energy += w * w;
    }
    // Energy normalization: sum of squared taps equals n, so white-input
    // total power matches the rect window.
    const double scale = std::sqrt(static_cast<double>(n) / energy);
    for (auto& v : windowed) v *= scale;
    input = windowed;
  }

  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(n));
  detail::idft(input, spectrum);

  Pdp pdp;
  pdp.angle_deg = angle_deg;
  pdp.delays_s.resize(static_cast<std::size_t>(n));
  pdp.power_db.resize(static_cast<std::size_t>(n));
  const double bin = freqs.delay_bin_s();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int k = 0; k < n; ++k) {
    pdp.delays_s[static_cast<std::size_t>(k)] = k * bin;
    const double mag = std::abs(spectrum[static_cast<std::size_t>(k)]) * inv_n;
    pdp.power_db[static_cast<std::size_t>(k)] =
        mag > 0.0 ? 20.0 * std::log10(mag)
                  : -std::numeric_limits<double>::infinity();
  }
  return pdp;
}

Padp compute_padp(const DirectionalCfr& cfr, Window window, int workers) {
  Padp padp;
  padp.angles_deg = cfr.angles_deg;
  const int n = cfr.freqs.n;
  padp.delays_s.resize(static_cast<std::size_t>(n));
  const double bin = cfr.freqs.delay_bin_s();
  for (int k = 0; k < n; ++k) padp.delays_s[static_cast<std::size_t>(k)] = k * bin;
  padp.power_db.resize(cfr.angles_deg.size() * static_cast<std::size_t>(n));
  parallel_for(cfr.angles_deg.size(), workers, [&](std::size_t a) {
    const Pdp pdp = cfr_to_pdp(cfr.row(static_cast<int>(a)), cfr.freqs, window,
                               cfr.angles_deg[a]);
    std::copy(pdp.power_db.begin(), pdp.power_db.end(),
              padp.power_db.begin() + static_cast<std::ptrdiff_t>(a) * n);
  });
  return padp;
}

double estimate_noise_floor(const Pdp& pdp, double guard_delay_s) {
  if (pdp.delays_s.empty()) throw std::invalid_argument("estimate_noise_floor: empty PDP");
  if (guard_delay_s >= pdp.delays_s.back()) {
    throw std::invalid_argument("estimate_noise_floor: guard delay beyond the PDP range");
  }
  std::vector<double> tail;
  for (std::size_t k = 0; k < pdp.delays_s.size(); ++k) {
    if (pdp.delays_s[k] > guard_delay_s) {
      tail.push_back(db_to_lin(pdp.power_db[k]));
    }
  }
  if (tail.empty()) {
    throw std::invalid_argument("estimate_noise_floor: empty guard tail");
  }
  const auto mid = tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2);
  std::nth_element(tail.begin(), mid, tail.end());
  const double median = *mid;
  if (median <= 0.0) return -std::numeric_limits<double>::infinity();
  // Median-to-mean conversion for exponentially distributed bin powers.
  return lin_to_db(median / std::log(2.0));
}

double pdp_total_linear_power(const Pdp& pdp) {
  double sum = 0.0;
  for (double p : pdp.power_db) {
    if (std::isfinite(p)) sum += db_to_lin(p);
  }
  return sum;
}

}  // namespace thzmono
