#pragma once

#include <complex>
#include <span>
#include <vector>

#include "thzmono/synth.hpp"

namespace thzmono {

enum class Window { rect, hann };

Window window_from_string(const std::string& s);
const char* to_string(Window w);

/// Power-delay profile of one CFR row. The delay grid is uniform with step
/// exactly 1/B over the unambiguous range n_freq/B.
struct Pdp {
  std::vector<double> delays_s;
  std::vector<double> power_db;
  double angle_deg = 0.0;

  int peak_bin() const;
  double peak_power_db() const;
};

/// Power-angle-delay profile: one PDP row per rotation angle.
struct Padp {
  std::vector<double> angles_deg;
  std::vector<double> delays_s;
  std::vector<double> power_db;  // row-major, angle x delay

  double at(int angle, int bin) const {
    return power_db[static_cast<std::size_t>(angle) * delays_s.size() +
                    static_cast<std::size_t>(bin)];
  }
};

/// Inverse DFT of one (optionally windowed) CFR row, 1/N-normalized so a
/// unit-amplitude on-bin tone peaks at 0 dB. The window is energy-normalized:
/// total linear power is window-invariant for white inputs.
Pdp cfr_to_pdp(std::span<const std::complex<double>> row,
               const FrequencyGrid& freqs, Window window = Window::rect,
               double angle_deg = 0.0);

Padp compute_padp(const DirectionalCfr& cfr, Window window = Window::rect,
                  int workers = 1);

/// Noise floor from the guard tail of a PDP: median linear power of all bins
/// with delay > guard_delay_s, converted to the mean-equivalent level in dB
/// (median of an exponential is ln 2 times the mean). Returns -inf when the
/// tail is identically zero (floor undefined).
double estimate_noise_floor(const Pdp& pdp, double guard_delay_s = 70e-9);

/// Linear-power sum of the PDP (Parseval check helper).
double pdp_total_linear_power(const Pdp& pdp);

}  // namespace thzmono
