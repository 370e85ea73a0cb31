#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "thzmono/synth.hpp"

namespace thzmono {

struct MpcEstimate {
  std::complex<double> amplitude;
  double delay_s = 0.0;
  double power_db = 0.0;  ///< 10 log10 |amplitude|^2

  double phase_rad() const { return std::arg(amplitude); }
};

/// Per-rotation-angle estimate: the extracted MPC list (descending power,
/// every entry at least threshold_offset_db above the row's noise floor)
/// plus the mean residual level after reconstruction.
struct AngleEstimate {
  double angle_deg = 0.0;
  std::vector<MpcEstimate> mpcs;
  double residual_power_db = 0.0;
  double noise_floor_db = 0.0;
};

struct EstimateSet {
  int pose_index = 0;
  std::vector<AngleEstimate> angles;

  std::size_t total_mpcs() const {
    std::size_t n = 0;
    for (const auto& a : angles) n += a.mpcs.size();
    return n;
  }
};

struct SageConfig {
  double threshold_offset_db = 10.0;  ///< stop offset above the noise floor
  int max_paths_per_angle = 50;
  int em_max_iters = 20;
  double delay_tol_s = 1e-13;  ///< sweep convergence: largest delay move
  int refine_grid_factor = 64;  ///< delay grid refinement below one bin

  void validate() const;
};

/// Element-wise SAGE over one CFR row. New paths are initialized at the
/// strongest residual peak (CLEAN-style successive cancellation), the delay
/// refined by maximizing the matched-filter correlation magnitude on a
/// refine_grid_factor-times finer grid with parabolic interpolation, and the
/// amplitudes re-solved jointly by least squares. Expectation/maximization
/// sweeps then cycle over the paths until no delay moves by more than
/// delay_tol_s; extraction stops once the residual peak drops below
/// noise_floor_db + threshold_offset_db or max_paths is reached.
/// noise_floor_db must be finite; an all-zero row yields an empty estimate.
AngleEstimate estimate_angle(std::span<const std::complex<double>> row,
                             const FrequencyGrid& freqs, const SageConfig& cfg,
                             double noise_floor_db, double angle_deg = 0.0);

/// Sum of alpha * exp(-j 2 pi f tau) over the grid; the residual-validation
/// counterpart of estimate_angle.
std::vector<std::complex<double>> reconstruct_row(const AngleEstimate& est,
                                                  const FrequencyGrid& freqs);

/// estimate_angle over every row with a row-local noise floor estimated from
/// the PDP guard tail (or noise_floor_override when given, e.g. for
/// noiseless data). Rows whose floor is undefined produce empty estimates
/// with a warning on stderr. Row order in the result is the grid order and
/// the content is identical for any worker count.
EstimateSet estimate_all(const DirectionalCfr& cfr, const SageConfig& cfg,
                         int workers = 1,
                         std::optional<double> noise_floor_override = {},
                         double guard_delay_s = 70e-9);

}  // namespace thzmono
