#include "thzmono/sage.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "fft.hpp"
#include "thzmono/errors.hpp"
#include "thzmono/padp.hpp"
#include "thzmono/parallel.hpp"

namespace thzmono {

namespace {

using Cplx = std::complex<double>;

/// sum_{k=0}^{n-1} exp(+j 2 pi k x); x is reduced mod 1 first.
Cplx dirichlet_sum(int n, double x) {
  const double xr = x - std::round(x);
  if (xr == 0.0) return {static_cast<double>(n), 0.0};
  const double num = std::sin(kPi * n * xr);
  const double den = std::sin(kPi * xr);
  return std::polar(num / den, kPi * (n - 1) * xr);
}

/// Closed form of sum_n exp(+j 2 pi f_n dtau) (the steering-vector inner
/// product between two delays dtau apart).
Cplx steering_inner(const FrequencyGrid& g, double dtau) {
  return std::polar(1.0, 2.0 * kPi * g.f_start_hz * dtau) *
         dirichlet_sum(g.n, g.f_step_hz * dtau);
}

/// Correlator against a fixed vector: C(tau) = sum_n v_n exp(+j 2 pi f_n tau),
/// evaluated with one phasor recurrence per call.
Cplx correlate(std::span<const Cplx> v, const FrequencyGrid& g, double tau) {
  const Cplx step = std::polar(1.0, 2.0 * kPi * g.f_step_hz * tau);
  Cplx ph = std::polar(1.0, 2.0 * kPi * g.f_start_hz * tau);
  Cplx acc{0.0, 0.0};
  for (int n = 0; n < g.n; ++n) {
    if ((n & 255) == 0) ph = std::polar(1.0, 2.0 * kPi * g[n] * tau);
    acc += v[static_cast<std::size_t>(n)] * ph;
    ph *= step;
  }
  return acc;
}

double sq_norm(std::span<const Cplx> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return s;
}

struct PathState {
  Cplx amplitude;
  double delay_s = 0.0;
};

/// Scan |C|^2 on a uniform grid around tau_center and return the best tau
/// after parabolic interpolation of the three samples bracketing the max.
double refine_delay(std::span<const Cplx> v, const FrequencyGrid& g,
                    double tau_center, double half_span, int n_steps) {
  const double step = 2.0 * half_span / n_steps;
  double best_tau = tau_center;
  double best_val = -1.0;
  int best_i = 0;
  std::vector<double> vals(static_cast<std::size_t>(n_steps + 1));
  for (int i = 0; i <= n_steps; ++i) {
    const double tau = tau_center - half_span + i * step;
    const double val = std::norm(correlate(v, g, tau));
    vals[static_cast<std::size_t>(i)] = val;
    if (val > best_val) {
      best_val = val;
      best_tau = tau;
      best_i = i;
    }
  }
  if (best_i > 0 && best_i < n_steps) {
    const double ym = vals[static_cast<std::size_t>(best_i - 1)];
    const double y0 = vals[static_cast<std::size_t>(best_i)];
    const double yp = vals[static_cast<std::size_t>(best_i + 1)];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
      const double frac = 0.5 * (ym - yp) / denom;
      if (std::abs(frac) <= 1.0) best_tau += frac * step;
    }
  }
  return best_tau;
}

/// Local maximization of |C|^2 starting from tau0: one scan of the refined
/// grid across the initial bracket, then parabolic steps with a shrinking
/// bracket down to sub-tolerance precision.
double polish_delay(std::span<const Cplx> v, const FrequencyGrid& g,
                    double tau0, double initial_half_span, int first_steps,
                    double tol) {
  double tau = refine_delay(v, g, tau0, initial_half_span, first_steps);
  double span = 2.0 * initial_half_span / first_steps;
  while (span > tol * 0.25) {
    tau = refine_delay(v, g, tau, span, 4);
    span *= 0.25;
  }
  return tau;
}

/// Least-squares amplitudes for fixed delays against the full row.
void solve_amplitudes(std::span<const Cplx> row, const FrequencyGrid& g,
                      std::vector<PathState>& paths) {
  const int l = static_cast<int>(paths.size());
  if (l == 0) return;
  Eigen::MatrixXcd gram(l, l);
  Eigen::VectorXcd rhs(l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      gram(i, j) = steering_inner(g, paths[static_cast<std::size_t>(i)].delay_s -
                                         paths[static_cast<std::size_t>(j)].delay_s);
    }
    rhs(i) = correlate(row, g, paths[static_cast<std::size_t>(i)].delay_s);
  }
  Eigen::VectorXcd alpha = gram.ldlt().solve(rhs);
  if (!alpha.allFinite()) alpha = gram.colPivHouseholderQr().solve(rhs);
  for (int i = 0; i < l; ++i) paths[static_cast<std::size_t>(i)].amplitude = alpha(i);
}

void subtract_tone(std::span<Cplx> v, const FrequencyGrid& g, Cplx amp,
                   double tau) {
  accumulate_tone(v, g, -amp, tau);
}

void rebuild_residual(std::span<const Cplx> row, const FrequencyGrid& g,
                      const std::vector<PathState>& paths,
                      std::vector<Cplx>& residual) {
  residual.assign(row.begin(), row.end());
  for (const auto& p : paths) subtract_tone(residual, g, p.amplitude, p.delay_s);
}

/// Residual PDP peak: bin location from an unpadded transform, peak power
/// re-evaluated on the refined correlation so the stopping rule is not
/// biased by mid-bin scalloping.
struct ResidualPeak {
  double tau = 0.0;
  double power_db = -std::numeric_limits<double>::infinity();
};

ResidualPeak residual_peak(std::span<const Cplx> residual,
                           const FrequencyGrid& g, int refine_factor) {
  const int n = g.n;
  const auto spec = detail::idft_zero_padded(residual, n);
  int best = 0;
  double best_val = -1.0;
  for (int k = 0; k < n; ++k) {
    const double val = std::norm(spec[static_cast<std::size_t>(k)]);
    if (val > best_val) {
      best_val = val;
      best = k;
    }
  }
  const double bin = g.delay_bin_s();
  double tau = refine_delay(residual, g, best * bin, bin,
                            2 * refine_factor);
  const double max_delay = g.max_delay_s();
  tau = std::fmod(tau + max_delay, max_delay);
  ResidualPeak peak;
  peak.tau = tau;
  const double amp = std::abs(correlate(residual, g, tau)) / n;
  peak.power_db = amp > 0.0 ? 20.0 * std::log10(amp)
                            : -std::numeric_limits<double>::infinity();
  return peak;
}

}  // namespace

void SageConfig::validate() const {
  if (!(threshold_offset_db > 0.0)) throw SchemaError("sage: threshold offset <= 0");
  if (max_paths_per_angle < 1) throw SchemaError("sage: max_paths < 1");
  if (em_max_iters < 1) throw SchemaError("sage: em_max_iters < 1");
  if (!(delay_tol_s > 0.0)) throw SchemaError("sage: delay_tol <= 0");
  if (refine_grid_factor < 2) throw SchemaError("sage: refine_grid_factor < 2");
}

AngleEstimate estimate_angle(std::span<const Cplx> row,
                             const FrequencyGrid& freqs, const SageConfig& cfg,
                             double noise_floor_db, double angle_deg) {
  cfg.validate();
  if (static_cast<int>(row.size()) != freqs.n) {
    throw std::invalid_argument("estimate_angle: row length does not match grid");
  }
  if (!std::isfinite(noise_floor_db)) {
    throw std::invalid_argument("estimate_angle: noise floor must be finite");
  }

  AngleEstimate est;
  est.angle_deg = angle_deg;
  est.noise_floor_db = noise_floor_db;

  const int n = freqs.n;
  const double threshold_db = noise_floor_db + cfg.threshold_offset_db;
  const double bin = freqs.delay_bin_s();

  if (sq_norm(row) == 0.0) {
    est.residual_power_db = -std::numeric_limits<double>::infinity();
    return est;
  }

  std::vector<PathState> paths;
  std::vector<Cplx> residual(row.begin(), row.end());
  std::vector<Cplx> with_self(static_cast<std::size_t>(n));

  const auto run_em_sweeps = [&]() {
    for (int iter = 0; iter < cfg.em_max_iters; ++iter) {
      double max_move = 0.0;
      // The first sweep re-scans half a bin at the refined-grid resolution;
      // later sweeps only track residual sub-step drift.
      const double half_span = iter == 0 ? 0.5 * bin : 4.0 * bin / cfg.refine_grid_factor;
      const int first_steps = iter == 0 ? cfg.refine_grid_factor : 8;
      for (auto& p : paths) {
        // Expectation: the path's own signal plus the shared residual.
        with_self.assign(residual.begin(), residual.end());
        accumulate_tone(with_self, freqs, p.amplitude, p.delay_s);
        // Maximization, accepted only if the fit improves.
        const double tau_new = polish_delay(with_self, freqs, p.delay_s,
                                            half_span, first_steps,
                                            cfg.delay_tol_s);
        const Cplx amp_new = correlate(with_self, freqs, tau_new) /
                             static_cast<double>(n);
        std::vector<Cplx> candidate(with_self);
        subtract_tone(candidate, freqs, amp_new, tau_new);
        if (sq_norm(candidate) <= sq_norm(residual) + 1e-18) {
          max_move = std::max(max_move, std::abs(tau_new - p.delay_s));
          p.delay_s = tau_new;
          p.amplitude = amp_new;
          residual.swap(candidate);
        }
      }
      // Joint least-squares amplitude re-solve reduces mutual leakage bias.
      solve_amplitudes(row, freqs, paths);
      rebuild_residual(row, freqs, paths, residual);
      if (max_move <= cfg.delay_tol_s) break;
    }
  };

  while (static_cast<int>(paths.size()) < cfg.max_paths_per_angle) {
    const ResidualPeak peak = residual_peak(residual, freqs, cfg.refine_grid_factor);
    if (peak.power_db < threshold_db) break;
    PathState p;
    p.delay_s = peak.tau;
    p.amplitude = correlate(residual, freqs, peak.tau) / static_cast<double>(n);
    paths.push_back(p);
    solve_amplitudes(row, freqs, paths);
    rebuild_residual(row, freqs, paths, residual);
    run_em_sweeps();
  }

  // Keep only paths that clear the reporting threshold; re-solve after every
  // prune so the survivors absorb the removed energy.
  for (;;) {
    const auto weakest = std::min_element(
        paths.begin(), paths.end(), [](const PathState& a, const PathState& b) {
          return std::norm(a.amplitude) < std::norm(b.amplitude);
        });
    if (weakest == paths.end()) break;
    const double p_db = 10.0 * std::log10(std::norm(weakest->amplitude));
    if (p_db >= threshold_db) break;
    paths.erase(weakest);
    solve_amplitudes(row, freqs, paths);
  }
  rebuild_residual(row, freqs, paths, residual);

  est.mpcs.reserve(paths.size());
  for (const auto& p : paths) {
    MpcEstimate m;
    m.amplitude = p.amplitude;
    m.delay_s = p.delay_s;
    m.power_db = 10.0 * std::log10(std::norm(p.amplitude));
    est.mpcs.push_back(m);
  }
  std::sort(est.mpcs.begin(), est.mpcs.end(),
            [](const MpcEstimate& a, const MpcEstimate& b) {
              if (a.power_db != b.power_db) return a.power_db > b.power_db;
              return a.delay_s < b.delay_s;
            });
  const double res = sq_norm(residual) / (static_cast<double>(n) * n);
  est.residual_power_db = res > 0.0
                              ? 10.0 * std::log10(res)
                              : -std::numeric_limits<double>::infinity();
  return est;
}

std::vector<Cplx> reconstruct_row(const AngleEstimate& est,
                                  const FrequencyGrid& freqs) {
  std::vector<Cplx> row(static_cast<std::size_t>(freqs.n), Cplx{0.0, 0.0});
  for (const auto& m : est.mpcs) {
    accumulate_tone(row, freqs, m.amplitude, m.delay_s);
  }
  return row;
}

EstimateSet estimate_all(const DirectionalCfr& cfr, const SageConfig& cfg,
                         int workers,
                         std::optional<double> noise_floor_override,
                         double guard_delay_s) {
  cfg.validate();
  EstimateSet set;
  set.pose_index = cfr.pose_index;
  set.angles.resize(cfr.angles_deg.size());
  std::vector<unsigned char> floor_undefined(cfr.angles_deg.size(), 0);

  parallel_for(cfr.angles_deg.size(), workers, [&](std::size_t a) {
    const auto row = cfr.row(static_cast<int>(a));
    double floor_db;
    if (noise_floor_override) {
      floor_db = *noise_floor_override;
    } else {
      const Pdp pdp = cfr_to_pdp(row, cfr.freqs, Window::rect, cfr.angles_deg[a]);
      floor_db = estimate_noise_floor(pdp, guard_delay_s);
    }
    if (!std::isfinite(floor_db)) {
      floor_undefined[a] = 1;
      AngleEstimate empty;
      empty.angle_deg = cfr.angles_deg[a];
      empty.noise_floor_db = floor_db;
      empty.residual_power_db = -std::numeric_limits<double>::infinity();
      set.angles[a] = std::move(empty);
      return;
    }
    set.angles[a] = estimate_angle(row, cfr.freqs, cfg, floor_db,
                                   cfr.angles_deg[a]);
  });

  for (std::size_t a = 0; a < floor_undefined.size(); ++a) {
    if (floor_undefined[a]) {
      std::cerr << "warning: noise floor undefined at angle "
                << cfr.angles_deg[a] << " deg; row skipped\n";
    }
  }
  return set;
}

}  // namespace thzmono
