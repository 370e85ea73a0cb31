#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "thzmono/geometry.hpp"

namespace thzmono {

/// Physical origin of a ground-truth path. Diffuse facets on window walls
/// are recorded as wall_diffuse (the specular window return keeps the window
/// tag); scatterer-zone facets are tagged scatterer.
enum class PathOrigin {
  wall_specular,
  wall_diffuse,
  corner_specular,
  window,
  scatterer,
};

const char* to_string(PathOrigin o);
PathOrigin path_origin_from_string(const std::string& s);

/// One physical path with boresight-referenced parameters: azimuth from the
/// rotation center, delay of the exact round trip when the antenna points at
/// the feature, and the complex amplitude seen at that pointing (two-way
/// boresight gain, free-space loss over the full round trip, material loss).
struct GroundTruthPath {
  std::complex<double> amplitude;
  double delay_s = 0.0;
  double azimuth_deg = 0.0;
  PathOrigin origin = PathOrigin::wall_diffuse;

  double power_db() const { return 20.0 * std::log10(std::abs(amplitude)); }
};

/// Directional channel frequency response of one pose: one complex row per
/// rotation angle over the frequency grid, plus the generating ground truth
/// (empty for blind datasets) and the noise seed.
struct DirectionalCfr {
  int pose_index = 0;
  std::vector<double> angles_deg;
  FrequencyGrid freqs;
  std::vector<std::complex<double>> data;  // row-major, angle x frequency
  std::vector<GroundTruthPath> truth;
  std::uint64_t seed = 0;

  int n_angles() const { return static_cast<int>(angles_deg.size()); }
  int n_freq() const { return freqs.n; }
  std::span<const std::complex<double>> row(int a) const {
    return {data.data() + static_cast<std::size_t>(a) * freqs.n,
            static_cast<std::size_t>(freqs.n)};
  }
  std::span<std::complex<double>> row(int a) {
    return {data.data() + static_cast<std::size_t>(a) * freqs.n,
            static_cast<std::size_t>(freqs.n)};
  }
};

/// One-way pattern gain in dBi at an offset from boresight:
/// G0 + max(-3 (2 theta / HPBW)^2, floor). The pattern phase is zero unless
/// the ripple hook is enabled.
double antenna_gain_db(const AntennaPattern& pattern, double offset_deg);

/// Pattern phase at an offset (radians); zero unless phase_ripple_rad != 0.
double antenna_phase_rad(const AntennaPattern& pattern, double offset_deg);

/// Rotation manifold coefficient [exp(j 2 pi f r cos(phi) / c)]^2; unit
/// modulus. With exact per-angle geometry this term is implicit in the traced
/// delays; it is exposed as the building block of the plane-wave form of the
/// signal model and for equivalence checks.
std::complex<double> rotation_manifold(double f_hz, double phi_deg, double r_m);

/// Ground truth for one pose: boresight-referenced paths with amplitudes.
/// Paths beyond the unambiguous delay range are dropped.
std::vector<GroundTruthPath> ground_truth_paths(const SceneModel& scene,
                                                const TrxPose& pose,
                                                const SounderConfig& cfg,
                                                std::uint64_t seed,
                                                double facet_size_m = 0.02);

/// Forward-simulate the directional CFR of one pose. Per rotation angle, all
/// paths are traced from the exact phase-center position and summed with
/// two-way pattern gain at their offset from boresight, free-space loss over
/// the full round trip, and material loss (diffuse power rides the
/// n cos^2 + b law relative to the owning wall's specular level). Complex
/// white noise is added per frequency bin so the delay-domain floor matches
/// cfg.noise_floor_db (set -inf to disable). Rows have independent RNG
/// streams derived from (seed, pose, angle): the result is bit-identical for
/// any worker count.
DirectionalCfr synthesize_cfr(const SceneModel& scene, const TrxPose& pose,
                              const SounderConfig& cfg, std::uint64_t seed,
                              int workers = 1, double facet_size_m = 0.02);

/// Same signal model over an explicit path list (no scene): each path is a
/// fixed point source at (amplitude, delay, azimuth) relative to a rotation
/// center at the origin; per-angle geometry is exact for the phase-center
/// motion when azimuth_radius_m > 0, and rows reduce to pure tones when it
/// is zero.
DirectionalCfr synthesize_cfr_from_paths(std::span<const GroundTruthPath> paths,
                                         const SounderConfig& cfg,
                                         std::uint64_t seed, int workers = 1,
                                         double azimuth_radius_m = 0.0);

/// Accumulate amp * exp(-j 2 pi f tau) over the grid into row.
void accumulate_tone(std::span<std::complex<double>> row,
                     const FrequencyGrid& freqs, std::complex<double> amp,
                     double delay_s);

}  // namespace thzmono
