#pragma once

#include <map>
#include <vector>

#include "thzmono/tracking.hpp"

namespace thzmono {

enum class MpcLabel { target_specular, environment_diffuse, unmatched };

const char* to_string(MpcLabel label);

struct ClassificationConfig {
  double tol_delay_bins = 2.0;
  double tol_angle_deg = 3.0;
};

/// A de-embedded MPC with its geometric attribution: specular returns map to
/// a wall foot or corner (target-related), diffuse backscatter to a wall
/// facet direction (environment-related), everything else is unmatched.
struct ClassifiedMpc {
  DeembeddedMpc mpc;
  MpcLabel label = MpcLabel::unmatched;
  int matched_wall = -1;
  int matched_wall2 = -1;          ///< second wall of a matched corner
  double delta_phi_deg = 0.0;      ///< offset from the feature's specular direction
  double feature_specular_delay_s = 0.0;  ///< specular delay of the matched wall
};

/// Diffuse power law p(dphi) = n cos^2(dphi) + b fitted in dB.
struct DiffusePowerModel {
  double n_diff = 0.0;
  double b_diff = 0.0;
  double rmse = 0.0;
};

struct HybridComponent {
  std::complex<double> amplitude;
  double delay_s = 0.0;
  double azimuth_deg = 0.0;
};

/// Target-related (specular) and environment-related (diffuse) halves of the
/// hybrid CIR; the lists are disjoint by construction and their union is the
/// full impulse response.
struct HybridCir {
  int pose_index = 0;
  std::vector<HybridComponent> target;
  std::vector<HybridComponent> environment;
};

/// Label every de-embedded MPC against the scene geometry. Specular matching
/// tests delay and azimuth against each traced specular feature; an MPC that
/// matches both manifolds is specular (specular precedence). Diffuse matching
/// ray-casts the walls across the angle tolerance and accepts the smallest
/// delay mismatch within tolerance, recording the offset from the wall's
/// specular direction as delta_phi.
std::vector<ClassifiedMpc> classify(const std::vector<DeembeddedMpc>& deembedded,
                                    const SceneModel& scene, const TrxPose& pose,
                                    const SounderConfig& snd,
                                    const ClassificationConfig& cfg = {});

/// Ordinary least squares of FSPL-compensated diffuse power (dB) on
/// cos^2(delta_phi). Compensation references every sample to its matched
/// feature's specular path length. Throws NumericalError when fewer than two
/// distinct abscissae exist.
DiffusePowerModel fit_diffuse_model(const std::vector<ClassifiedMpc>& classified,
                                    double f_c_hz);

/// OLS core on raw (cos^2(dphi), power_db) pairs.
DiffusePowerModel fit_diffuse_line(const std::vector<double>& cos2_dphi,
                                   const std::vector<double>& power_db);

struct SpecularConsistencyEntry {
  int pose_index = 0;
  bool found = false;
  double power_db = 0.0;
  bool outlier = false;
};

struct SpecularConsistencyReport {
  std::vector<SpecularConsistencyEntry> entries;
  double min_db = 0.0;   ///< over non-outlier poses with a specular match
  double max_db = 0.0;
  double range_db = 0.0;
  int n_outliers = 0;
  int n_missing = 0;
};

/// Wall-specular power per pose with outlier flagging (above median + 3 dB);
/// min/max/range are reported over the remaining poses.
SpecularConsistencyReport specular_power_consistency(
    const std::map<int, std::vector<DeembeddedMpc>>& deembedded_per_pose,
    const SceneModel& scene, const SounderConfig& snd,
    const ClassificationConfig& cfg = {});

/// Hybrid CIR synthesis from the scene geometry and a fitted diffuse model:
/// the target list carries the traced specular paths at their material
/// specular level, the environment list carries diffuse facets at
/// n cos^2 + b relative to the owning wall's specular level. Amplitudes are
/// propagation-only (no antenna pattern).
HybridCir synthesize_hybrid_cir(const SceneModel& scene, const TrxPose& pose,
                                const DiffusePowerModel& model,
                                const SounderConfig& snd,
                                double facet_size_m = 0.02);

/// Sum of amp exp(-j 2 pi f tau) over the grid for a component list.
std::vector<std::complex<double>> assemble_response(
    const std::vector<HybridComponent>& components, const FrequencyGrid& freqs);

/// Response of the full hybrid CIR: one pass over target then environment.
std::vector<std::complex<double>> assemble_response(const HybridCir& cir,
                                                    const FrequencyGrid& freqs);

}  // namespace thzmono
