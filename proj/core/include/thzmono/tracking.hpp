#pragma once

#include <vector>

#include "thzmono/sage.hpp"

namespace thzmono {

struct TrajectoryMember {
  double angle_deg = 0.0;  ///< unwrapped: wrapped chains continue past 360
  MpcEstimate mpc;
};

/// An MPC chain across consecutive rotation angles (one member per step).
struct Trajectory {
  int id = -1;
  std::vector<TrajectoryMember> members;

  double mean_power_db() const;
  int length() const { return static_cast<int>(members.size()); }
};

/// MCD weights calibrated from the specular reference trajectory
/// (w = 1 / sqrt(S), S the unbiased std of consecutive parameter
/// differences along the reference). reference_median_mcd is the median MCD
/// between consecutive reference members under these weights; it anchors the
/// tracker's link gate and is +inf when no calibration is available (the
/// MCD gate is then disabled).
struct McdWeights {
  double w_power = 1.0;
  double w_delay = 1.0;
  double s_power = 0.0;
  double s_delay = 0.0;
  double reference_median_mcd = std::numeric_limits<double>::infinity();
};

/// The pattern-free MPC of one trajectory: parameters of the max-power
/// member, whose rotation angle reads out the path azimuth.
struct DeembeddedMpc {
  std::complex<double> amplitude;
  double delay_s = 0.0;
  double azimuth_deg = 0.0;
  double power_db = 0.0;
  int source_trajectory_id = -1;

  double phase_rad() const { return std::arg(amplitude); }
};

struct TrackerConfig {
  double delay_gate_s = 0.02e-9;    ///< +-0.02 ns adjacent-angle delay gate
  double mcd_gate_multiplier = 3.0; ///< times the reference median MCD
  int min_track_len = 3;

  void validate() const;
};

/// Multipath component distance sqrt(w_p dp^2 + w_tau dtau^2) with dp the
/// absolute power difference in dB and dtau the absolute delay difference
/// in nanoseconds.
double mcd(const MpcEstimate& a, const MpcEstimate& b, const McdWeights& w);

/// Locate the wall specular trajectory to calibrate MCD weights against:
/// delay-gated nearest-delay chains are grown over adjacent angles, and the
/// longest chain whose delays fit the specular wall model of some scene wall
/// (least squares over the wall distance, RMS residual under one delay bin)
/// is returned; ties break toward higher mean power. Throws NumericalError
/// when no chain fits (callers may fall back to unit weights).
Trajectory find_specular_reference(const EstimateSet& est,
                                   const SceneModel& scene, const TrxPose& pose,
                                   double delay_bin_s,
                                   const TrackerConfig& cfg = {});

/// Eq.-style weight calibration from a reference trajectory of length >= 3;
/// the S of each parameter is floored at 1e-6 in its native unit.
McdWeights compute_weights(const Trajectory& reference);

/// Greedy MCD association: per adjacent angle pair, candidate links must
/// satisfy the delay gate (and the MCD gate when calibrated); links are
/// assigned in ascending MCD with every MPC linked at most once; linking
/// continues across the 359->0 seam. Chains shorter than min_track_len are
/// dropped. Surviving trajectories partition their MPCs.
std::vector<Trajectory> track_trajectories(const EstimateSet& est,
                                           const McdWeights& weights,
                                           const TrackerConfig& cfg = {});

/// Max-power member per trajectory; ties break toward the member nearest the
/// trajectory's median angle.
std::vector<DeembeddedMpc> deembed(const std::vector<Trajectory>& trajectories);

}  // namespace thzmono
