#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thzmono/constants.hpp"

namespace thzmono {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 unit() const {
    const double n = norm();
    return {x / n, y / n};
  }
  /// Counter-clockwise azimuth from +x, in degrees.
  double azimuth_deg() const { return rad_to_deg(std::atan2(y, x)); }
};

/// Unit vector at azimuth phi (degrees, CCW from +x).
inline Vec2 unit_vec(double phi_deg) {
  return {std::cos(deg_to_rad(phi_deg)), std::sin(deg_to_rad(phi_deg))};
}

/// Scalar loss parameters of a reflecting surface. The diffuse pair (n, b)
/// describes backscattered power relative to the same surface's specular
/// return as n * cos^2(dphi) + b, with dphi the offset from the specular
/// direction; b far below zero effectively disables diffuse scattering.
struct MaterialSpec {
  double specular_loss_db = 0.0;     ///< loss of the normal-incidence return
  double diffuse_slope_db = 0.0;     ///< n_diff
  double diffuse_intercept_db = -300.0;  ///< b_diff, relative to specular
};

enum class SegmentKind { wall, window, scatterer_zone_boundary };

struct WallSegment {
  Vec2 p0;
  Vec2 p1;
  MaterialSpec material;
  SegmentKind kind = SegmentKind::wall;

  double length() const { return (p1 - p0).norm(); }
  Vec2 tangent() const { return (p1 - p0).unit(); }
  /// One of the two unit normals; orientation is resolved per query point.
  Vec2 normal() const {
    const Vec2 t = tangent();
    return {-t.y, t.x};
  }
};

/// A transceiver pose: the turntable's rotation center plus the azimuthal
/// radius r at which the antenna phase center orbits.
struct TrxPose {
  Vec2 center;
  double azimuth_radius_m = 0.2;
  int pose_index = 0;

  Vec2 phase_center(double phi_deg) const {
    return center + unit_vec(phi_deg) * azimuth_radius_m;
  }
};

struct SceneModel {
  std::string name;
  std::vector<WallSegment> walls;
  std::vector<TrxPose> trx_poses;

  /// Throws SchemaError on violated invariants (no walls, zero-length
  /// segments, non-finite coordinates, pose on a wall).
  void validate() const;
};

struct AntennaPattern {
  double boresight_gain_dbi = 25.5;
  double hpbw_deg = 8.0;
  double floor_db = -30.0;  ///< relative sidelobe floor, must be < 0

  /// Phase-ripple hook: the radiation pattern's phase is nominally zero (the
  /// measured complex pattern is unavailable); a nonzero amplitude here
  /// injects a synthetic sinusoidal phase vs. offset angle so the pipeline's
  /// insensitivity to pattern phase can be exercised.
  double phase_ripple_rad = 0.0;
  double phase_ripple_period_deg = 30.0;

  /// Offset from boresight beyond which the relative gain sits at floor_db.
  double floor_halfwidth_deg() const {
    return 0.5 * hpbw_deg * std::sqrt(-floor_db / 3.0);
  }
};

/// Uniform frequency grid f_n = f_start + n * f_step, n = 0..n-1.
struct FrequencyGrid {
  double f_start_hz = 0.0;
  double f_step_hz = 0.0;
  int n = 0;

  double operator[](int i) const { return f_start_hz + f_step_hz * i; }
  double bandwidth_hz() const { return f_step_hz * n; }
  /// Delay-domain bin width of the corresponding IDFT, exactly 1/bandwidth.
  double delay_bin_s() const { return 1.0 / bandwidth_hz(); }
  double max_delay_s() const { return n * delay_bin_s(); }
};

struct SounderConfig {
  double f_start_hz = 290e9;
  double f_stop_hz = 310e9;
  int n_freq = 2001;
  double f_c_hz = 300e9;
  double rotation_step_deg = 1.0;
  AntennaPattern antenna;
  double tx_power_dbm = 10.0;    ///< recorded in artifacts; powers are
                                 ///< referenced to a 0 dB transmit level
  double noise_floor_db = -120.0;

  /// The grid treats [f_start, f_stop) as n_freq bins of width B/n_freq, so
  /// the delay bin is exactly 1/B and the unambiguous range exactly n_freq/B.
  FrequencyGrid freq_grid() const {
    return {f_start_hz, (f_stop_hz - f_start_hz) / n_freq, n_freq};
  }
  double bandwidth_hz() const { return f_stop_hz - f_start_hz; }
  double delay_bin_s() const { return 1.0 / bandwidth_hz(); }
  double max_delay_s() const { return n_freq * delay_bin_s(); }
  int n_angles() const {
    return static_cast<int>(std::lround(360.0 / rotation_step_deg));
  }
  std::vector<double> angle_grid_deg() const;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Closed-form delay/loss expressions. These are the cross-check models; the
// exact-geometry oracle below is authoritative where the two differ (the
// formulas' angle conventions agree with the exact geometry at the specular
// point and at boresight, and are asserted there).
// ---------------------------------------------------------------------------

/// Specular wall return, rotation angle phi with the wall normal at 90 deg:
/// 2 [a - r (1 - cos phi)] / c. Valid convention domain is phi in [0, 90]
/// (mirror-symmetric beyond); the minimum 2(a-r)/c sits at phi = 90 deg.
double wall_specular_delay(double a_m, double r_m, double phi_deg);

/// Diffuse wall backscatter at angle theta from the wall normal (measured at
/// the rotation center, antenna pointing at the facet): 2 [a/cos theta - r]/c.
double wall_diffuse_delay(double a_m, double r_m, double theta_deg);

/// Second-order corner return: 2 [a / sin(phi_spec) - r cos(phi)] / c, with
/// phi_spec the angle between the wall and the center-to-corner line, phi the
/// rotation angle from the corner direction. Neglects the inter-bounce leg.
double corner_specular_delay(double a_m, double r_m, double phi_deg,
                             double phi_spec_deg);

/// Free-space path loss 20 log10(4 pi f d / c) in dB.
double fspl_db(double f_hz, double d_m);

/// Fraunhofer far-field distance 2 D^2 / lambda.
double far_field_distance(double aperture_m, double wavelength_m);

// ---------------------------------------------------------------------------
// Exact 2D ray geometry.
// ---------------------------------------------------------------------------

enum class PathKind { specular, diffuse };

struct GeoPath {
  double delay_s = 0.0;
  double azimuth_deg = 0.0;  ///< departure/arrival azimuth from the phase center
  std::vector<Vec2> bounce_points;
  PathKind kind = PathKind::specular;
  int wall_index = -1;   ///< incident wall (first bounce)
  int wall_index2 = -1;  ///< second wall of a corner bounce, else -1
  int facet_index = -1;  ///< facet ordinal along the wall (diffuse only)
  double incidence_deg = 0.0;  ///< |offset from the wall normal| at the bounce
};

/// Exact path enumeration for one rotation angle. The phase center sits at
/// center + r * u(phi). Specular paths use the mirror-image method and must
/// return to the same phase center (first-order wall feet plus, for
/// max_order >= 2, double bounces at wall-pair corners). Diffuse paths are
/// direct backscatter from wall facets (facet_size_m wide) whose azimuth lies
/// within beam_halfwidth_deg of phi. Scatterer-zone boundaries contribute
/// diffuse backscatter only. Delays are exact round-trip lengths over c.
/// Output is sorted by (delay, azimuth) and independent of wall ordering.
std::vector<GeoPath> trace_paths(const SceneModel& scene, const TrxPose& pose,
                                 double phi_deg, int max_order,
                                 double beam_halfwidth_deg = 180.0,
                                 double facet_size_m = 0.02);

/// Boresight-referenced feature enumeration for one pose: every specular
/// foot, corner bounce, and facet, each evaluated with the antenna pointing
/// straight at it (phase center on the center-to-feature line). Delays are
/// exact; azimuths are measured from the rotation center. This is the
/// per-pose physical path set that trajectory de-embedding recovers.
std::vector<GeoPath> boresight_paths(const SceneModel& scene,
                                     const TrxPose& pose,
                                     double facet_size_m = 0.02);

struct RayHit {
  int wall_index = -1;
  Vec2 point;
  double distance_m = 0.0;
  double incidence_deg = 0.0;  ///< |offset of the reverse ray from the normal|
};

/// First wall hit by the ray from origin along azimuth_deg, if any.
std::optional<RayHit> cast_ray(const SceneModel& scene, Vec2 origin,
                               double azimuth_deg);

/// Distance from a point to the nearest wall segment of the scene.
double distance_to_nearest_wall(const SceneModel& scene, Vec2 p);

}  // namespace thzmono
