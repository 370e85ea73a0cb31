#include "thzmono/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "thzmono/errors.hpp"

namespace thzmono {

namespace {

constexpr double kGeomEps = 1e-9;  // meters; scenes are meter-scale

bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Closest point parameter t in [0,1] of p onto segment (a, b).
double segment_param(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = d.dot(d);
  if (len2 <= 0.0) return 0.0;
  return std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double t = segment_param(p, a, b);
  return (p - (a + (b - a) * t)).norm();
}

/// Mirror point p across the infinite line through (a, b).
Vec2 mirror_point(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 t = (b - a).unit();
  const Vec2 ap = p - a;
  const double along = ap.dot(t);
  const Vec2 foot = a + t * along;
  return foot + (foot - p);
}

/// Intersection of segments (p, p+pd) and (a, b); returns parameters (s, t)
/// with the hit at p + s*pd, s in [0,1], t in [0,1].
std::optional<std::pair<double, double>> segment_intersection(Vec2 p, Vec2 pd,
                                                              Vec2 a, Vec2 b) {
  const Vec2 ad = b - a;
  const double denom = pd.cross(ad);
  if (std::abs(denom) < 1e-15) return std::nullopt;  // parallel/collinear
  const Vec2 ap = a - p;
  const double s = ap.cross(ad) / denom;
  const double t = ap.cross(pd) / denom;
  if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) return std::nullopt;
  return std::make_pair(s, t);
}

/// True if any wall other than skip1/skip2 cuts the open segment from p to
/// target (hits within eps of either end do not block).
bool occluded(const SceneModel& scene, Vec2 p, Vec2 target, int skip1,
              int skip2 = -1) {
  const Vec2 d = target - p;
  const double len = d.norm();
  if (len <= kGeomEps) return false;
  const double s_eps = kGeomEps / len;
  for (std::size_t j = 0; j < scene.walls.size(); ++j) {
    const int ji = static_cast<int>(j);
    if (ji == skip1 || ji == skip2) continue;
    const auto& w = scene.walls[j];
    const auto hit = segment_intersection(p, d, w.p0, w.p1);
    if (!hit) continue;
    if (hit->first > s_eps && hit->first < 1.0 - s_eps) return true;
  }
  return false;
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

}  // namespace

void SceneModel::validate() const {
  if (walls.empty()) throw SchemaError("scene '" + name + "': no walls");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const auto& w = walls[i];
    if (!finite(w.p0) || !finite(w.p1)) {
      throw SchemaError("scene wall " + std::to_string(i) +
                        ": non-finite endpoint");
    }
    if (w.length() <= 0.0) {
      throw SchemaError("scene wall " + std::to_string(i) +
                        ": zero-length segment");
    }
    if (w.material.specular_loss_db < 0.0) {
      throw SchemaError("scene wall " + std::to_string(i) +
                        ": negative specular_loss_db");
    }
  }
  for (std::size_t k = 0; k < trx_poses.size(); ++k) {
    const auto& pose = trx_poses[k];
    if (!finite(pose.center) || !std::isfinite(pose.azimuth_radius_m)) {
      throw SchemaError("trx pose " + std::to_string(k) + ": non-finite");
    }
    if (pose.azimuth_radius_m <= 0.0) {
      throw SchemaError("trx pose " + std::to_string(k) +
                        ": azimuth radius must be > 0");
    }
    for (std::size_t i = 0; i < walls.size(); ++i) {
      const double d =
          point_segment_distance(pose.center, walls[i].p0, walls[i].p1);
      if (d <= pose.azimuth_radius_m + kGeomEps) {
        throw SchemaError("trx pose " + std::to_string(k) +
                          ": phase-center orbit touches wall " +
                          std::to_string(i));
      }
    }
  }
}

std::vector<double> SounderConfig::angle_grid_deg() const {
  const int n = n_angles();
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = i * rotation_step_deg;
  return grid;
}

void SounderConfig::validate() const {
  if (!(f_stop_hz > f_start_hz)) throw SchemaError("sounder: f_stop <= f_start");
  if (n_freq < 2) throw SchemaError("sounder: n_freq < 2");
  if (!(f_c_hz > 0.0)) throw SchemaError("sounder: f_c <= 0");
  if (!(rotation_step_deg > 0.0)) throw SchemaError("sounder: rotation step <= 0");
  const double ratio = 360.0 / rotation_step_deg;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9) {
    throw SchemaError("sounder: rotation step must divide 360");
  }
  if (!(antenna.hpbw_deg > 0.0)) throw SchemaError("sounder: hpbw <= 0");
  if (!(antenna.floor_db < 0.0)) throw SchemaError("sounder: pattern floor must be < 0");
}

double wall_specular_delay(double a_m, double r_m, double phi_deg) {
  require_finite(a_m, "a");
  require_finite(r_m, "r");
  require_finite(phi_deg, "phi");
  if (!(a_m > r_m) || r_m < 0.0) {
    throw std::invalid_argument("wall_specular_delay requires a > r >= 0");
  }
  return 2.0 * (a_m - r_m * (1.0 - std::cos(deg_to_rad(phi_deg)))) /
         kSpeedOfLight;
}

double wall_diffuse_delay(double a_m, double r_m, double theta_deg) {
  require_finite(a_m, "a");
  require_finite(r_m, "r");
  require_finite(theta_deg, "theta");
  if (!(a_m > r_m) || r_m < 0.0) {
    throw std::invalid_argument("wall_diffuse_delay requires a > r >= 0");
  }
  if (std::abs(theta_deg) >= 90.0) {
    throw std::invalid_argument("wall_diffuse_delay: grazing angle |theta| >= 90 deg");
  }
  return 2.0 * (a_m / std::cos(deg_to_rad(theta_deg)) - r_m) / kSpeedOfLight;
}

double corner_specular_delay(double a_m, double r_m, double phi_deg,
                             double phi_spec_deg) {
  require_finite(a_m, "a");
  require_finite(r_m, "r");
  require_finite(phi_deg, "phi");
  require_finite(phi_spec_deg, "phi_spec");
  if (!(a_m > 0.0)) throw std::invalid_argument("corner_specular_delay: a <= 0");
  if (!(phi_spec_deg > 0.0) || !(phi_spec_deg < 90.0)) {
    throw std::invalid_argument("corner_specular_delay: phi_spec outside (0, 90)");
  }
  const double sin_spec = std::sin(deg_to_rad(phi_spec_deg));
  return 2.0 * (a_m / sin_spec - r_m * std::cos(deg_to_rad(phi_deg))) /
         kSpeedOfLight;
}

double fspl_db(double f_hz, double d_m) {
  require_finite(f_hz, "f");
  require_finite(d_m, "d");
  if (!(f_hz > 0.0)) throw std::invalid_argument("fspl_db: f <= 0");
  if (!(d_m > 0.0)) throw std::invalid_argument("fspl_db: d <= 0");
  return 20.0 * std::log10(4.0 * kPi * f_hz * d_m / kSpeedOfLight);
}

double far_field_distance(double aperture_m, double wavelength_m) {
  require_finite(aperture_m, "aperture");
  require_finite(wavelength_m, "wavelength");
  if (!(aperture_m > 0.0) || !(wavelength_m > 0.0)) {
    throw std::invalid_argument("far_field_distance requires positive arguments");
  }
  return 2.0 * aperture_m * aperture_m / wavelength_m;
}

std::vector<GeoPath> trace_paths(const SceneModel& scene, const TrxPose& pose,
                                 double phi_deg, int max_order,
                                 double beam_halfwidth_deg,
                                 double facet_size_m) {
  if (max_order < 1 || max_order > 2) {
    throw std::invalid_argument("trace_paths: max_order must be 1 or 2");
  }
  std::vector<GeoPath> out;
  if (scene.walls.empty()) return out;

  const Vec2 q = pose.phase_center(phi_deg);

  // First-order specular feet.
  for (std::size_t i = 0; i < scene.walls.size(); ++i) {
    const auto& w = scene.walls[i];
    if (w.kind == SegmentKind::scatterer_zone_boundary) continue;
    const Vec2 d = w.p1 - w.p0;
    const double len2 = d.dot(d);
    const double t = (q - w.p0).dot(d) / len2;
    if (t < 0.0 || t > 1.0) continue;
    const Vec2 foot = w.p0 + d * t;
    const double dist = (foot - q).norm();
    if (dist <= kGeomEps) continue;
    if (occluded(scene, q, foot, static_cast<int>(i))) continue;
    GeoPath p;
    p.delay_s = 2.0 * dist / kSpeedOfLight;
    p.azimuth_deg = wrap_deg_360((foot - q).azimuth_deg());
    p.bounce_points = {foot};
    p.kind = PathKind::specular;
    p.wall_index = static_cast<int>(i);
    p.incidence_deg = 0.0;
    out.push_back(std::move(p));
  }

  // Second-order corner bounces at shared wall endpoints.
  if (max_order >= 2) {
    for (std::size_t i = 0; i < scene.walls.size(); ++i) {
      const auto& wi = scene.walls[i];
      if (wi.kind == SegmentKind::scatterer_zone_boundary) continue;
      for (std::size_t j = i + 1; j < scene.walls.size(); ++j) {
        const auto& wj = scene.walls[j];
        if (wj.kind == SegmentKind::scatterer_zone_boundary) continue;
        Vec2 corner;
        bool shared = false;
        for (Vec2 a : {wi.p0, wi.p1}) {
          for (Vec2 b : {wj.p0, wj.p1}) {
            if ((a - b).norm() < kGeomEps) {
              corner = a;
              shared = true;
            }
          }
        }
        if (!shared) continue;

        // Unfold q across wall j then wall i; the bounce points must land on
        // the physical segments and the legs must be unobstructed. One path
        // is kept per unordered pair (the reversed bounce order retraces the
        // same round trip).
        const Vec2 r1 = mirror_point(q, wj.p0, wj.p1);
        const Vec2 r2 = mirror_point(r1, wi.p0, wi.p1);
        const auto h1 = segment_intersection(q, r2 - q, wi.p0, wi.p1);
        if (!h1 || h1->first <= kGeomEps) continue;
        const Vec2 p1 = q + (r2 - q) * h1->first;
        const auto h2 = segment_intersection(p1, r1 - p1, wj.p0, wj.p1);
        if (!h2 || h2->first <= kGeomEps) continue;
        const Vec2 p2 = p1 + (r1 - p1) * h2->first;
        if ((p2 - q).norm() <= kGeomEps) continue;
        if (occluded(scene, q, p1, static_cast<int>(i), static_cast<int>(j)) ||
            occluded(scene, p1, p2, static_cast<int>(i), static_cast<int>(j)) ||
            occluded(scene, p2, q, static_cast<int>(i), static_cast<int>(j))) {
          continue;
        }
        const double len = (q - r2).norm();
        GeoPath p;
        p.delay_s = len / kSpeedOfLight;
        p.azimuth_deg = wrap_deg_360((corner - q).azimuth_deg());
        p.bounce_points = {p1, p2};
        p.kind = PathKind::specular;
        p.wall_index = static_cast<int>(i);
        p.wall_index2 = static_cast<int>(j);
        p.incidence_deg = 0.0;
        out.push_back(std::move(p));
      }
    }
  }

  // Diffuse backscatter from facets inside the beam window.
  for (std::size_t i = 0; i < scene.walls.size(); ++i) {
    const auto& w = scene.walls[i];
    const double len = w.length();
    const int m = std::max(1, static_cast<int>(std::lround(len / facet_size_m)));
    const Vec2 n_hat = w.normal();
    for (int k = 0; k < m; ++k) {
      const double t = (k + 0.5) / m;
      const Vec2 f = w.p0 + (w.p1 - w.p0) * t;
      const Vec2 back = q - f;
      const double dist = back.norm();
      if (dist <= kGeomEps) continue;
      const double az = wrap_deg_360((f - q).azimuth_deg());
      if (std::abs(wrap_deg_180(az - phi_deg)) > beam_halfwidth_deg) continue;
      if (occluded(scene, q, f, static_cast<int>(i))) continue;
      const double cos_inc = std::abs(back.unit().dot(n_hat));
      GeoPath p;
      p.delay_s = 2.0 * dist / kSpeedOfLight;
      p.azimuth_deg = az;
      p.bounce_points = {f};
      p.kind = PathKind::diffuse;
      p.wall_index = static_cast<int>(i);
      p.facet_index = k;
      p.incidence_deg = rad_to_deg(std::acos(std::clamp(cos_inc, -1.0, 1.0)));
      out.push_back(std::move(p));
    }
  }

  std::sort(out.begin(), out.end(), [](const GeoPath& a, const GeoPath& b) {
    if (a.delay_s != b.delay_s) return a.delay_s < b.delay_s;
    return a.azimuth_deg < b.azimuth_deg;
  });
  return out;
}

std::vector<GeoPath> boresight_paths(const SceneModel& scene,
                                     const TrxPose& pose,
                                     double facet_size_m) {
  std::vector<GeoPath> out;
  const Vec2 c0 = pose.center;
  const double r = pose.azimuth_radius_m;

  // A feature at distance D from the rotation center, observed with the
  // antenna pointing at it, sits at D - r from the phase center.
  auto boresight_delay = [&](double center_dist) {
    return 2.0 * (center_dist - r) / kSpeedOfLight;
  };
  auto visible_at_boresight = [&](Vec2 target, double az, int skip1,
                                  int skip2 = -1) {
    const Vec2 q = c0 + unit_vec(az) * r;
    return !occluded(scene, q, target, skip1, skip2);
  };

  for (std::size_t i = 0; i < scene.walls.size(); ++i) {
    const auto& w = scene.walls[i];
    if (w.kind != SegmentKind::scatterer_zone_boundary) {
      // Specular foot seen from the rotation center.
      const Vec2 d = w.p1 - w.p0;
      const double t = (c0 - w.p0).dot(d) / d.dot(d);
      if (t >= 0.0 && t <= 1.0) {
        const Vec2 foot = w.p0 + d * t;
        const double dist = (foot - c0).norm();
        const double az = wrap_deg_360((foot - c0).azimuth_deg());
        if (dist > r + kGeomEps &&
            visible_at_boresight(foot, az, static_cast<int>(i))) {
          GeoPath p;
          p.delay_s = boresight_delay(dist);
          p.azimuth_deg = az;
          p.bounce_points = {foot};
          p.kind = PathKind::specular;
          p.wall_index = static_cast<int>(i);
          out.push_back(std::move(p));
        }
      }
    }

    // Facets.
    const double len = w.length();
    const int m = std::max(1, static_cast<int>(std::lround(len / facet_size_m)));
    const Vec2 n_hat = w.normal();
    for (int k = 0; k < m; ++k) {
      const double t = (k + 0.5) / m;
      const Vec2 f = w.p0 + (w.p1 - w.p0) * t;
      const double dist = (f - c0).norm();
      if (dist <= r + kGeomEps) continue;
      const double az = wrap_deg_360((f - c0).azimuth_deg());
      if (!visible_at_boresight(f, az, static_cast<int>(i))) continue;
      const double cos_inc = std::abs((c0 - f).unit().dot(n_hat));
      GeoPath p;
      p.delay_s = boresight_delay(dist);
      p.azimuth_deg = az;
      p.bounce_points = {f};
      p.kind = PathKind::diffuse;
      p.wall_index = static_cast<int>(i);
      p.facet_index = k;
      p.incidence_deg = rad_to_deg(std::acos(std::clamp(cos_inc, -1.0, 1.0)));
      out.push_back(std::move(p));
    }
  }

  // Corners: boresight delay references the corner point itself.
  for (std::size_t i = 0; i < scene.walls.size(); ++i) {
    const auto& wi = scene.walls[i];
    if (wi.kind == SegmentKind::scatterer_zone_boundary) continue;
    for (std::size_t j = i + 1; j < scene.walls.size(); ++j) {
      const auto& wj = scene.walls[j];
      if (wj.kind == SegmentKind::scatterer_zone_boundary) continue;
      Vec2 corner;
      bool shared = false;
      for (Vec2 a : {wi.p0, wi.p1}) {
        for (Vec2 b : {wj.p0, wj.p1}) {
          if ((a - b).norm() < kGeomEps) {
            corner = a;
            shared = true;
          }
        }
      }
      if (!shared) continue;
      const double dist = (corner - c0).norm();
      if (dist <= r + kGeomEps) continue;
      const double az = wrap_deg_360((corner - c0).azimuth_deg());
      // Validate the actual double bounce from the boresight phase center.
      const Vec2 q = c0 + unit_vec(az) * r;
      const Vec2 r1 = mirror_point(q, wj.p0, wj.p1);
      const Vec2 r2 = mirror_point(r1, wi.p0, wi.p1);
      const auto h1 = segment_intersection(q, r2 - q, wi.p0, wi.p1);
      if (!h1 || h1->first <= kGeomEps) continue;
      const Vec2 p1 = q + (r2 - q) * h1->first;
      const auto h2 = segment_intersection(p1, r1 - p1, wj.p0, wj.p1);
      if (!h2 || h2->first <= kGeomEps) continue;
      const Vec2 p2 = p1 + (r1 - p1) * h2->first;
      if (occluded(scene, q, p1, static_cast<int>(i), static_cast<int>(j)) ||
          occluded(scene, p1, p2, static_cast<int>(i), static_cast<int>(j)) ||
          occluded(scene, p2, q, static_cast<int>(i), static_cast<int>(j))) {
        continue;
      }
      GeoPath p;
      p.delay_s = (q - r2).norm() / kSpeedOfLight;
      p.azimuth_deg = az;
      p.bounce_points = {p1, p2};
      p.kind = PathKind::specular;
      p.wall_index = static_cast<int>(i);
      p.wall_index2 = static_cast<int>(j);
      out.push_back(std::move(p));
    }
  }

  std::sort(out.begin(), out.end(), [](const GeoPath& a, const GeoPath& b) {
    if (a.delay_s != b.delay_s) return a.delay_s < b.delay_s;
    return a.azimuth_deg < b.azimuth_deg;
  });
  return out;
}

std::optional<RayHit> cast_ray(const SceneModel& scene, Vec2 origin,
                               double azimuth_deg) {
  const Vec2 dir = unit_vec(azimuth_deg);
  constexpr double kFar = 1e6;
  const Vec2 far_dir = dir * kFar;
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < scene.walls.size(); ++i) {
    const auto& w = scene.walls[i];
    const auto hit = segment_intersection(origin, far_dir, w.p0, w.p1);
    if (!hit || hit->first <= kGeomEps / kFar) continue;
    const double dist = hit->first * kFar;
    if (best && dist >= best->distance_m) continue;
    RayHit h;
    h.wall_index = static_cast<int>(i);
    h.point = origin + dir * dist;
    h.distance_m = dist;
    const double cos_inc = std::abs(dir.dot(w.normal()));
    h.incidence_deg = rad_to_deg(std::acos(std::clamp(cos_inc, -1.0, 1.0)));
    best = h;
  }
  return best;
}

double distance_to_nearest_wall(const SceneModel& scene, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : scene.walls) {
    best = std::min(best, point_segment_distance(p, w.p0, w.p1));
  }
  return best;
}

}  // namespace thzmono
