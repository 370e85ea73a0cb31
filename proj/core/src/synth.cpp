#include "thzmono/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "thzmono/errors.hpp"
#include "thzmono/parallel.hpp"
#include "thzmono/rng.hpp"

namespace thzmono {

namespace {

// Paths this far below everything relevant are dropped outright.
constexpr double kAmplitudeCutoffDb = -250.0;

// Stream tags for derived RNG streams.
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kFacetStream = 2;

double path_loss_db(const SceneModel& scene, const GeoPath& p) {
  double loss = scene.walls[static_cast<std::size_t>(p.wall_index)]
                    .material.specular_loss_db;
  if (p.kind == PathKind::specular) {
    if (p.wall_index2 >= 0) {
      loss += scene.walls[static_cast<std::size_t>(p.wall_index2)]
                  .material.specular_loss_db;
    }
    return loss;
  }
  const auto& m = scene.walls[static_cast<std::size_t>(p.wall_index)].material;
  const double c = std::cos(deg_to_rad(p.incidence_deg));
  return loss - (m.diffuse_slope_db * c * c + m.diffuse_intercept_db);
}

PathOrigin origin_of(const SceneModel& scene, const GeoPath& p) {
  if (p.wall_index2 >= 0) return PathOrigin::corner_specular;
  const auto kind = scene.walls[static_cast<std::size_t>(p.wall_index)].kind;
  if (p.kind == PathKind::specular) {
    return kind == SegmentKind::window ? PathOrigin::window
                                       : PathOrigin::wall_specular;
  }
  if (kind == SegmentKind::scatterer_zone_boundary) return PathOrigin::scatterer;
  return PathOrigin::wall_diffuse;
}

double facet_phase_rad(std::uint64_t seed, const GeoPath& p) {
  if (p.kind != PathKind::diffuse) return 0.0;
  Rng rng(derive_seed(seed, kFacetStream,
                      static_cast<std::uint64_t>(p.wall_index),
                      static_cast<std::uint64_t>(p.facet_index)));
  return rng.uniform(0.0, 2.0 * kPi);
}

void add_row_noise(std::span<std::complex<double>> row, double noise_floor_db,
                   std::uint64_t seed, int pose_index, int angle_index) {
  if (!std::isfinite(noise_floor_db)) return;
  // Per-bin variance N * 10^(floor/10) puts the mean delay-domain floor of
  // the 1/N-normalized IDFT at noise_floor_db.
  const double sigma = std::sqrt(static_cast<double>(row.size())) *
                       db_to_amp(noise_floor_db);
  Rng rng(derive_seed(seed, kNoiseStream,
                      static_cast<std::uint64_t>(pose_index),
                      static_cast<std::uint64_t>(angle_index)));
  const double s = sigma / std::sqrt(2.0);
  for (auto& v : row) {
    const double re = rng.normal();
    const double im = rng.normal();
    v += std::complex<double>(s * re, s * im);
  }
}

void check_pose_in_scene(const SceneModel& scene, const TrxPose& pose) {
  const auto idx = static_cast<std::size_t>(pose.pose_index);
  if (pose.pose_index < 0 || idx >= scene.trx_poses.size()) {
    throw std::invalid_argument("synthesize_cfr: pose_index " +
                                std::to_string(pose.pose_index) +
                                " not in scene '" + scene.name + "'");
  }
  const auto& ref = scene.trx_poses[idx];
  if ((ref.center - pose.center).norm() > 1e-9 ||
      std::abs(ref.azimuth_radius_m - pose.azimuth_radius_m) > 1e-12) {
    throw std::invalid_argument(
        "synthesize_cfr: pose does not match scene.trx_poses[" +
        std::to_string(pose.pose_index) + "]");
  }
}

}  // namespace

const char* to_string(PathOrigin o) {
  switch (o) {
    case PathOrigin::wall_specular: return "wall_specular";
    case PathOrigin::wall_diffuse: return "wall_diffuse";
    case PathOrigin::corner_specular: return "corner_specular";
    case PathOrigin::window: return "window";
    case PathOrigin::scatterer: return "scatterer";
  }
  return "wall_diffuse";
}

PathOrigin path_origin_from_string(const std::string& s) {
  if (s == "wall_specular") return PathOrigin::wall_specular;
  if (s == "wall_diffuse") return PathOrigin::wall_diffuse;
  if (s == "corner_specular") return PathOrigin::corner_specular;
  if (s == "window") return PathOrigin::window;
  if (s == "scatterer") return PathOrigin::scatterer;
  throw SchemaError("unknown path origin '" + s + "'");
}

double antenna_gain_db(const AntennaPattern& pattern, double offset_deg) {
  const double off = wrap_deg_180(offset_deg);
  const double x = 2.0 * off / pattern.hpbw_deg;
  return pattern.boresight_gain_dbi + std::max(-3.0 * x * x, pattern.floor_db);
}

double antenna_phase_rad(const AntennaPattern& pattern, double offset_deg) {
  if (pattern.phase_ripple_rad == 0.0) return 0.0;
  return pattern.phase_ripple_rad *
         std::sin(2.0 * kPi * wrap_deg_180(offset_deg) /
                  pattern.phase_ripple_period_deg);
}

std::complex<double> rotation_manifold(double f_hz, double phi_deg, double r_m) {
  if (r_m < 0.0 || !std::isfinite(r_m)) {
    throw std::invalid_argument("rotation_manifold: r must be >= 0");
  }
  const double phase =
      4.0 * kPi * f_hz * r_m * std::cos(deg_to_rad(phi_deg)) / kSpeedOfLight;
  return std::polar(1.0, phase);
}

void accumulate_tone(std::span<std::complex<double>> row,
                     const FrequencyGrid& freqs, std::complex<double> amp,
                     double delay_s) {
  // Phasor recurrence with periodic resync against the closed form.
  const std::complex<double> step =
      std::polar(1.0, -2.0 * kPi * freqs.f_step_hz * delay_s);
  std::complex<double> ph;
  for (int i = 0; i < freqs.n; ++i) {
    if ((i & 255) == 0) ph = std::polar(1.0, -2.0 * kPi * freqs[i] * delay_s);
    row[static_cast<std::size_t>(i)] += amp * ph;
    ph *= step;
  }
}

std::vector<GroundTruthPath> ground_truth_paths(const SceneModel& scene,
                                                const TrxPose& pose,
                                                const SounderConfig& cfg,
                                                std::uint64_t seed,
                                                double facet_size_m) {
  const double max_delay = cfg.max_delay_s();
  const double g0 = cfg.antenna.boresight_gain_dbi;
  std::vector<GroundTruthPath> out;
  for (const auto& p : boresight_paths(scene, pose, facet_size_m)) {
    if (p.delay_s <= 0.0 || p.delay_s > max_delay) continue;
    const double amp_db = 2.0 * g0 -
                          fspl_db(cfg.f_c_hz, kSpeedOfLight * p.delay_s) -
                          path_loss_db(scene, p);
    if (amp_db < kAmplitudeCutoffDb) continue;
    GroundTruthPath g;
    g.amplitude = std::polar(db_to_amp(amp_db), facet_phase_rad(seed, p));
    g.delay_s = p.delay_s;
    g.azimuth_deg = p.azimuth_deg;
    g.origin = origin_of(scene, p);
    out.push_back(g);
  }
  return out;
}

DirectionalCfr synthesize_cfr(const SceneModel& scene, const TrxPose& pose,
                              const SounderConfig& cfg, std::uint64_t seed,
                              int workers, double facet_size_m) {
  scene.validate();
  cfg.validate();
  check_pose_in_scene(scene, pose);

  DirectionalCfr cfr;
  cfr.pose_index = pose.pose_index;
  cfr.angles_deg = cfg.angle_grid_deg();
  cfr.freqs = cfg.freq_grid();
  cfr.seed = seed;
  cfr.data.assign(cfr.angles_deg.size() * static_cast<std::size_t>(cfr.freqs.n),
                  {0.0, 0.0});
  cfr.truth = ground_truth_paths(scene, pose, cfg, seed, facet_size_m);

  const double max_delay = cfg.max_delay_s();
  // Facets whose pattern gain sits on the sidelobe floor are, by scene
  // construction, far below the noise floor; enumerating slightly past the
  // floor halfwidth keeps the per-row path count bounded without clipping
  // anything observable. Specular paths are always traced.
  const double facet_window = cfg.antenna.floor_halfwidth_deg() + 2.0;
  const double skip_db =
      std::isfinite(cfg.noise_floor_db) ? cfg.noise_floor_db - 40.0
                                        : kAmplitudeCutoffDb;

  parallel_for(cfr.angles_deg.size(), workers, [&](std::size_t a) {
    const double phi = cfr.angles_deg[a];
    auto row = cfr.row(static_cast<int>(a));
    const auto paths =
        trace_paths(scene, pose, phi, 2, facet_window, facet_size_m);
    for (const auto& p : paths) {
      if (p.delay_s <= 0.0 || p.delay_s > max_delay) continue;
      const double offset = wrap_deg_180(p.azimuth_deg - phi);
      const double amp_db = 2.0 * antenna_gain_db(cfg.antenna, offset) -
                            fspl_db(cfg.f_c_hz, kSpeedOfLight * p.delay_s) -
                            path_loss_db(scene, p);
      if (amp_db < skip_db) continue;
      const double phase = facet_phase_rad(seed, p) +
                           2.0 * antenna_phase_rad(cfg.antenna, offset);
      accumulate_tone(row, cfr.freqs, std::polar(db_to_amp(amp_db), phase),
                      p.delay_s);
    }
    add_row_noise(row, cfg.noise_floor_db, seed, pose.pose_index,
                  static_cast<int>(a));
  });
  return cfr;
}

DirectionalCfr synthesize_cfr_from_paths(std::span<const GroundTruthPath> paths,
                                         const SounderConfig& cfg,
                                         std::uint64_t seed, int workers,
                                         double azimuth_radius_m) {
  cfg.validate();
  DirectionalCfr cfr;
  cfr.pose_index = 0;
  cfr.angles_deg = cfg.angle_grid_deg();
  cfr.freqs = cfg.freq_grid();
  cfr.seed = seed;
  cfr.data.assign(cfr.angles_deg.size() * static_cast<std::size_t>(cfr.freqs.n),
                  {0.0, 0.0});
  cfr.truth.assign(paths.begin(), paths.end());

  const double r = azimuth_radius_m;
  const double g0 = cfg.antenna.boresight_gain_dbi;
  const double max_delay = cfg.max_delay_s();

  // Scatter points implied by the boresight-referenced parameters.
  std::vector<Vec2> points(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double one_way = kSpeedOfLight * paths[i].delay_s / 2.0 + r;
    points[i] = unit_vec(paths[i].azimuth_deg) * one_way;
  }

  parallel_for(cfr.angles_deg.size(), workers, [&](std::size_t a) {
    const double phi = cfr.angles_deg[a];
    auto row = cfr.row(static_cast<int>(a));
    const Vec2 q = unit_vec(phi) * r;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const Vec2 d = points[i] - q;
      const double delay = 2.0 * d.norm() / kSpeedOfLight;
      if (delay <= 0.0 || delay > max_delay) continue;
      const double az = d.azimuth_deg();
      const double offset = wrap_deg_180(az - phi);
      // Amplitude magnitude is held at the boresight value; only the
      // relative two-way pattern response modulates it across angles.
      const double rel_db = 2.0 * (antenna_gain_db(cfg.antenna, offset) - g0);
      const std::complex<double> amp =
          paths[i].amplitude * std::polar(db_to_amp(rel_db),
                                          2.0 * antenna_phase_rad(cfg.antenna,
                                                                  offset));
      accumulate_tone(row, cfr.freqs, amp, delay);
    }
    add_row_noise(row, cfg.noise_floor_db, seed, cfr.pose_index,
                  static_cast<int>(a));
  });
  return cfr;
}

}  // namespace thzmono
