#include "thzmono/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "thzmono/errors.hpp"

namespace thzmono {

namespace {

struct Link {
  double cost;
  int i;
  int j;
};

struct ChainGraph {
  std::vector<std::vector<int>> succ;  // succ[a][i] -> mpc index at (a+1)%n
  std::vector<std::vector<int>> pred;  // pred[a][j] -> mpc index at (a-1+n)%n
};

/// Greedy gated association over every adjacent angle pair, including the
/// wrap seam. cost_mcd == nullptr links by nearest delay (reference search);
/// otherwise by ascending MCD with the absolute MCD gate applied.
ChainGraph build_links(const EstimateSet& est, double gate_s,
                       const McdWeights* weights, double mcd_gate) {
  const int n = static_cast<int>(est.angles.size());
  ChainGraph g;
  g.succ.resize(static_cast<std::size_t>(n));
  g.pred.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    g.succ[static_cast<std::size_t>(a)].assign(
        est.angles[static_cast<std::size_t>(a)].mpcs.size(), -1);
    g.pred[static_cast<std::size_t>(a)].assign(
        est.angles[static_cast<std::size_t>(a)].mpcs.size(), -1);
  }
  if (n < 2) return g;

  std::vector<Link> links;
  for (int a = 0; a < n; ++a) {
    const int b = (a + 1) % n;
    if (b == a) continue;
    const auto& row_a = est.angles[static_cast<std::size_t>(a)].mpcs;
    const auto& row_b = est.angles[static_cast<std::size_t>(b)].mpcs;
    links.clear();
    for (int i = 0; i < static_cast<int>(row_a.size()); ++i) {
      if (g.succ[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] >= 0)
        continue;
      for (int j = 0; j < static_cast<int>(row_b.size()); ++j) {
        if (g.pred[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)] >= 0)
          continue;
        const auto& ma = row_a[static_cast<std::size_t>(i)];
        const auto& mb = row_b[static_cast<std::size_t>(j)];
        const double dtau = std::abs(ma.delay_s - mb.delay_s);
        if (dtau > gate_s) continue;
        double cost;
        if (weights != nullptr) {
          cost = mcd(ma, mb, *weights);
          if (cost > mcd_gate) continue;
        } else {
          cost = dtau;
        }
        links.push_back({cost, i, j});
      }
    }
    std::sort(links.begin(), links.end(), [](const Link& x, const Link& y) {
      if (x.cost != y.cost) return x.cost < y.cost;
      if (x.i != y.i) return x.i < y.i;
      return x.j < y.j;
    });
    for (const auto& l : links) {
      if (g.succ[static_cast<std::size_t>(a)][static_cast<std::size_t>(l.i)] >= 0)
        continue;
      if (g.pred[static_cast<std::size_t>(b)][static_cast<std::size_t>(l.j)] >= 0)
        continue;
      g.succ[static_cast<std::size_t>(a)][static_cast<std::size_t>(l.i)] = l.j;
      g.pred[static_cast<std::size_t>(b)][static_cast<std::size_t>(l.j)] = l.i;
    }
  }
  return g;
}

std::vector<Trajectory> extract_chains(const EstimateSet& est,
                                       const ChainGraph& g) {
  const int n = static_cast<int>(est.angles.size());
  std::vector<std::vector<char>> visited(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    visited[static_cast<std::size_t>(a)].assign(
        est.angles[static_cast<std::size_t>(a)].mpcs.size(), 0);
  }

  std::vector<Trajectory> out;
  const auto walk = [&](int a0, int i0) {
    Trajectory t;
    int a = a0;
    int i = i0;
    double angle = est.angles[static_cast<std::size_t>(a0)].angle_deg;
    double prev_wrapped = angle;
    for (;;) {
      visited[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = 1;
      t.members.push_back(
          {angle, est.angles[static_cast<std::size_t>(a)].mpcs[static_cast<std::size_t>(i)]});
      const int j = g.succ[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
      if (j < 0) break;
      const int b = (a + 1) % n;
      if (visited[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]) break;
      const double next_wrapped = est.angles[static_cast<std::size_t>(b)].angle_deg;
      angle += next_wrapped > prev_wrapped ? next_wrapped - prev_wrapped
                                           : next_wrapped - prev_wrapped + 360.0;
      prev_wrapped = next_wrapped;
      a = b;
      i = j;
    }
    return t;
  };

  // Chain heads first, then any remaining full cycles.
  for (int pass = 0; pass < 2; ++pass) {
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < static_cast<int>(visited[static_cast<std::size_t>(a)].size()); ++i) {
        if (visited[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)]) continue;
        if (pass == 0 &&
            g.pred[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] >= 0)
          continue;
        out.push_back(walk(a, i));
      }
    }
  }
  return out;
}

}  // namespace

double Trajectory::mean_power_db() const {
  double s = 0.0;
  for (const auto& m : members) s += m.mpc.power_db;
  return members.empty() ? 0.0 : s / static_cast<double>(members.size());
}

void TrackerConfig::validate() const {
  if (!(delay_gate_s > 0.0)) throw SchemaError("tracker: delay gate <= 0");
  if (!(mcd_gate_multiplier > 0.0)) throw SchemaError("tracker: MCD gate multiplier <= 0");
  if (min_track_len < 1) throw SchemaError("tracker: min_track_len < 1");
}

double mcd(const MpcEstimate& a, const MpcEstimate& b, const McdWeights& w) {
  const double dp = std::abs(a.power_db - b.power_db);
  const double dtau_ns = std::abs(a.delay_s - b.delay_s) * 1e9;
  return std::sqrt(w.w_power * dp * dp + w.w_delay * dtau_ns * dtau_ns);
}

Trajectory find_specular_reference(const EstimateSet& est,
                                   const SceneModel& scene, const TrxPose& pose,
                                   double delay_bin_s,
                                   const TrackerConfig& cfg) {
  cfg.validate();
  const ChainGraph g = build_links(est, cfg.delay_gate_s, nullptr, 0.0);
  std::vector<Trajectory> chains = extract_chains(est, g);

  // Candidate walls: visible specular feet seen from the rotation center.
  struct WallModel {
    double normal_azimuth_deg;
  };
  std::vector<WallModel> models;
  for (const auto& w : scene.walls) {
    if (w.kind == SegmentKind::scatterer_zone_boundary) continue;
    const Vec2 d = w.p1 - w.p0;
    const double t = (pose.center - w.p0).dot(d) / d.dot(d);
    if (t < 0.0 || t > 1.0) continue;
    const Vec2 foot = w.p0 + d * t;
    if ((foot - pose.center).norm() <= pose.azimuth_radius_m) continue;
    models.push_back({wrap_deg_360((foot - pose.center).azimuth_deg())});
  }
  if (models.empty()) {
    throw NumericalError(
        "find_specular_reference: no wall with a visible specular foot");
  }

  const double r = pose.azimuth_radius_m;
  const Trajectory* best = nullptr;
  for (const auto& chain : chains) {
    if (chain.length() < 3) continue;
    for (const auto& m : models) {
      // Exact specular chain shape: tau(phi) = 2 (a - r cos(phi - phi_w)) / c,
      // least squares over the wall distance a.
      double acc = 0.0;
      for (const auto& mem : chain.members) {
        acc += mem.mpc.delay_s * kSpeedOfLight / 2.0 +
               r * std::cos(deg_to_rad(mem.angle_deg - m.normal_azimuth_deg));
      }
      const double a_fit = acc / chain.length();
      if (a_fit <= r) continue;
      double ss = 0.0;
      for (const auto& mem : chain.members) {
        const double model_tau =
            2.0 *
            (a_fit - r * std::cos(deg_to_rad(mem.angle_deg - m.normal_azimuth_deg))) /
            kSpeedOfLight;
        const double e = mem.mpc.delay_s - model_tau;
        ss += e * e;
      }
      const double rms = std::sqrt(ss / chain.length());
      if (rms >= delay_bin_s) continue;
      if (best == nullptr || chain.length() > best->length() ||
          (chain.length() == best->length() &&
           chain.mean_power_db() > best->mean_power_db())) {
        best = &chain;
      }
      break;  // chain fits some wall; no need to test the rest
    }
  }
  if (best == nullptr) {
    throw NumericalError(
        "find_specular_reference: no delay chain fits the specular wall model; "
        "weight calibration impossible");
  }
  Trajectory ref = *best;
  ref.id = 0;
  return ref;
}

McdWeights compute_weights(const Trajectory& reference) {
  const int n = reference.length();
  if (n < 3) {
    throw std::invalid_argument("compute_weights: reference shorter than 3");
  }
  constexpr double kFloor = 1e-6;

  const auto unbiased_std_of_diffs = [&](auto getter) {
    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(n - 1));
    for (int k = 0; k + 1 < n; ++k) {
      diffs.push_back(getter(reference.members[static_cast<std::size_t>(k + 1)]) -
                      getter(reference.members[static_cast<std::size_t>(k)]));
    }
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    return std::sqrt(ss / static_cast<double>(n - 2));
  };

  McdWeights w;
  w.s_power = unbiased_std_of_diffs(
      [](const TrajectoryMember& m) { return m.mpc.power_db; });
  w.s_delay = unbiased_std_of_diffs(
      [](const TrajectoryMember& m) { return m.mpc.delay_s * 1e9; });
  w.w_power = 1.0 / std::sqrt(std::max(w.s_power, kFloor));
  w.w_delay = 1.0 / std::sqrt(std::max(w.s_delay, kFloor));

  std::vector<double> mcds;
  for (int k = 0; k + 1 < n; ++k) {
    mcds.push_back(mcd(reference.members[static_cast<std::size_t>(k)].mpc,
                       reference.members[static_cast<std::size_t>(k + 1)].mpc, w));
  }
  std::sort(mcds.begin(), mcds.end());
  w.reference_median_mcd = mcds[mcds.size() / 2];
  return w;
}

std::vector<Trajectory> track_trajectories(const EstimateSet& est,
                                           const McdWeights& weights,
                                           const TrackerConfig& cfg) {
  cfg.validate();
  const double mcd_gate =
      std::isfinite(weights.reference_median_mcd)
          ? cfg.mcd_gate_multiplier * weights.reference_median_mcd
          : std::numeric_limits<double>::infinity();
  const ChainGraph g = build_links(est, cfg.delay_gate_s, &weights, mcd_gate);
  std::vector<Trajectory> chains = extract_chains(est, g);

  std::vector<Trajectory> out;
  for (auto& c : chains) {
    if (c.length() < cfg.min_track_len) continue;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Trajectory& a, const Trajectory& b) {
    if (a.members.front().angle_deg != b.members.front().angle_deg) {
      return a.members.front().angle_deg < b.members.front().angle_deg;
    }
    return a.members.front().mpc.delay_s < b.members.front().mpc.delay_s;
  });
  for (std::size_t k = 0; k < out.size(); ++k) out[k].id = static_cast<int>(k);
  return out;
}

std::vector<DeembeddedMpc> deembed(const std::vector<Trajectory>& trajectories) {
  std::vector<DeembeddedMpc> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (t.members.empty()) {
      throw std::invalid_argument("deembed: empty trajectory");
    }
    const double median_angle =
        t.members[(t.members.size() - 1) / 2].angle_deg;
    const TrajectoryMember* best = &t.members.front();
    for (const auto& m : t.members) {
      if (m.mpc.power_db > best->mpc.power_db) {
        best = &m;
      } else if (m.mpc.power_db == best->mpc.power_db) {
        if (std::abs(m.angle_deg - median_angle) <
            std::abs(best->angle_deg - median_angle)) {
          best = &m;
        }
      }
    }
    DeembeddedMpc d;
    d.amplitude = best->mpc.amplitude;
    d.delay_s = best->mpc.delay_s;
    d.azimuth_deg = wrap_deg_360(best->angle_deg);
    d.power_db = best->mpc.power_db;
    d.source_trajectory_id = t.id;
    out.push_back(d);
  }
  return out;
}

}  // namespace thzmono
