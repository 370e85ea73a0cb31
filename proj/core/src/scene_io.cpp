#include "thzmono/scene_io.hpp"

#include <fstream>

#include <json.hpp>

#include "thzmono/errors.hpp"

namespace thzmono {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

double get_number(const json& j, const std::string& key,
                  const std::string& ctx) {
  if (!j.contains(key)) throw SchemaError(ctx + ": missing field '" + key + "'");
  if (!j[key].is_number()) {
    throw SchemaError(ctx + ": field '" + key + "' must be a number");
  }
  return j[key].get<double>();
}

Vec2 get_point(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw SchemaError(ctx + ": missing field '" + key + "'");
  const auto& p = j[key];
  if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
    throw SchemaError(ctx + ": field '" + key + "' must be [x, y]");
  }
  return {p[0].get<double>(), p[1].get<double>()};
}

SegmentKind parse_kind(const json& j, const std::string& ctx) {
  if (!j.contains("kind")) return SegmentKind::wall;
  const std::string k = j["kind"].get<std::string>();
  if (k == "wall") return SegmentKind::wall;
  if (k == "window") return SegmentKind::window;
  if (k == "scatterer_zone_boundary") return SegmentKind::scatterer_zone_boundary;
  throw SchemaError(ctx + ": unknown kind '" + k + "'");
}

const char* kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::wall: return "wall";
    case SegmentKind::window: return "window";
    case SegmentKind::scatterer_zone_boundary: return "scatterer_zone_boundary";
  }
  return "wall";
}

}  // namespace

SceneModel load_scene(const std::string& path) {
  const json j = parse_file(path);
  SceneModel scene;
  scene.name = j.value("name", std::string{});
  if (!j.contains("walls") || !j["walls"].is_array()) {
    throw SchemaError(path + ": missing array field 'walls'");
  }
  std::size_t idx = 0;
  for (const auto& wj : j["walls"]) {
    const std::string ctx = path + ": walls[" + std::to_string(idx) + "]";
    WallSegment w;
    w.p0 = get_point(wj, "p0", ctx);
    w.p1 = get_point(wj, "p1", ctx);
    if (!wj.contains("material")) throw SchemaError(ctx + ": missing field 'material'");
    const auto& mj = wj["material"];
    w.material.specular_loss_db = get_number(mj, "spec_loss_db", ctx + ".material");
    w.material.diffuse_slope_db = get_number(mj, "n_diff", ctx + ".material");
    w.material.diffuse_intercept_db = get_number(mj, "b_diff", ctx + ".material");
    w.kind = parse_kind(wj, ctx);
    scene.walls.push_back(w);
    ++idx;
  }
  if (!j.contains("trx_poses") || !j["trx_poses"].is_array()) {
    throw SchemaError(path + ": missing array field 'trx_poses'");
  }
  idx = 0;
  for (const auto& pj : j["trx_poses"]) {
    const std::string ctx = path + ": trx_poses[" + std::to_string(idx) + "]";
    TrxPose pose;
    pose.center = get_point(pj, "center", ctx);
    pose.azimuth_radius_m = get_number(pj, "r", ctx);
    pose.pose_index = static_cast<int>(idx);
    scene.trx_poses.push_back(pose);
    ++idx;
  }
  scene.validate();
  return scene;
}

void save_scene(const SceneModel& scene, const std::string& path) {
  json j;
  j["name"] = scene.name;
  j["walls"] = json::array();
  for (const auto& w : scene.walls) {
    json wj;
    wj["p0"] = {w.p0.x, w.p0.y};
    wj["p1"] = {w.p1.x, w.p1.y};
    wj["material"] = {{"spec_loss_db", w.material.specular_loss_db},
                      {"n_diff", w.material.diffuse_slope_db},
                      {"b_diff", w.material.diffuse_intercept_db}};
    wj["kind"] = kind_name(w.kind);
    j["walls"].push_back(wj);
  }
  j["trx_poses"] = json::array();
  for (const auto& p : scene.trx_poses) {
    j["trx_poses"].push_back({{"center", {p.center.x, p.center.y}},
                              {"r", p.azimuth_radius_m}});
  }
  write_file(j, path);
}

SounderConfig load_sounder_config(const std::string& path) {
  const json j = parse_file(path);
  SounderConfig cfg;
  cfg.f_start_hz = j.value("f_start_hz", cfg.f_start_hz);
  cfg.f_stop_hz = j.value("f_stop_hz", cfg.f_stop_hz);
  cfg.n_freq = j.value("n_freq", cfg.n_freq);
  cfg.f_c_hz = j.value("f_c_hz", cfg.f_c_hz);
  cfg.rotation_step_deg = j.value("rotation_step_deg", cfg.rotation_step_deg);
  cfg.tx_power_dbm = j.value("tx_power_dbm", cfg.tx_power_dbm);
  cfg.noise_floor_db = j.value("noise_floor_db", cfg.noise_floor_db);
  if (j.contains("antenna")) {
    const auto& aj = j["antenna"];
    cfg.antenna.boresight_gain_dbi =
        aj.value("boresight_gain_dbi", cfg.antenna.boresight_gain_dbi);
    cfg.antenna.hpbw_deg = aj.value("hpbw_deg", cfg.antenna.hpbw_deg);
    cfg.antenna.floor_db = aj.value("floor_db", cfg.antenna.floor_db);
    cfg.antenna.phase_ripple_rad =
        aj.value("phase_ripple_rad", cfg.antenna.phase_ripple_rad);
    cfg.antenna.phase_ripple_period_deg =
        aj.value("phase_ripple_period_deg", cfg.antenna.phase_ripple_period_deg);
  }
  cfg.validate();
  return cfg;
}

void save_sounder_config(const SounderConfig& cfg, const std::string& path) {
  json j;
  j["f_start_hz"] = cfg.f_start_hz;
  j["f_stop_hz"] = cfg.f_stop_hz;
  j["n_freq"] = cfg.n_freq;
  j["f_c_hz"] = cfg.f_c_hz;
  j["rotation_step_deg"] = cfg.rotation_step_deg;
  j["tx_power_dbm"] = cfg.tx_power_dbm;
  j["noise_floor_db"] = cfg.noise_floor_db;
  j["antenna"] = {{"boresight_gain_dbi", cfg.antenna.boresight_gain_dbi},
                  {"hpbw_deg", cfg.antenna.hpbw_deg},
                  {"floor_db", cfg.antenna.floor_db},
                  {"phase_ripple_rad", cfg.antenna.phase_ripple_rad},
                  {"phase_ripple_period_deg", cfg.antenna.phase_ripple_period_deg}};
  write_file(j, path);
}

}  // namespace thzmono
