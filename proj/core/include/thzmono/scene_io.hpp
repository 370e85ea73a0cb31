#pragma once

#include <string>

#include "thzmono/geometry.hpp"

namespace thzmono {

/// Load and validate a scene JSON file:
///   {name, walls:[{p0:[x,y], p1:[x,y],
///                  material:{spec_loss_db, n_diff, b_diff}, kind}],
///    trx_poses:[{center:[x,y], r}]}
/// Lengths in meters, angles in degrees. Throws SchemaError naming the
/// offending field.
SceneModel load_scene(const std::string& path);
void save_scene(const SceneModel& scene, const std::string& path);

/// Load a sounder config JSON file; every field is optional and falls back
/// to the defaults in SounderConfig.
SounderConfig load_sounder_config(const std::string& path);
void save_sounder_config(const SounderConfig& cfg, const std::string& path);

}  // namespace thzmono
