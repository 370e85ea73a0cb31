#pragma once

#include <string>

#include "thzmono/synth.hpp"

namespace thzmono {

/// Write a CFR dataset: a JSON header {pose_index, angles, f_start, f_stop,
/// n_freq, seed, data, truth[]} next to a raw binary of little-endian 32-bit
/// float (re, im) pairs, row-major angle-then-frequency. The header's "data"
/// key holds the binary's file name (same directory). Truth is omitted when
/// include_truth is false (blind dataset).
void save_cfr(const DirectionalCfr& cfr, const std::string& header_path,
              bool include_truth = true);

/// Load a dataset written by save_cfr; validates the binary length against
/// the header grids. Throws SchemaError on any mismatch.
DirectionalCfr load_cfr(const std::string& header_path);

}  // namespace thzmono
