#include "thzmono/cfr_io.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "thzmono/errors.hpp"

namespace thzmono {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Raw samples are little-endian float32; this implementation targets
// little-endian hosts (asserted at build time below).
static_assert(std::endian::native == std::endian::little,
              "CFR binaries are little-endian; byte swapping not implemented");

std::string bin_name_for(const std::string& header_path) {
  fs::path p(header_path);
  p.replace_extension(".bin");
  return p.filename().string();
}

}  // namespace

void save_cfr(const DirectionalCfr& cfr, const std::string& header_path,
              bool include_truth) {
  const std::string bin_name = bin_name_for(header_path);
  const fs::path bin_path = fs::path(header_path).parent_path() / bin_name;

  json j;
  j["pose_index"] = cfr.pose_index;
  j["angles"] = cfr.angles_deg;
  j["f_start"] = cfr.freqs.f_start_hz;
  j["f_stop"] = cfr.freqs.f_start_hz + cfr.freqs.bandwidth_hz();
  j["n_freq"] = cfr.freqs.n;
  j["seed"] = cfr.seed;
  j["data"] = bin_name;
  if (include_truth) {
    json t = json::array();
    for (const auto& g : cfr.truth) {
      t.push_back({{"amp_re", g.amplitude.real()},
                   {"amp_im", g.amplitude.imag()},
                   {"delay_s", g.delay_s},
                   {"azimuth_deg", g.azimuth_deg},
                   {"origin", to_string(g.origin)}});
    }
    j["truth"] = std::move(t);
  }

  {
    std::ofstream out(header_path);
    if (!out) throw SchemaError("cannot write file: " + header_path);
    out << j.dump(2) << '\n';
  }

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw SchemaError("cannot write file: " + bin_path.string());
  std::vector<float> buf(cfr.data.size() * 2);
  for (std::size_t i = 0; i < cfr.data.size(); ++i) {
    buf[2 * i] = static_cast<float>(cfr.data[i].real());
    buf[2 * i + 1] = static_cast<float>(cfr.data[i].imag());
  }
  bin.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!bin) throw SchemaError("short write: " + bin_path.string());
}

DirectionalCfr load_cfr(const std::string& header_path) {
  std::ifstream in(header_path);
  if (!in) throw SchemaError("cannot open file: " + header_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(header_path + ": " + std::string(e.what()));
  }

  DirectionalCfr cfr;
  for (const char* key : {"pose_index", "angles", "f_start", "f_stop",
                          "n_freq", "seed", "data"}) {
    if (!j.contains(key)) {
      throw SchemaError(header_path + ": missing field '" + key + "'");
    }
  }
  cfr.pose_index = j["pose_index"].get<int>();
  cfr.angles_deg = j["angles"].get<std::vector<double>>();
  const double f_start = j["f_start"].get<double>();
  const double f_stop = j["f_stop"].get<double>();
  const int n_freq = j["n_freq"].get<int>();
  if (n_freq < 2 || !(f_stop > f_start)) {
    throw SchemaError(header_path + ": invalid frequency grid");
  }
  if (cfr.angles_deg.empty()) {
    throw SchemaError(header_path + ": field 'angles' is empty");
  }
  cfr.freqs = {f_start, (f_stop - f_start) / n_freq, n_freq};
  cfr.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("truth")) {
    for (const auto& t : j["truth"]) {
      GroundTruthPath g;
      g.amplitude = {t.at("amp_re").get<double>(), t.at("amp_im").get<double>()};
      g.delay_s = t.at("delay_s").get<double>();
      g.azimuth_deg = t.at("azimuth_deg").get<double>();
      g.origin = path_origin_from_string(t.at("origin").get<std::string>());
      cfr.truth.push_back(g);
    }
  }

  const fs::path bin_path =
      fs::path(header_path).parent_path() / j["data"].get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw SchemaError("cannot open file: " + bin_path.string());
  bin.seekg(0, std::ios::end);
  const auto actual = static_cast<std::uint64_t>(bin.tellg());
  bin.seekg(0, std::ios::beg);
  const std::uint64_t expect = static_cast<std::uint64_t>(cfr.angles_deg.size()) *
                               static_cast<std::uint64_t>(n_freq) * 2 *
                               sizeof(float);
  if (actual != expect) {
    throw SchemaError(bin_path.string() + ": binary length " +
                      std::to_string(actual) + " does not match header (" +
                      std::to_string(expect) + " bytes expected)");
  }
  std::vector<float> buf(cfr.angles_deg.size() * static_cast<std::size_t>(n_freq) * 2);
  bin.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!bin) throw SchemaError("short read: " + bin_path.string());
  cfr.data.resize(buf.size() / 2);
  for (std::size_t i = 0; i < cfr.data.size(); ++i) {
    cfr.data[i] = {static_cast<double>(buf[2 * i]),
                   static_cast<double>(buf[2 * i + 1])};
  }
  return cfr;
}

}  // namespace thzmono
