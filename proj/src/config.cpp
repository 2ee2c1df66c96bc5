#include "ssf/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ssf {

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  f >> j;

  const int schema = j.value("schema_version", 1);
  if (schema != 1)
    throw std::runtime_error("config: unsupported schema_version " + std::to_string(schema));

  PipelineConfig c;
  c.corpus_dir = j.value("corpus_dir", c.corpus_dir);
  c.presets_path = j.value("presets_path", c.presets_path);
  c.rooms = j.value("rooms", c.rooms);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.array = j.value("array", c.array);
  c.head_radius_m = j.value("head_radius_m", c.head_radius_m);
  c.tetra_edge_m = j.value("tetra_edge_m", c.tetra_edge_m);
  c.receiver_height_m = j.value("receiver_height_m", c.receiver_height_m);
  if (j.contains("mixture")) {
    for (auto it = j["mixture"].begin(); it != j["mixture"].end(); ++it)
      c.mixture.proportions[qtype_from_letter(it.key().at(0))] = it.value().get<double>();
  }
  if (j.contains("distance_distribution")) {
    c.distances.bins = j["distance_distribution"].at("bins").get<std::vector<double>>();
    c.distances.probs =
        j["distance_distribution"].at("probabilities").get<std::vector<double>>();
  } else if (j.contains("distance_distribution_path")) {
    c.distances = DistanceDistribution::from_json_file(
        j["distance_distribution_path"].get<std::string>());
  }
  c.placement = j.value("placement", c.placement);
  c.n_records = j.value("n_records", c.n_records);
  c.seed = j.value("seed", c.seed);
  c.render_audio = j.value("render_audio", c.render_audio);
  c.jobs = j.value("jobs", c.jobs);
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  mixture.validate();
  distances.validate();
  if (array != "binaural" && array != "tetrahedral")
    throw std::invalid_argument("config: array must be 'binaural' or 'tetrahedral'");
  if (placement != "histogram" && placement != "uniform")
    throw std::invalid_argument("config: placement must be 'histogram' or 'uniform'");
  if (n_records < 1) throw std::invalid_argument("config: n_records must be >= 1");
  if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
}

BuildConfig PipelineConfig::to_build_config() const {
  BuildConfig b;
  b.n_records = n_records;
  b.seed = seed;
  b.mixture = mixture;
  b.distances = distances;
  b.placement = placement == "uniform" ? BuildConfig::Placement::kUniform
                                       : BuildConfig::Placement::kHistogram;
  b.array = array == "tetrahedral" ? BuildConfig::ArrayKind::kTetrahedral
                                   : BuildConfig::ArrayKind::kBinaural;
  b.head_radius_m = head_radius_m;
  b.tetra_edge_m = tetra_edge_m;
  b.receiver_height_m = receiver_height_m;
  b.render_audio = render_audio;
  b.output_dir = output_dir;
  b.jobs = jobs;
  return b;
}

std::vector<RoomPreset> PipelineConfig::selected_presets() const {
  if (presets_path.empty()) throw std::invalid_argument("config: presets_path is required");
  const auto all = load_room_presets(presets_path);
  if (rooms == "all") {
    // Everything except the anechoic reference room, which is opt-in.
    std::vector<RoomPreset> out;
    for (const auto& p : all)
      if (p.category != "Anechoic") out.push_back(p);
    return out.empty() ? all : out;
  }
  std::vector<RoomPreset> out;
  std::stringstream ss(rooms);
  std::string name;
  while (std::getline(ss, name, ',')) {
    bool found = false;
    for (const auto& p : all) {
      if (p.name == name || p.category == name) {
        out.push_back(p);
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("config: no preset named '" + name + "'");
  }
  return out;
}

}  // namespace ssf
