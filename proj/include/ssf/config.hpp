#pragma once

#include <cstdint>
#include <string>

#include "ssf/dataset_builder.hpp"

namespace ssf {

// One JSON config drives the whole pipeline; CLI flags override fields.
struct PipelineConfig {
  std::string corpus_dir;       // holds corpus_index.jsonl + ontology.csv + clips/
  std::string presets_path;     // room presets JSON
  std::string rooms = "all";    // comma-separated preset names, or "all"
  std::string output_dir = "out";

  std::string array = "binaural";  // binaural | tetrahedral
  double head_radius_m = 0.0875;
  double tetra_edge_m = 0.10;
  double receiver_height_m = 1.5;

  MixtureConfig mixture;
  DistanceDistribution distances = DistanceDistribution::defaults();
  std::string placement = "histogram";  // histogram | uniform

  int n_records = 1000;
  std::uint64_t seed = 0;
  bool render_audio = true;
  int jobs = 1;

  static PipelineConfig from_json_file(const std::string& path);
  void validate() const;

  BuildConfig to_build_config() const;
  // Presets after applying the `rooms` filter.
  std::vector<RoomPreset> selected_presets() const;
};

}  // namespace ssf
