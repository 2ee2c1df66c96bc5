#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssf/corpus.hpp"
#include "ssf/manifest.hpp"
#include "ssf/qa.hpp"
#include "ssf/room.hpp"

namespace ssf {

// Target distribution of source distances, as probabilities over 0.5 m bin
// centers.  Ships as data rather than a constant; the default is
// right-skewed with its peak near 1.5-2 m.
struct DistanceDistribution {
  std::vector<double> bins;   // bin centers, multiples of 0.5 m
  std::vector<double> probs;  // same length, sums to 1

  void validate() const;
  double sample_bin(Rng& rng) const;
  // Bin center plus in-bin jitter; the result always quantizes back to the
  // sampled bin and never violates the minimum source distance.
  double sample_distance(Rng& rng) const;

  static DistanceDistribution defaults();
  static DistanceDistribution from_json_file(const std::string& path);
  void to_json_file(const std::string& path) const;
};

struct BuildConfig {
  enum class ArrayKind { kBinaural, kTetrahedral };
  enum class Placement { kHistogram, kUniform };

  int n_records = 0;
  std::uint64_t seed = 0;
  MixtureConfig mixture;
  DistanceDistribution distances = DistanceDistribution::defaults();
  Placement placement = Placement::kHistogram;

  ArrayKind array = ArrayKind::kBinaural;
  double head_radius_m = 0.0875;
  double tetra_edge_m = 0.10;
  double receiver_height_m = 1.5;

  // When false only the manifest is produced (geometry, questions and
  // answers are identical either way; audio_path stays null).
  bool render_audio = true;
  std::string output_dir;
  int jobs = 1;
};

// Draw n records per the mixture, synthesize scene geometry (and audio when
// requested, under output_dir/audio), and return the manifest records.
// Fully deterministic given the seed.
std::vector<QaRecord> build_dataset(const CorpusIndex& corpus, const std::string& corpus_dir,
                                    const std::vector<RoomPreset>& presets,
                                    const BuildConfig& config);

}  // namespace ssf
