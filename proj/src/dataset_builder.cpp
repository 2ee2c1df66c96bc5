#include "ssf/dataset_builder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "ssf/ism.hpp"
#include "ssf/wav.hpp"

namespace fs = std::filesystem;

namespace ssf {

void DistanceDistribution::validate() const {
  if (bins.empty() || bins.size() != probs.size())
    throw std::invalid_argument("distance distribution: bins/probs size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (probs[i] < 0.0) throw std::invalid_argument("distance distribution: negative probability");
    const double ratio = bins[i] / kDistanceBinWidth;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || bins[i] < kDistanceBinWidth ||
        bins[i] > kMaxLabelDistance)
      throw std::invalid_argument("distance distribution: bins must be 0.5 m multiples in "
                                  "[0.5, 10]");
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("distance distribution: probabilities must sum to 1");
}

double DistanceDistribution::sample_bin(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    acc += probs[i];
    if (u < acc) return bins[i];
  }
  return bins.back();
}

double DistanceDistribution::sample_distance(Rng& rng) const {
  const double bin = sample_bin(rng);
  const double lo = std::max(bin - kDistanceBinWidth / 2.0, kMinSourceDistance);
  const double hi = bin + kDistanceBinWidth / 2.0;  // exclusive; ties quantize upward
  return rng.uniform(lo, hi);
}

DistanceDistribution DistanceDistribution::defaults() {
  DistanceDistribution d;
  d.bins = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5};
  d.probs = {0.05, 0.16, 0.22, 0.20, 0.14, 0.10, 0.06, 0.04, 0.03};
  d.validate();
  return d;
}

DistanceDistribution DistanceDistribution::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("distance distribution: cannot open " + path);
  nlohmann::json j;
  f >> j;
  DistanceDistribution d;
  d.bins = j.at("bins").get<std::vector<double>>();
  d.probs = j.at("probabilities").get<std::vector<double>>();
  d.validate();
  return d;
}

void DistanceDistribution::to_json_file(const std::string& path) const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["bin_width_m"] = kDistanceBinWidth;
  j["bins"] = bins;
  j["probabilities"] = probs;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("distance distribution: cannot write " + path);
  f << j.dump(2) << "\n";
}

namespace {

struct PlannedScene {
  std::size_t preset = 0;
  ReceiverSpec receiver;
  std::vector<std::size_t> clip_entries;
  std::vector<SourceSpec> sources;  // world frame
  std::vector<PlacedSource> placed;
};

PlacedSource make_placed(const CorpusEntry& clip, const Vec3& world_pos,
                         const ReceiverSpec& receiver) {
  PlacedSource p;
  p.clip_id = clip.audio_path;
  p.categories = clip.categories;
  std::sort(p.categories.begin(), p.categories.end());
  p.position_receiver_frame =
      world_to_receiver_frame(world_pos - receiver.position, receiver.heading_deg);
  p.geometry = geometry_from_receiver_frame(p.position_receiver_frame);
  auto [octant, bin] = spatial_labels(p.geometry);
  p.octant = octant;
  p.distance_bin = bin;
  return p;
}

bool categories_disjoint(const CorpusEntry& a, const CorpusEntry& b) {
  for (const auto& ca : a.categories)
    for (const auto& cb : b.categories)
      if (ca == cb) return false;
  return true;
}

bool octant_margin_ok(const Vec3& rel) {
  const double d = rel.norm();
  if (d <= 0.0) return false;
  const double sin_margin = std::sin(deg_to_rad(kOctantMarginDeg));
  return std::abs(rel.x()) >= d * sin_margin && std::abs(rel.y()) >= d * sin_margin &&
         std::abs(rel.z()) >= d * sin_margin;
}

// One source position honoring wall margins, the minimum receiver distance
// and the octant margin.  Histogram mode keeps the sampled distance and
// retries directions so the configured distance distribution is preserved.
bool try_place(const RoomSpec& room, const ReceiverSpec& receiver,
               const DistanceDistribution& dist, BuildConfig::Placement mode, Rng& rng,
               Vec3& out) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    Vec3 candidate;
    if (mode == BuildConfig::Placement::kHistogram) {
      const double d = dist.sample_distance(rng);
      bool ok = false;
      for (int dir_try = 0; dir_try < 60; ++dir_try) {
        const double z = rng.uniform(-1.0, 1.0);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 dir_rec(r * std::cos(phi), r * std::sin(phi), z);
        if (!octant_margin_ok(dir_rec)) continue;
        const double th = deg_to_rad(receiver.heading_deg);
        Eigen::Matrix3d rot;
        rot << std::cos(th), -std::sin(th), 0.0, std::sin(th), std::cos(th), 0.0, 0.0, 0.0, 1.0;
        candidate = receiver.position + rot * (dir_rec * d);
        if (room.contains(candidate, kWallMargin)) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
    } else {
      candidate = Vec3(rng.uniform(kWallMargin, room.dimensions.x() - kWallMargin),
                       rng.uniform(kWallMargin, room.dimensions.y() - kWallMargin),
                       rng.uniform(kWallMargin, room.dimensions.z() - kWallMargin));
      const Vec3 rel =
          world_to_receiver_frame(candidate - receiver.position, receiver.heading_deg);
      if ((candidate - receiver.position).norm() < kMinSourceDistance) continue;
      if ((candidate - receiver.position).norm() > kMaxLabelDistance) continue;
      if (!octant_margin_ok(rel)) continue;
    }
    out = candidate;
    return true;
  }
  return false;
}

ReceiverSpec make_receiver(const RoomSpec& room, const BuildConfig& config, Rng& rng) {
  const double margin = 0.8;
  Vec3 pos;
  for (int i = 0; i < 3; ++i) {
    const double lo = std::min(margin, room.dimensions[i] / 2.0);
    pos[i] = rng.uniform(lo, room.dimensions[i] - lo);
  }
  // Upright stance: fixed listening height when the room allows it.
  pos.z() = std::min(config.receiver_height_m, room.dimensions.z() * 0.6);
  const double heading = rng.uniform(0.0, 360.0);
  if (config.array == BuildConfig::ArrayKind::kBinaural)
    return ReceiverSpec::binaural(pos, heading, config.head_radius_m);
  return ReceiverSpec::tetrahedral(pos, heading, config.tetra_edge_m);
}

void render_scene(const PlannedScene& scene, const CorpusIndex& corpus,
                  const std::string& corpus_dir, const std::vector<RoomPreset>& presets,
                  const std::string& wav_path) {
  const RoomPreset& preset = presets[scene.preset];
  std::vector<SpatialClip> parts;
  for (std::size_t s = 0; s < scene.sources.size(); ++s) {
    ClipSource clip = load_clip(corpus, scene.clip_entries[s], corpus_dir);
    clip.samples = loudness_normalize(clip.samples);
    const ImpulseResponse ir = simulate_rir(preset.room, scene.sources[s], scene.receiver);
    SpatialClip sc = spatialize(clip, ir);
    sc.room_id = preset.name;
    parts.push_back(std::move(sc));
  }
  SpatialClip final_scene = parts.size() == 2 ? mix_scene(parts[0], parts[1]) : parts[0];
  write_wav(wav_path, final_scene.channels, kClipSampleRate);
}

}  // namespace

std::vector<QaRecord> build_dataset(const CorpusIndex& corpus, const std::string& corpus_dir,
                                    const std::vector<RoomPreset>& presets,
                                    const BuildConfig& config) {
  if (config.n_records < 1) throw std::invalid_argument("build_dataset: n_records must be >= 1");
  if (corpus.entries.empty()) throw std::invalid_argument("build_dataset: empty corpus");
  if (presets.empty()) throw std::invalid_argument("build_dataset: no room presets");
  config.mixture.validate();
  config.distances.validate();

  // Deterministic type sequence: largest-remainder quotas, then a seeded
  // shuffle so curriculum subsets interleave all rooms and clips.
  const auto counts = config.mixture.counts(config.n_records);
  std::vector<QType> type_of;
  type_of.reserve(static_cast<std::size_t>(config.n_records));
  for (const auto& [t, c] : counts)
    for (int i = 0; i < c; ++i) type_of.push_back(t);
  Rng master(config.seed);
  Rng shuffle_rng = master.split("type-shuffle");
  for (std::size_t i = type_of.size(); i > 1; --i)
    std::swap(type_of[i - 1], type_of[shuffle_rng.uniform_int(i)]);

  // Two-source types need at least one disjoint clip pair.
  const bool needs_pairs = counts.at(QType::kC) + counts.at(QType::kD) + counts.at(QType::kE) > 0;
  if (needs_pairs) {
    bool found = false;
    for (std::size_t i = 0; i < corpus.entries.size() && !found; ++i)
      for (std::size_t j = i + 1; j < corpus.entries.size() && !found; ++j)
        if (categories_disjoint(corpus.entries[i], corpus.entries[j])) found = true;
    if (!found)
      throw std::invalid_argument(
          "build_dataset: corpus lacks two clips with disjoint categories");
  }

  const TemplateBank& bank = TemplateBank::builtin();
  std::vector<QaRecord> records(static_cast<std::size_t>(config.n_records));
  std::vector<PlannedScene> scenes(static_cast<std::size_t>(config.n_records));

  for (int i = 0; i < config.n_records; ++i) {
    Rng rng = master.split("record", static_cast<std::uint64_t>(i));
    const QType qtype = type_of[static_cast<std::size_t>(i)];
    const int k = (qtype == QType::kA || qtype == QType::kB) ? 1 : 2;

    PlannedScene scene;
    scene.preset = rng.uniform_int(presets.size());
    const RoomSpec& room = presets[scene.preset].room;
    scene.receiver = make_receiver(room, config, rng);

    scene.clip_entries.clear();
    if (k == 1) {
      scene.clip_entries.push_back(rng.uniform_int(corpus.entries.size()));
    } else {
      for (int tries = 0;; ++tries) {
        if (tries > 500)
          throw std::runtime_error("build_dataset: cannot draw disjoint-category clips");
        const std::size_t a = rng.uniform_int(corpus.entries.size());
        const std::size_t b = rng.uniform_int(corpus.entries.size());
        if (a != b && categories_disjoint(corpus.entries[a], corpus.entries[b])) {
          scene.clip_entries = {a, b};
          break;
        }
      }
    }

    const ESubtype subtype = qtype == QType::kE ? static_cast<ESubtype>(rng.uniform_int(6))
                                                : ESubtype::kSameSide;

    QaRecord rec;
    bool done = false;
    for (int attempt = 0; attempt < 500 && !done; ++attempt) {
      scene.sources.clear();
      scene.placed.clear();
      bool placed_ok = true;
      for (int s = 0; s < k; ++s) {
        Vec3 pos;
        if (!try_place(room, scene.receiver, config.distances, config.placement, rng, pos)) {
          placed_ok = false;
          break;
        }
        PlacedSource p =
            make_placed(corpus.entries[scene.clip_entries[static_cast<std::size_t>(s)]], pos,
                        scene.receiver);
        if (s == 1 && p.octant == scene.placed[0].octant) {
          placed_ok = false;
          break;
        }
        scene.sources.push_back(SourceSpec{pos});
        scene.placed.push_back(std::move(p));
      }
      if (!placed_ok) continue;

      SpatialClip meta;  // geometry-only carrier for the QA generators
      meta.sources = scene.placed;
      meta.room_id = presets[scene.preset].name;

      try {
        switch (qtype) {
          case QType::kA:
            rec = gen_detection(meta, -1, bank, rng);
            break;
          case QType::kB:
            rec = gen_localization(meta, -1, bank, rng);
            break;
          case QType::kC:
            rec = gen_detection(meta, static_cast<int>(rng.uniform_int(2)), bank, rng);
            break;
          case QType::kD:
            rec = gen_localization(meta, static_cast<int>(rng.uniform_int(2)), bank, rng);
            break;
          case QType::kE:
            rec = gen_reasoning(meta, subtype, bank, rng);
            break;
        }
        done = true;
      } catch (const IllPosedError&) {
        // Geometry cannot support this question; draw fresh placements.
      }
    }
    if (!done)
      throw std::runtime_error("build_dataset: could not build a well-posed scene for record " +
                               std::to_string(i));

    char id[32];
    std::snprintf(id, sizeof(id), "qa-%08d", i);
    rec.id = id;
    rec.room = presets[scene.preset].name;
    rec.n_channels = static_cast<int>(scene.receiver.n_mics());
    rec.seed = rng.state();
    if (config.render_audio) rec.audio_path = std::string("audio/") + id + ".wav";
    records[static_cast<std::size_t>(i)] = std::move(rec);
    scenes[static_cast<std::size_t>(i)] = std::move(scene);
  }

  if (config.render_audio) {
    if (config.output_dir.empty())
      throw std::invalid_argument("build_dataset: output_dir required to render audio");
    fs::create_directories(fs::path(config.output_dir) / "audio");
    const int jobs = std::max(1, config.jobs);
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= config.n_records) return;
        const std::string wav_path =
            (fs::path(config.output_dir) / records[static_cast<std::size_t>(i)].audio_path)
                .string();
        render_scene(scenes[static_cast<std::size_t>(i)], corpus, corpus_dir, presets, wav_path);
      }
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
  }

  return records;
}

}  // namespace ssf
