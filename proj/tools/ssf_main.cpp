// ssf - spatial sound scene synthesis, QA generation and evaluation.
//
// Subcommands: synth-corpus, simulate-rir, spatialize, make-qa, features,
// rt60, baseline, evaluate, stats.  One JSON config plus a master seed
// drives the pipeline; flags override config fields.  Reruns with the same
// seed reproduce artifacts byte for byte.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssf/baselines.hpp"
#include "ssf/config.hpp"
#include "ssf/corpus.hpp"
#include "ssf/dataset_builder.hpp"
#include "ssf/embed_grader.hpp"
#include "ssf/frontend.hpp"
#include "ssf/ism.hpp"
#include "ssf/manifest.hpp"
#include "ssf/metrics.hpp"
#include "ssf/png.hpp"
#include "ssf/rt60.hpp"
#include "ssf/wav.hpp"

namespace fs = std::filesystem;
using namespace ssf;

namespace {

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  return PipelineConfig::from_json_file(path);
}

const RoomPreset& find_preset(const std::vector<RoomPreset>& presets, const std::string& name) {
  for (const auto& p : presets)
    if (p.name == name) return p;
  throw std::runtime_error("no preset named '" + name + "'");
}

ReceiverSpec receiver_for(const PipelineConfig& cfg, const RoomSpec& room) {
  const Vec3 pos(room.dimensions.x() / 2.0, room.dimensions.y() / 2.0,
                 std::min(cfg.receiver_height_m, room.dimensions.z() * 0.6));
  if (cfg.array == "tetrahedral") return ReceiverSpec::tetrahedral(pos, 0.0, cfg.tetra_edge_m);
  return ReceiverSpec::binaural(pos, 0.0, cfg.head_radius_m);
}

int run_synth_corpus(const std::string& out_dir, int n, std::uint64_t seed) {
  const CorpusIndex index = synth_corpus(out_dir, n, seed);
  std::cout << "wrote " << index.entries.size() << " clips, "
            << index.ontology.size() << " ontology entries under " << out_dir << "\n";
  return 0;
}

int run_simulate_rir(const PipelineConfig& cfg, const std::string& room_name, double sx,
                     double sy, double sz, const std::string& out_wav) {
  const auto presets = load_room_presets(cfg.presets_path);
  const RoomPreset& preset = find_preset(presets, room_name);
  const ReceiverSpec receiver = receiver_for(cfg, preset.room);
  const ImpulseResponse ir =
      simulate_rir(preset.room, SourceSpec{Vec3(sx, sy, sz)}, receiver);
  write_wav(out_wav, ir.channels, static_cast<int>(ir.sample_rate));

  nlohmann::ordered_json meta;
  meta["room"] = preset.name;
  meta["order"] = ir.order_used;
  meta["azimuth_deg"] = ir.geometry.azimuth_deg;
  meta["elevation_deg"] = ir.geometry.elevation_deg;
  meta["distance_m"] = ir.geometry.distance_m;
  std::ofstream(out_wav + ".json") << meta.dump(2) << "\n";
  std::cout << "wrote " << out_wav << " (" << ir.n_channels() << " ch, " << ir.length()
            << " samples)\n";
  return 0;
}

int run_spatialize(const PipelineConfig& cfg, const std::string& room_name,
                   const std::string& clip_path, double sx, double sy, double sz,
                   const std::string& out_wav) {
  const auto presets = load_room_presets(cfg.presets_path);
  const RoomPreset& preset = find_preset(presets, room_name);
  const ReceiverSpec receiver = receiver_for(cfg, preset.room);

  const WavData wav = read_wav(clip_path, kClipSampleRate);
  if (wav.channels() != 1) throw std::runtime_error("spatialize: clip must be mono");
  ClipSource clip;
  clip.samples = loudness_normalize(wav.samples.col(0));
  clip.categories = {"clip"};
  clip.id = clip_path;

  const ImpulseResponse ir =
      simulate_rir(preset.room, SourceSpec{Vec3(sx, sy, sz)}, receiver);
  const SpatialClip scene = spatialize(clip, ir);
  write_wav(out_wav, scene.channels, kClipSampleRate);
  std::cout << "wrote " << out_wav << "  [" << scene.sources[0].octant.words() << "; "
            << format_distance(scene.sources[0].distance_bin) << "]\n";
  return 0;
}

int run_make_qa(PipelineConfig cfg, const std::string& instructions_path, bool write_stages) {
  const CorpusIndex corpus = load_corpus_index(cfg.corpus_dir + "/corpus_index.jsonl",
                                               cfg.corpus_dir + "/ontology.csv");
  const auto presets = cfg.selected_presets();
  fs::create_directories(cfg.output_dir);
  const auto records = build_dataset(corpus, cfg.corpus_dir, presets, cfg.to_build_config());

  const std::string manifest_path = cfg.output_dir + "/manifest.jsonl";
  save_manifest(manifest_path, records);
  std::cout << "wrote " << records.size() << " records to " << manifest_path << "\n";

  if (write_stages) {
    const std::map<CurriculumStage, const char*> stages = {
        {CurriculumStage::kI, "stage1"},
        {CurriculumStage::kII, "stage2"},
        {CurriculumStage::kIII, "stage3"}};
    for (const auto& [stage, name] : stages) {
      const auto subset = curriculum_split(records, stage);
      const std::string path = cfg.output_dir + "/manifest." + name + ".jsonl";
      save_manifest(path, subset);
      std::cout << "  " << name << ": " << subset.size() << " records\n";
    }
  }
  if (!instructions_path.empty()) {
    export_instructions(instructions_path, records);
    std::cout << "wrote instruction records to " << instructions_path << "\n";
  }
  return 0;
}

int run_features(const std::string& manifest_path, const std::string& out_dir) {
  const auto records = load_manifest(manifest_path);
  const std::string base = fs::path(manifest_path).parent_path().string();
  fs::create_directories(out_dir);
  int written = 0;
  for (const auto& rec : records) {
    if (rec.audio_path.empty()) continue;
    const WavData wav = read_wav((fs::path(base) / rec.audio_path).string(), kClipSampleRate);
    if (wav.channels() != 2) continue;  // the front end is binaural
    SpatialClip clip;
    clip.channels = wav.samples;
    const FeatureTensor z = assemble_features(clip);
    write_feature_tensor((fs::path(out_dir) / (rec.id + ".bin")).string(), z);
    ++written;
  }
  std::cout << "wrote " << written << " feature tensors (4, 1024, 128) to " << out_dir << "\n";
  return 0;
}

int run_rt60(const PipelineConfig& cfg, const std::string& room_name,
             const std::string& ir_wav, const std::string& method) {
  if (!ir_wav.empty()) {
    const WavData wav = read_wav(ir_wav);
    Eigen::ArrayXd energy = Eigen::ArrayXd::Zero(wav.frames());
    for (Eigen::Index c = 0; c < wav.channels(); ++c)
      energy += wav.samples.col(c).cast<double>().square();
    // schroeder on a measured/simulated IR file
    std::cout << rt60_schroeder(energy.sqrt(), wav.sample_rate) << "\n";
    return 0;
  }
  const auto presets = load_room_presets(cfg.presets_path);
  const RoomPreset& preset = find_preset(presets, room_name);
  if (method == "sabine") {
    std::cout << rt60_sabine(preset.room) << "\n";
    return 0;
  }
  ReceiverSpec receiver;
  receiver.position = Vec3(0.38 * preset.room.dimensions.x(), 0.44 * preset.room.dimensions.y(),
                           std::min(1.5, 0.55 * preset.room.dimensions.z()));
  receiver.array_offsets = {Vec3::Zero()};
  SourceSpec source{Vec3(0.63 * preset.room.dimensions.x(), 0.57 * preset.room.dimensions.y(),
                         std::min(1.3, 0.6 * preset.room.dimensions.z()))};
  std::cout << rt60_schroeder(simulate_rir(preset.room, source, receiver)) << "\n";
  return 0;
}

int run_baseline_cmd(const PipelineConfig& cfg, const std::string& manifest_path,
                     const std::string& mode, const std::string& out_path, std::uint64_t seed) {
  const auto records = load_manifest(manifest_path);
  const auto presets = load_room_presets(cfg.presets_path);
  const BaselineMode m =
      mode == "tetrahedral" ? BaselineMode::kTetrahedral : BaselineMode::kBinaural;
  const auto preds =
      run_baseline(records, fs::path(manifest_path).parent_path().string(), presets, m, seed);
  save_predictions(out_path, preds);
  std::cout << "wrote " << preds.size() << " predictions to " << out_path << "\n";
  return 0;
}

int run_evaluate(const std::string& manifest_path, const std::string& pred_path,
                 const std::string& report_json, const std::string& report_csv,
                 bool embedding_grading) {
  const auto records = load_manifest(manifest_path);
  const auto preds = load_predictions(pred_path);
  const EvalReport report = evaluate(records, preds);
  std::cout << report.to_table();

  if (embedding_grading) {
    const EmbedEndpointConfig endpoint = EmbedEndpointConfig::from_env();
    if (!endpoint.configured()) {
      std::cerr << "embedding grading requested but SSF_EMBED_ENDPOINT is unset; "
                   "report uses exact-match grading only\n";
    } else {
      std::map<std::string, const Prediction*> by_id;
      for (const auto& p : preds) by_id[p.record_id] = &p;
      std::vector<std::string> pred_texts, true_texts;
      for (const auto& rec : records) {
        const auto it = by_id.find(rec.id);
        if (it == by_id.end() || !it->second->answer_text) continue;
        pred_texts.push_back(*it->second->answer_text);
        true_texts.push_back(rec.answer);
      }
      const auto sims = embedding_grade(pred_texts, true_texts, endpoint);
      const double mean =
          sims.empty() ? 0.0
                       : std::accumulate(sims.begin(), sims.end(), 0.0) / sims.size();
      std::cout << "embedding   mean cosine similarity " << mean << "  (n=" << sims.size()
                << ")\n";
    }
  }

  if (!report_json.empty()) std::ofstream(report_json) << report.to_json() << "\n";
  if (!report_csv.empty()) std::ofstream(report_csv) << report.to_csv();
  return 0;
}

int run_stats(const std::string& manifest_path, const std::string& out_csv,
              const std::string& plot_png) {
  const auto records = load_manifest(manifest_path);
  std::map<double, int> distance_hist;
  std::map<std::string, int> octant_hist;
  for (const auto& rec : records)
    for (const auto& src : rec.truth.sources) {
      distance_hist[src.distance_bin] += 1;
      octant_hist[src.octant.words()] += 1;
    }

  std::ostringstream csv;
  csv << "kind,key,count\n";
  for (const auto& [bin, count] : distance_hist)
    csv << "distance_bin," << bin << "," << count << "\n";
  for (const auto& [words, count] : octant_hist)
    csv << "octant,\"" << words << "\"," << count << "\n";
  if (out_csv.empty())
    std::cout << csv.str();
  else
    std::ofstream(out_csv) << csv.str();

  if (!plot_png.empty()) {
    std::vector<double> values;
    for (double b = 0.5; b <= 10.0; b += 0.5) {
      const auto it = distance_hist.find(b);
      values.push_back(it == distance_hist.end() ? 0.0 : it->second);
    }
    write_bar_chart_png(plot_png, values);
    std::cout << "wrote distance histogram plot to " << plot_png << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial sound scene synthesis, QA generation and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "pipeline config JSON")->envname("SSF_CONFIG");

  // synth-corpus
  auto* sc = app.add_subcommand("synth-corpus", "generate the synthetic labeled test corpus");
  sc->fallthrough();
  std::string sc_out = "corpus";
  int sc_n = 64;
  std::uint64_t sc_seed = 0;
  sc->add_option("--out", sc_out, "output directory");
  sc->add_option("--n", sc_n, "number of clips");
  sc->add_option("--seed", sc_seed, "master seed");

  // simulate-rir
  auto* sr = app.add_subcommand("simulate-rir", "render a room impulse response to WAV");
  sr->fallthrough();
  std::string sr_room = "bedroom_00", sr_out = "rir.wav";
  double sr_x = 0.0, sr_y = 0.0, sr_z = 0.0;
  sr->add_option("--room", sr_room, "room preset name");
  sr->add_option("--x", sr_x, "source x (m)")->required();
  sr->add_option("--y", sr_y, "source y (m)")->required();
  sr->add_option("--z", sr_z, "source z (m)")->required();
  sr->add_option("--out", sr_out, "output WAV path");

  // spatialize
  auto* sp = app.add_subcommand("spatialize", "convolve a mono clip into a room scene");
  sp->fallthrough();
  std::string sp_room = "bedroom_00", sp_clip, sp_out = "scene.wav";
  double sp_x = 0.0, sp_y = 0.0, sp_z = 0.0;
  sp->add_option("--room", sp_room, "room preset name");
  sp->add_option("--clip", sp_clip, "mono 32 kHz WAV")->required();
  sp->add_option("--x", sp_x, "source x (m)")->required();
  sp->add_option("--y", sp_y, "source y (m)")->required();
  sp->add_option("--z", sp_z, "source z (m)")->required();
  sp->add_option("--out", sp_out, "output WAV path");

  // make-qa
  auto* mq = app.add_subcommand("make-qa", "build the QA dataset (scenes + manifest + stages)");
  mq->fallthrough();
  int mq_n = -1;
  std::uint64_t mq_seed = 0;
  bool mq_no_render = false, mq_stages = false;
  std::string mq_out, mq_instructions;
  mq->add_option("--n", mq_n, "record count (overrides config)");
  mq->add_option("--seed", mq_seed, "master seed (overrides config)");
  mq->add_option("--out", mq_out, "output directory (overrides config)");
  mq->add_flag("--no-render-audio", mq_no_render, "manifest only, skip audio synthesis");
  mq->add_flag("--curriculum-splits", mq_stages, "also write stage I/II/III manifests");
  mq->add_option("--export-instructions", mq_instructions,
                 "write instruction-tuning JSONL to this path");

  // features
  auto* ft = app.add_subcommand("features", "export (4, 1024, 128) front-end tensors");
  ft->fallthrough();
  std::string ft_manifest, ft_out = "features";
  ft->add_option("--manifest", ft_manifest, "dataset manifest JSONL")->required();
  ft->add_option("--out", ft_out, "output directory");

  // rt60
  auto* rt = app.add_subcommand("rt60", "measure or predict reverberation time");
  rt->fallthrough();
  std::string rt_room, rt_ir, rt_method = "schroeder";
  rt->add_option("--room", rt_room, "room preset name");
  rt->add_option("--ir", rt_ir, "impulse response WAV (schroeder on file)");
  rt->add_option("--method", rt_method, "schroeder | sabine")
      ->check(CLI::IsMember({"schroeder", "sabine"}));

  // baseline
  auto* bl = app.add_subcommand("baseline", "run the classical DoA/distance baseline");
  bl->fallthrough();
  std::string bl_manifest, bl_mode = "binaural", bl_out = "predictions.jsonl";
  std::uint64_t bl_seed = 0;
  bl->add_option("--manifest", bl_manifest, "dataset manifest JSONL")->required();
  bl->add_option("--mode", bl_mode, "binaural | tetrahedral")
      ->check(CLI::IsMember({"binaural", "tetrahedral"}));
  bl->add_option("--out", bl_out, "predictions JSONL path");
  bl->add_option("--seed", bl_seed, "seed for the unknowable-axis guesses");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score predictions against a manifest");
  ev->fallthrough();
  std::string ev_manifest, ev_pred, ev_json, ev_csv;
  bool ev_embed = false;
  ev->add_option("--manifest", ev_manifest, "dataset manifest JSONL")->required();
  ev->add_option("--pred", ev_pred, "predictions JSONL")->required();
  ev->add_option("--report-json", ev_json, "write the report as JSON");
  ev->add_option("--report-csv", ev_csv, "write the report as CSV");
  ev->add_flag("--embedding-grade", ev_embed,
               "also score text similarity via SSF_EMBED_ENDPOINT");

  // stats
  auto* st = app.add_subcommand("stats", "distance/octant histograms from a manifest");
  st->fallthrough();
  std::string st_manifest, st_csv, st_png;
  st->add_option("--manifest", st_manifest, "dataset manifest JSONL")->required();
  st->add_option("--csv", st_csv, "write histogram CSV here (default: stdout)");
  st->add_option("--plot", st_png, "write a distance histogram PNG");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc->parsed()) return run_synth_corpus(sc_out, sc_n, sc_seed);

    PipelineConfig cfg = load_config(config_path);
    if (sr->parsed()) return run_simulate_rir(cfg, sr_room, sr_x, sr_y, sr_z, sr_out);
    if (sp->parsed()) return run_spatialize(cfg, sp_room, sp_clip, sp_x, sp_y, sp_z, sp_out);
    if (mq->parsed()) {
      if (mq_n > 0) cfg.n_records = mq_n;
      if (mq->count("--seed") > 0) cfg.seed = mq_seed;
      if (!mq_out.empty()) cfg.output_dir = mq_out;
      if (mq_no_render) cfg.render_audio = false;
      cfg.validate();
      return run_make_qa(cfg, mq_instructions, mq_stages);
    }
    if (ft->parsed()) return run_features(ft_manifest, ft_out);
    if (rt->parsed()) return run_rt60(cfg, rt_room, rt_ir, rt_method);
    if (bl->parsed()) return run_baseline_cmd(cfg, bl_manifest, bl_mode, bl_out, bl_seed);
    if (ev->parsed()) return run_evaluate(ev_manifest, ev_pred, ev_json, ev_csv, ev_embed);
    if (st->parsed()) return run_stats(st_manifest, st_csv, st_png);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
