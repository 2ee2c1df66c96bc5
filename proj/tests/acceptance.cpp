// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.  Exit status is the number
// of failed criteria.
//
// Usage: acceptance <data_dir>   (data_dir holds room_presets.json and
//                                 distance_distribution.json)

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ism_oracle.hpp"
#include "ssf/baselines.hpp"
#include "ssf/corpus.hpp"
#include "ssf/dataset_builder.hpp"
#include "ssf/frontend.hpp"
#include "ssf/ism.hpp"
#include "ssf/manifest.hpp"
#include "ssf/metrics.hpp"
#include "ssf/rng.hpp"
#include "ssf/rt60.hpp"
#include "ssf/wav.hpp"
#include "test_util.hpp"

using namespace ssf;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

double wrap_pi(double x) {
  while (x > kPi) x -= 2.0 * kPi;
  while (x <= -kPi) x += 2.0 * kPi;
  return x;
}

// ---------------------------------------------------------------- criterion 1
void criterion_feature_shape() {
  Rng rng(101);
  bool shapes_ok = true;
  double worst_ms = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    SpatialClip clip;
    clip.channels = Eigen::ArrayXXf(kClipSamples, 2);
    for (Eigen::Index i = 0; i < kClipSamples; ++i) {
      clip.channels(i, 0) = static_cast<float>(rng.normal() * 0.1);
      clip.channels(i, 1) = static_cast<float>(rng.normal() * 0.1);
    }
    const auto t0 = std::chrono::steady_clock::now();
    const FeatureTensor z = assemble_features(clip);
    const auto t1 = std::chrono::steady_clock::now();
    worst_ms = std::max(worst_ms,
                        std::chrono::duration<double, std::milli>(t1 - t0).count());
    for (const auto& plane : z.planes)
      shapes_ok = shapes_ok && plane.rows() == 1024 && plane.cols() == 128 && plane.allFinite();
    shapes_ok = shapes_ok && z.planes.size() == 4;
  }
  const bool timing_ok = worst_ms < 1000.0;
  report(1, shapes_ok && timing_ok,
         "feature tensors are (4, 1024, 128), " + fmt(worst_ms, 0) + " ms per clip (< 1 s)");
}

// ---------------------------------------------------------------- criterion 2
void criterion_ipd_delay_law() {
  // Bin-centered multi-tone exciting ~11% of bins so the top magnitude
  // decile sits strictly inside the excited set.
  struct Tone {
    std::vector<int> bins;
    std::vector<double> phases;
    double at(double n) const {
      double v = 0.0;
      for (std::size_t i = 0; i < bins.size(); ++i)
        v += std::cos(2.0 * kPi * bins[i] * n / kStftWindow + phases[i]);
      return v / std::sqrt(static_cast<double>(bins.size()));
    }
  } tone;
  Rng rng(102);
  for (int k = 5; k < 508; k += 9) {
    tone.bins.push_back(k);
    tone.phases.push_back(rng.uniform(0.0, 2.0 * kPi));
  }

  double worst = 0.0;
  long checked = 0;
  for (int delay : {1, 2, 4, 8}) {
    Eigen::ArrayXd left(kClipSamples), right(kClipSamples);
    for (Eigen::Index n = 0; n < kClipSamples; ++n) {
      left(n) = tone.at(static_cast<double>(n));
      right(n) = tone.at(static_cast<double>(n) - delay);
    }
    const Stft sl = stft(left), sr = stft(right);
    const Eigen::MatrixXd phase = ipd(sl, sr);
    const Eigen::MatrixXd mag = sl.frames.cwiseAbs();

    std::vector<double> mags(mag.data(), mag.data() + mag.size());
    std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() * 9 / 10),
                     mags.end());
    const double p90 = mags[mags.size() * 9 / 10];

    for (Eigen::Index t = 0; t < phase.rows(); t += 7) {
      for (Eigen::Index f = 0; f < phase.cols(); ++f) {
        if (mag(t, f) < p90) continue;
        const double expect =
            wrap_pi(-2.0 * kPi * static_cast<double>(f) * delay / kStftWindow);
        worst = std::max(worst, std::abs(wrap_pi(phase(t, f) - expect)));
        ++checked;
      }
    }
  }
  report(2, worst < 1e-3 && checked > 10000,
         "IPD matches wrap(-2 pi k D / 1024) on top-decile bins, worst |err| = " +
             fmt(worst, 6) + " rad over D in {1,2,4,8}");
}

// ---------------------------------------------------------------- criterion 3
void criterion_ism_oracle() {
  Rng rng(103);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 5 && ok; ++trial) {
    RoomSpec room;
    room.dimensions = Vec3(rng.uniform(2.5, 7.5), rng.uniform(2.2, 6.0), rng.uniform(2.2, 3.6));
    room.set_uniform_absorption(rng.uniform(0.05, 0.8));
    room.max_reflection_order = 1 + static_cast<int>(rng.uniform_int(3));
    const Vec3 src(rng.uniform(0.4, room.dimensions.x() - 0.4),
                   rng.uniform(0.4, room.dimensions.y() - 0.4),
                   rng.uniform(0.4, room.dimensions.z() - 0.4));
    const Vec3 mic(rng.uniform(0.4, room.dimensions.x() - 0.4),
                   rng.uniform(0.4, room.dimensions.y() - 0.4),
                   rng.uniform(0.4, room.dimensions.z() - 0.4));
    if ((src - mic).norm() < 0.05) continue;

    auto got = image_arrivals(room, src, mic, room.max_reflection_order);
    auto want = ssf_test::enumerate_arrivals(room, src, mic, room.max_reflection_order);
    if (got.size() != want.size()) {
      ok = false;
      detail = "arrival count mismatch";
      break;
    }
    auto by_delay = [](const auto& a, const auto& b) {
      return a.delay_s != b.delay_s ? a.delay_s < b.delay_s : a.amplitude < b.amplitude;
    };
    std::sort(got.begin(), got.end(), by_delay);
    std::sort(want.begin(), want.end(), by_delay);
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (std::abs(got[i].delay_s - want[i].delay_s) * room.sample_rate > 0.5 ||
          std::abs(got[i].amplitude - want[i].amplitude) >
              1e-6 * std::abs(want[i].amplitude)) {
        ok = false;
        detail = "arrival mismatch at index " + std::to_string(i);
        break;
      }
    }
  }
  report(3, ok, ok ? "image-source arrivals match brute-force enumeration on 5 random shoeboxes"
                   : detail);
}

// ---------------------------------------------------------------- criterion 4
void criterion_rt60(const std::string& data_dir) {
  // Synthetic exponential decay with an exact 0.20 s RT60.
  const double target = 0.20;
  const double tau = 2.0 * target / std::log(1e6);
  Rng rng(104);
  Eigen::ArrayXd ir(static_cast<Eigen::Index>(0.8 * 32000));
  for (Eigen::Index i = 0; i < ir.size(); ++i)
    ir(i) = std::exp(-static_cast<double>(i) / (tau * 32000.0)) * rng.normal();
  const double synthetic = rt60_schroeder(ir, 32000.0);
  const bool synthetic_ok = std::abs(synthetic - target) / target <= 0.02;

  const auto presets = load_room_presets(data_dir + "/room_presets.json");
  int measured = 0;
  double worst_rel = 0.0;
  double min_rt = 1e9, max_rt = 0.0;
  for (const auto& p : presets) {
    if (p.category == "Anechoic") continue;
    ReceiverSpec receiver;
    receiver.position = Vec3(0.38 * p.room.dimensions.x(), 0.44 * p.room.dimensions.y(),
                             std::min(1.5, 0.55 * p.room.dimensions.z()));
    receiver.array_offsets = {Vec3::Zero()};
    SourceSpec source{Vec3(0.63 * p.room.dimensions.x(), 0.57 * p.room.dimensions.y(),
                           std::min(1.3, 0.6 * p.room.dimensions.z()))};
    const double rt = rt60_schroeder(simulate_rir(p.room, source, receiver));
    worst_rel = std::max(worst_rel, std::abs(rt - p.target_rt60) / p.target_rt60);
    min_rt = std::min(min_rt, rt);
    max_rt = std::max(max_rt, rt);
    ++measured;
  }
  const bool presets_ok = measured == 90 && worst_rel <= 0.20 && min_rt >= 0.15 && max_rt <= 0.25;
  report(4, synthetic_ok && presets_ok,
         "synthetic RT60 " + fmt(synthetic) + " s (target 0.20 +/-2%); 90 presets within " +
             fmt(100.0 * worst_rel, 1) + "% of targets, range [" + fmt(min_rt, 3) + ", " +
             fmt(max_rt, 3) + "] s");
}

// ---------------------------------------------------------------- criterion 5
void criterion_chance_floors(const std::string& data_dir) {
  const int n = 100000;
  Rng rng(105);

  // Uniform octant guessing against uniformly drawn truth octants.
  int octant_hits = 0;
  for (int i = 0; i < n; ++i)
    if (rng.uniform_int(8) == rng.uniform_int(8)) ++octant_hits;
  const double octant_acc = 100.0 * octant_hits / n;

  // Uniform distance-bin guessing over the configured distribution's
  // support, truth drawn from the distribution; DER counts |err| > 0.5 m.
  const auto dist = DistanceDistribution::from_json_file(data_dir +
                                                         "/distance_distribution.json");
  int der_errors = 0;
  for (int i = 0; i < n; ++i) {
    const double truth = dist.sample_bin(rng);
    const double guess = dist.bins[rng.uniform_int(dist.bins.size())];
    if (std::abs(truth - guess) > 0.5) ++der_errors;
  }
  const double der = 100.0 * der_errors / n;

  // Random Yes/No against balanced truths.
  int ba_hits = 0;
  for (int i = 0; i < n; ++i)
    if (rng.coin() == rng.coin()) ++ba_hits;
  const double ba = 100.0 * ba_hits / n;

  const bool ok = std::abs(octant_acc - 12.5) <= 1.0 && std::abs(der - 67.0) <= 3.0 &&
                  std::abs(ba - 50.0) <= 1.0;
  report(5, ok,
         "chance floors at n=100k: octant " + fmt(octant_acc, 2) + "% (12.5 +/-1), DER " +
             fmt(der, 2) + "% (67 +/-3), BA " + fmt(ba, 2) + "% (50 +/-1)");
}

// ------------------------------------------------------- criteria 6, 7 and 8
void criteria_dataset(const std::string& data_dir, const std::string& scratch) {
  const CorpusIndex corpus = synth_corpus(scratch + "/corpus", 64, 42);
  const auto presets = load_room_presets(data_dir + "/room_presets.json");
  std::vector<RoomPreset> rooms;
  for (const auto& p : presets)
    if (p.category != "Anechoic") rooms.push_back(p);

  BuildConfig config;
  config.n_records = 100000;
  config.seed = 20240601;
  config.render_audio = false;
  config.distances =
      DistanceDistribution::from_json_file(data_dir + "/distance_distribution.json");
  const auto records = build_dataset(corpus, scratch + "/corpus", rooms, config);

  // --- criterion 6: mixture and curriculum shares.
  std::map<QType, int> counts;
  for (const auto& r : records) counts[r.qtype] += 1;
  const std::map<QType, double> expect = {{QType::kA, 15.9},
                                          {QType::kB, 15.9},
                                          {QType::kC, 13.5},
                                          {QType::kD, 13.5},
                                          {QType::kE, 41.2}};
  bool mixture_ok = static_cast<int>(records.size()) == config.n_records;
  std::ostringstream mixture_detail;
  for (const auto& [t, pct] : expect) {
    const double got = 100.0 * counts[t] / records.size();
    mixture_ok = mixture_ok && std::abs(got - pct) <= 0.5;
    mixture_detail << qtype_letter(t) << "=" << fmt(got, 2) << "% ";
  }
  const double stage1 =
      100.0 * curriculum_split(records, CurriculumStage::kI).size() / records.size();
  const double stage2 =
      100.0 * curriculum_split(records, CurriculumStage::kII).size() / records.size();
  const double stage3 =
      100.0 * curriculum_split(records, CurriculumStage::kIII).size() / records.size();
  mixture_ok = mixture_ok && std::abs(stage1 - 31.8) <= 0.5 && std::abs(stage2 - 58.8) <= 0.5 &&
               stage3 == 100.0;
  report(6, mixture_ok,
         "100k-record mixture " + mixture_detail.str() + "| stages " + fmt(stage1, 2) + "/" +
             fmt(stage2, 2) + "/" + fmt(stage3, 0) + "%");

  // --- criterion 7: golden answer formats + full-manifest regeneration.
  bool golden_ok = true;
  {
    PlacedSource p;
    p.categories = {"speech", "laughter", "baby laughter"};
    p.position_receiver_frame = Vec3(-0.5, 0.6, -0.55);  // left, behind, below; ~0.96 m
    p.geometry = geometry_from_receiver_frame(p.position_receiver_frame);
    auto [oct, bin] = spatial_labels(p.geometry);
    p.octant = oct;
    p.distance_bin = bin;
    SpatialClip clip;
    clip.sources = {p};
    Rng grng(107);
    const QaRecord det = gen_detection(clip, -1, TemplateBank::builtin(), grng);
    const QaRecord loc = gen_localization(clip, -1, TemplateBank::builtin(), grng);
    golden_ok = det.answer == "baby laughter; laughter; speech" &&
                loc.answer == "left, behind, below; 1m";
  }
  int regen_mismatches = 0;
  int margin_violations = 0;
  for (const auto& rec : records) {
    if (derive_answer(rec.qtype, rec.subtype, rec.truth) != rec.answer) ++regen_mismatches;
    if (rec.qtype == QType::kE) {
      const auto& q = rec.truth.query;
      const auto& t = rec.truth.sources[static_cast<std::size_t>(q.target)];
      const auto& o = rec.truth.sources[static_cast<std::size_t>(q.other)];
      if (*rec.subtype == ESubtype::kCloser &&
          std::abs(t.distance_m - o.distance_m) < 0.5)
        ++margin_violations;
      const bool comparative = (*rec.subtype == ESubtype::kRelativeDir && !q.conjunction) ||
                               *rec.subtype == ESubtype::kClassOnSide ||
                               *rec.subtype == ESubtype::kLeftOrRight;
      if (comparative && std::abs(axis_coordinate(t.position, *q.axis) -
                                  axis_coordinate(o.position, *q.axis)) < 0.2)
        ++margin_violations;
    }
  }
  report(7, golden_ok && regen_mismatches == 0 && margin_violations == 0,
         std::string("golden formats byte-match") + (golden_ok ? "" : " (MISMATCH)") +
             "; regeneration audit: " + std::to_string(regen_mismatches) +
             " mismatches, tie-margin audit: " + std::to_string(margin_violations) +
             " violations in 100k records");

  // --- criterion 8: oracle fixed point through the evaluator.
  std::vector<QaRecord> subset(records.begin(),
                               records.begin() + std::min<std::size_t>(records.size(), 20000));
  std::vector<Prediction> oracle;
  for (const auto& rec : subset) {
    Prediction p;
    p.record_id = rec.id;
    p.answer_text = rec.answer;
    oracle.push_back(std::move(p));
  }
  const EvalReport rep = evaluate(subset, oracle);
  const bool oracle_ok = rep.localization.octant_acc == 1.0 && rep.localization.der == 0.0 &&
                         rep.ba_direction == 1.0 && rep.ba_distance == 1.0 &&
                         rep.detection_accuracy == 1.0 && rep.other_e_accuracy == 1.0;
  report(8, oracle_ok,
         "oracle fixed point: octant " + fmt(100.0 * rep.localization.octant_acc, 1) +
             "%, DER " + fmt(100.0 * rep.localization.der, 1) + "%, BA " +
             fmt(100.0 * rep.ba_avg, 1) + "%");
}

// ---------------------------------------------------------------- criterion 9
void criterion_baselines(const std::string& data_dir, const std::string& scratch) {
  const auto t_start = std::chrono::steady_clock::now();
  const CorpusIndex corpus = synth_corpus(scratch + "/bl_corpus", 48, 77);
  const auto presets = load_room_presets(data_dir + "/room_presets.json");
  std::vector<RoomPreset> anechoic;
  for (const auto& p : presets)
    if (p.category == "Anechoic") anechoic.push_back(p);

  BuildConfig config;
  config.n_records = 500;
  config.seed = 31337;
  config.mixture.proportions = {{QType::kA, 0.0},
                                {QType::kB, 1.0},
                                {QType::kC, 0.0},
                                {QType::kD, 0.0},
                                {QType::kE, 0.0}};
  config.render_audio = true;
  config.jobs = 2;
  config.distances =
      DistanceDistribution::from_json_file(data_dir + "/distance_distribution.json");

  // Tetrahedral run.
  config.array = BuildConfig::ArrayKind::kTetrahedral;
  config.output_dir = scratch + "/tetra";
  const auto tetra_records =
      build_dataset(corpus, scratch + "/bl_corpus", anechoic, config);
  const auto tetra_preds =
      run_baseline(tetra_records, scratch + "/tetra", presets, BaselineMode::kTetrahedral, 5);
  const EvalReport tetra_rep = evaluate(tetra_records, tetra_preds);

  // Binaural run.
  config.array = BuildConfig::ArrayKind::kBinaural;
  config.output_dir = scratch + "/binaural";
  const auto bin_records = build_dataset(corpus, scratch + "/bl_corpus", anechoic, config);
  const auto bin_preds =
      run_baseline(bin_records, scratch + "/binaural", presets, BaselineMode::kBinaural, 5);
  const EvalReport bin_rep = evaluate(bin_records, bin_preds);

  // Left/right bit accuracy for |azimuth| > 10 degrees.
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : bin_preds) by_id[p.record_id] = &p;
  int lr_total = 0, lr_hits = 0;
  for (const auto& rec : bin_records) {
    const auto& src = rec.truth.sources[0];
    if (std::abs(src.azimuth_deg) <= 10.0) continue;
    const auto it = by_id.find(rec.id);
    if (it == by_id.end() || !it->second->doa) continue;
    ++lr_total;
    if ((it->second->doa->y() > 0.0) == (src.position.y() > 0.0)) ++lr_hits;
  }
  const double lr_acc = lr_total > 0 ? 100.0 * lr_hits / lr_total : 0.0;

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  const bool ok = tetra_rep.localization.mae_deg < 5.0 && tetra_rep.localization.er20 < 0.02 &&
                  lr_acc > 95.0 && tetra_rep.localization.der < 0.20 &&
                  bin_rep.localization.der < 0.20 && elapsed < 600.0;
  report(9, ok,
         "tetra MAE " + fmt(tetra_rep.localization.mae_deg, 2) + " deg (<5), ER20 " +
             fmt(100.0 * tetra_rep.localization.er20, 2) + "% (<2), lr-bit " + fmt(lr_acc, 1) +
             "% (>95), DER tetra/binaural " + fmt(100.0 * tetra_rep.localization.der, 1) + "/" +
             fmt(100.0 * bin_rep.localization.der, 1) + "% (<20), " + fmt(elapsed, 0) +
             " s (<600)");
}

// --------------------------------------------------------------- criterion 10
void criterion_map_oracle() {
  // Rank-counting brute force, fully independent of the sort-based path.
  const auto oracle = [](const std::vector<double>& scores, const std::vector<bool>& truth) {
    double sum = 0.0;
    int positives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!truth[i]) continue;
      int rank = 1, pos_above = 0;
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) {
          ++rank;
          if (truth[j]) ++pos_above;
        }
      }
      sum += static_cast<double>(pos_above + 1) / rank;
      ++positives;
    }
    return sum / positives;
  };

  Rng rng(110);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(40));
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<bool> truth(static_cast<std::size_t>(n));
    bool any = false;
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = std::floor(rng.uniform() * 6.0) / 6.0;
      truth[static_cast<std::size_t>(i)] = rng.coin();
      any = any || truth[static_cast<std::size_t>(i)];
    }
    if (!any) truth[static_cast<std::size_t>(rng.uniform_int(n))] = true;
    worst = std::max(worst, std::abs(average_precision(scores, truth) - oracle(scores, truth)));
  }
  report(10, worst <= 1e-9,
         "AP matches the brute-force oracle on 200 random instances, worst |err| = " +
             fmt(worst, 12));
}

// --------------------------------------------------------------- criterion 11
void criterion_determinism(const std::string& data_dir, const std::string& scratch) {
  const CorpusIndex corpus = synth_corpus(scratch + "/det_corpus", 36, 4242);
  const auto presets = load_room_presets(data_dir + "/room_presets.json");
  std::vector<RoomPreset> rooms;
  for (const auto& p : presets)
    if (p.category != "Anechoic") rooms.push_back(p);

  const auto run_once = [&](const std::string& out_dir) {
    BuildConfig config;
    config.n_records = 16;
    config.seed = 99;
    config.render_audio = true;
    config.jobs = 2;
    config.output_dir = out_dir;
    config.distances =
        DistanceDistribution::from_json_file(data_dir + "/distance_distribution.json");
    const auto records = build_dataset(corpus, scratch + "/det_corpus", rooms, config);
    save_manifest(out_dir + "/manifest.jsonl", records);
    for (const auto& rec : records) {
      const WavData wav = read_wav(out_dir + "/" + rec.audio_path, kClipSampleRate);
      SpatialClip clip;
      clip.channels = wav.samples;
      write_feature_tensor(out_dir + "/" + rec.id + ".bin", assemble_features(clip));
    }
    const auto preds = run_baseline(records, out_dir, presets, BaselineMode::kBinaural, 7);
    save_predictions(out_dir + "/predictions.jsonl", preds);
    return records;
  };

  fs::create_directories(scratch + "/run_a");
  fs::create_directories(scratch + "/run_b");
  const auto records = run_once(scratch + "/run_a");
  run_once(scratch + "/run_b");

  bool identical = slurp(scratch + "/run_a/manifest.jsonl") ==
                   slurp(scratch + "/run_b/manifest.jsonl");
  identical = identical && slurp(scratch + "/run_a/predictions.jsonl") ==
                               slurp(scratch + "/run_b/predictions.jsonl");
  for (const auto& rec : records) {
    identical = identical && slurp(scratch + "/run_a/" + rec.audio_path) ==
                                 slurp(scratch + "/run_b/" + rec.audio_path);
    identical = identical && slurp(scratch + "/run_a/" + rec.id + ".bin") ==
                                 slurp(scratch + "/run_b/" + rec.id + ".bin");
  }
  report(11, identical,
         "two seeded pipeline runs produced byte-identical manifests, audio, features and "
         "predictions");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : "data";
  TempDir scratch("acceptance");
  try {
    criterion_feature_shape();
    criterion_ipd_delay_law();
    criterion_ism_oracle();
    criterion_rt60(data_dir);
    criterion_chance_floors(data_dir);
    criteria_dataset(data_dir, scratch.path.string());
    criterion_baselines(data_dir, scratch.path.string());
    criterion_map_oracle();
    criterion_determinism(data_dir, scratch.path.string());
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite aborted: " << e.what() << "\n";
    return 99;
  }
  std::printf("%s\n", g_failures == 0 ? "all criteria passed" : "SOME CRITERIA FAILED");
  return g_failures;
}
