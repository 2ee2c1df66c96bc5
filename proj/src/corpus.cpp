#include "ssf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ssf/wav.hpp"

namespace fs = std::filesystem;

namespace ssf {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

bool parse_bool(const std::string& s) {
  return s == "1" || s == "true" || s == "True" || s == "TRUE" || s == "yes";
}

}  // namespace

std::vector<OntologyEntry> load_ontology_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("ontology: cannot open " + path);
  std::vector<OntologyEntry> out;
  std::set<std::string> seen;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      if (!fields.empty() && fields[0] == "id") continue;  // header
    }
    if (fields.size() < 5)
      throw std::runtime_error("ontology: bad row (need 5 columns): " + line);
    OntologyEntry e;
    e.category_id = fields[0];
    e.display_name = fields[1];
    e.quality_percent = std::stod(fields[2]);
    e.visual_only = parse_bool(fields[3]);
    e.noise_like = parse_bool(fields[4]);
    if (e.quality_percent < 0.0 || e.quality_percent > 100.0)
      throw std::runtime_error("ontology: quality out of [0, 100] for " + e.category_id);
    if (!seen.insert(e.category_id).second)
      throw std::runtime_error("ontology: duplicate id " + e.category_id);
    out.push_back(std::move(e));
  }
  return out;
}

void save_ontology_csv(const std::string& path, const std::vector<OntologyEntry>& entries) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("ontology: cannot write " + path);
  f << "id,display_name,quality_percent,visual_only,noise_like\n";
  for (const auto& e : entries)
    f << csv_escape(e.category_id) << ',' << csv_escape(e.display_name) << ','
      << e.quality_percent << ',' << (e.visual_only ? 1 : 0) << ',' << (e.noise_like ? 1 : 0)
      << "\n";
}

std::vector<OntologyEntry> filter_ontology(const std::vector<OntologyEntry>& entries,
                                           double min_quality, bool drop_visual,
                                           bool drop_noise) {
  std::vector<OntologyEntry> out;
  for (const auto& e : entries) {
    if (e.quality_percent < min_quality) continue;
    if (drop_visual && e.visual_only) continue;
    if (drop_noise && e.noise_like) continue;
    out.push_back(e);
  }
  return out;
}

std::vector<std::string> CorpusIndex::ontology_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ontology.size());
  for (const auto& e : ontology) ids.push_back(e.category_id);
  return ids;
}

void save_corpus_index(const std::string& path, const CorpusIndex& index) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("corpus index: cannot write " + path);
  for (const auto& e : index.entries) {
    nlohmann::ordered_json j;
    j["path"] = e.audio_path;
    j["categories"] = e.categories;
    j["duration_s"] = e.duration_s;
    f << j.dump() << "\n";
  }
}

CorpusIndex load_corpus_index(const std::string& index_path, const std::string& ontology_csv) {
  CorpusIndex index;
  index.ontology = load_ontology_csv(ontology_csv);
  std::set<std::string> known;
  for (const auto& e : index.ontology) known.insert(e.category_id);

  std::ifstream f(index_path);
  if (!f) throw std::runtime_error("corpus index: cannot open " + index_path);
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    CorpusEntry e;
    e.audio_path = j.at("path").get<std::string>();
    e.categories = j.at("categories").get<std::vector<std::string>>();
    e.duration_s = j.at("duration_s").get<double>();
    if (e.categories.empty())
      throw std::runtime_error("corpus index: entry without categories: " + e.audio_path);
    for (const auto& c : e.categories)
      if (!known.count(c))
        throw std::runtime_error("corpus index: category '" + c + "' missing from ontology");
    if (!(e.duration_s > 0.0))
      throw std::runtime_error("corpus index: non-positive duration: " + e.audio_path);
    index.entries.push_back(std::move(e));
  }
  return index;
}

void audit_corpus(const CorpusIndex& index, const std::string& base_dir) {
  for (const auto& e : index.entries) {
    const std::string full = (fs::path(base_dir) / e.audio_path).string();
    WavData wav = read_wav(full, kClipSampleRate);
    if (wav.channels() != 1)
      throw std::runtime_error("corpus audit: " + full + " is not mono");
    const double dur = static_cast<double>(wav.frames()) / kClipSampleRate;
    if (std::abs(dur - e.duration_s) > 0.5 / kClipSampleRate)
      throw std::runtime_error("corpus audit: duration mismatch for " + full);
  }
}

ClipSource load_clip(const CorpusIndex& index, std::size_t entry, const std::string& base_dir) {
  const CorpusEntry& e = index.entries.at(entry);
  const std::string full = (fs::path(base_dir) / e.audio_path).string();
  WavData wav = read_wav(full, kClipSampleRate);
  if (wav.channels() != 1) throw std::runtime_error("corpus: " + full + " is not mono");
  ClipSource clip;
  clip.samples = wav.samples.col(0);
  clip.categories = e.categories;
  std::sort(clip.categories.begin(), clip.categories.end());
  clip.id = e.audio_path;
  return clip;
}

namespace {

struct Generator {
  std::string name;
  std::vector<std::string> categories;
  // Fills `out` (preallocated) with a stationary waveform.
  void (*render)(Eigen::ArrayXf& out, Rng& rng);
};

void render_tone(Eigen::ArrayXf& out, double freq, double phase) {
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = static_cast<float>(std::sin(2.0 * kPi * freq * i / kClipSampleRate + phase));
}

void render_chord(Eigen::ArrayXf& out, Rng& rng, double third_ratio) {
  const double root = rng.uniform(200.0, 320.0);
  const double ratios[3] = {1.0, third_ratio, 1.5};
  out.setZero();
  for (double r : ratios) {
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    for (Eigen::Index i = 0; i < out.size(); ++i)
      out(i) += static_cast<float>(
          std::sin(2.0 * kPi * root * r * i / kClipSampleRate + phase) / 3.0);
  }
}

void render_band_noise(Eigen::ArrayXf& out, Rng& rng, double f_lo, double f_hi) {
  constexpr int kPartials = 120;
  out.setZero();
  const float scale = 1.0f / std::sqrt(static_cast<float>(kPartials));
  for (int p = 0; p < kPartials; ++p) {
    const double freq = rng.uniform(f_lo, f_hi);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double step = 2.0 * kPi * freq / kClipSampleRate;
    for (Eigen::Index i = 0; i < out.size(); ++i)
      out(i) += scale * static_cast<float>(std::sin(step * i + phase));
  }
}

void render_chirp(Eigen::ArrayXf& out, double f_start, double f_end) {
  const double n = static_cast<double>(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / kClipSampleRate;
    const double k = (f_end - f_start) / (n / kClipSampleRate);
    out(i) = static_cast<float>(std::sin(2.0 * kPi * (f_start * t + 0.5 * k * t * t)));
  }
}

const std::vector<Generator>& generators() {
  static const std::vector<Generator> gens = {
      {"tone_440", {"tone_440"},
       [](Eigen::ArrayXf& out, Rng& rng) { render_tone(out, 440.0, rng.uniform(0.0, 2.0 * kPi)); }},
      {"tone_880", {"tone_880"},
       [](Eigen::ArrayXf& out, Rng& rng) { render_tone(out, 880.0, rng.uniform(0.0, 2.0 * kPi)); }},
      {"tone_1760", {"tone_1760"},
       [](Eigen::ArrayXf& out, Rng& rng) { render_tone(out, 1760.0, rng.uniform(0.0, 2.0 * kPi)); }},
      {"chord_major", {"chord_major", "harmonic_stack"},
       [](Eigen::ArrayXf& out, Rng& rng) { render_chord(out, rng, 1.25); }},
      {"chord_minor", {"chord_minor", "harmonic_stack"},
       [](Eigen::ArrayXf& out, Rng& rng) { render_chord(out, rng, 1.2); }},
      {"noise_white", {"noise_white"},
       [](Eigen::ArrayXf& out, Rng& rng) {
         for (Eigen::Index i = 0; i < out.size(); ++i)
           out(i) = static_cast<float>(rng.normal() * 0.25);
       }},
      {"noise_lowband", {"noise_lowband"},
       [](Eigen::ArrayXf& out, Rng& rng) { render_band_noise(out, rng, 100.0, 800.0); }},
      {"noise_highband", {"noise_highband"},
       [](Eigen::ArrayXf& out, Rng& rng) { render_band_noise(out, rng, 4000.0, 10000.0); }},
      {"am_tone", {"am_tone", "tone_440"},
       [](Eigen::ArrayXf& out, Rng& rng) {
         const double fm = rng.uniform(3.0, 6.0);
         render_tone(out, 440.0, rng.uniform(0.0, 2.0 * kPi));
         for (Eigen::Index i = 0; i < out.size(); ++i)
           out(i) *= static_cast<float>(1.0 + 0.4 * std::sin(2.0 * kPi * fm * i / kClipSampleRate));
       }},
      {"chirp_up", {"chirp_up"},
       [](Eigen::ArrayXf& out, Rng&) { render_chirp(out, 200.0, 8000.0); }},
      {"chirp_down", {"chirp_down"},
       [](Eigen::ArrayXf& out, Rng&) { render_chirp(out, 8000.0, 200.0); }},
      {"square_wave", {"harmonic_stack", "square_wave"},
       [](Eigen::ArrayXf& out, Rng& rng) {
         const double f0 = rng.uniform(100.0, 140.0);
         out.setZero();
         for (int h = 1; f0 * h < 8000.0; h += 2)
           for (Eigen::Index i = 0; i < out.size(); ++i)
             out(i) += static_cast<float>(
                 std::sin(2.0 * kPi * f0 * h * i / kClipSampleRate) / h);
       }},
  };
  return gens;
}

}  // namespace

CorpusIndex synth_corpus(const std::string& out_dir, int n_clips, std::uint64_t seed) {
  if (n_clips < 1) throw std::invalid_argument("synth_corpus: need at least 1 clip");
  const auto& gens = generators();

  fs::create_directories(fs::path(out_dir) / "clips");

  CorpusIndex index;
  std::set<std::string> cat_ids;
  for (const auto& g : gens)
    for (const auto& c : g.categories) cat_ids.insert(c);
  for (const auto& c : cat_ids)
    index.ontology.push_back({c, c, 100.0, false, false});

  Rng master(seed);
  for (int i = 0; i < n_clips; ++i) {
    Rng rng = master.split("clip", static_cast<std::uint64_t>(i));
    const Generator& gen = gens[static_cast<std::size_t>(i) % gens.size()];
    const double duration = rng.uniform(1.0, 10.0);
    const Eigen::Index n = static_cast<Eigen::Index>(std::lround(duration * kClipSampleRate));

    Eigen::ArrayXf wave(n);
    gen.render(wave, rng);
    const float peak = wave.abs().maxCoeff();
    if (peak > 0.0f) wave *= 0.7f / peak;

    char name[64];
    std::snprintf(name, sizeof(name), "clips/clip_%05d_%s.wav", i, gen.name.c_str());
    write_wav((fs::path(out_dir) / name).string(), wave, kClipSampleRate);

    CorpusEntry e;
    e.audio_path = name;
    e.categories = gen.categories;
    e.duration_s = static_cast<double>(n) / kClipSampleRate;
    index.entries.push_back(std::move(e));
  }

  save_corpus_index((fs::path(out_dir) / "corpus_index.jsonl").string(), index);
  save_ontology_csv((fs::path(out_dir) / "ontology.csv").string(), index.ontology);
  return index;
}

}  // namespace ssf
