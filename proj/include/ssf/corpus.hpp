#pragma once

#include <string>
#include <vector>

#include "ssf/rng.hpp"
#include "ssf/scene.hpp"

namespace ssf {

struct OntologyEntry {
  std::string category_id;
  std::string display_name;
  double quality_percent = 100.0;  // [0, 100]
  bool visual_only = false;
  bool noise_like = false;
};

// CSV columns: id,display_name,quality_percent,visual_only,noise_like.
std::vector<OntologyEntry> load_ontology_csv(const std::string& path);
void save_ontology_csv(const std::string& path, const std::vector<OntologyEntry>& entries);

// Retain entries with quality >= min_quality that are not flagged; order
// preserved, idempotent.
std::vector<OntologyEntry> filter_ontology(const std::vector<OntologyEntry>& entries,
                                           double min_quality = 50.0, bool drop_visual = true,
                                           bool drop_noise = true);

struct CorpusEntry {
  std::string audio_path;
  std::vector<std::string> categories;
  double duration_s = 0.0;
};

struct CorpusIndex {
  std::vector<CorpusEntry> entries;
  std::vector<OntologyEntry> ontology;

  std::vector<std::string> ontology_ids() const;
};

// Index persisted as JSONL, one entry per line.
void save_corpus_index(const std::string& path, const CorpusIndex& index);
CorpusIndex load_corpus_index(const std::string& index_path, const std::string& ontology_csv);

// Verify every entry's file exists, parses at 32 kHz mono and matches the
// recorded duration.  Throws on the first violation.
void audit_corpus(const CorpusIndex& index, const std::string& base_dir);

// Generate a deterministic labeled corpus of synthetic clips (tones,
// chords, band noise, AM tones, chirps, ...), 1-10 s at 32 kHz, under
// `out_dir`: WAV files, corpus_index.jsonl and ontology.csv.  Categories
// number >= 8 so two-source disjointness is always satisfiable.
CorpusIndex synth_corpus(const std::string& out_dir, int n_clips, std::uint64_t seed);

// Load one corpus clip as a ClipSource (mono, 32 kHz enforced).
ClipSource load_clip(const CorpusIndex& index, std::size_t entry, const std::string& base_dir);

}  // namespace ssf
