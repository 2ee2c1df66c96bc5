#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssf/manifest.hpp"
#include "ssf/qa.hpp"

namespace ssf {

// Structured view of an answer string.  kInvalid marks unparseable text,
// which scores as wrong rather than crashing the evaluation.
struct ParsedAnswer {
  enum class Kind { kInvalid, kCategoryList, kLocalization, kYesNo, kMeters, kLeftRight };
  Kind kind = Kind::kInvalid;
  std::vector<std::string> categories;  // kCategoryList
  OctantLabel octant;                   // kLocalization
  double distance_m = 0.0;              // kLocalization / kMeters
  bool yes = false;                     // kYesNo
  bool left = false;                    // kLeftRight
};

// Canonicalizes case/whitespace, then parses by question type.  For type E
// the payload style is inferred from the content (yes/no, meters,
// left/right, or a category list).
ParsedAnswer parse_answer(const std::string& text, QType qtype);

// Non-interpolated average precision for one category: mean of precision at
// each positive when ranked by descending score, ties broken by stable
// index.  truth[i] marks item i positive.  Throws when no positives exist.
double average_precision(const std::vector<double>& scores, const std::vector<bool>& truth);

// Macro-average over categories with at least one positive.  Outer index:
// record; inner map: category -> score (absent categories score 0).
double mean_average_precision(const std::vector<std::map<std::string, double>>& scores,
                              const std::vector<std::vector<std::string>>& truths,
                              const std::vector<std::string>& categories);

struct LocalizationMetrics {
  double er20 = 0.0;        // fraction with angular error > 20 degrees
  double mae_deg = 0.0;     // mean angular error
  double octant_acc = 0.0;  // exact octant-triple match rate
  double der = 0.0;         // fraction with |distance error| > 0.5 m
  int n_direction = 0;
  int n_octant = 0;
  int n_distance = 0;
};

struct EvalReport {
  // Detection (types A and C).
  double detection_accuracy = 0.0;  // canonicalized set match on answer text
  std::optional<double> map;        // present when detection scores were given
  int n_detection = 0;
  // Localization (types B and D).
  LocalizationMetrics localization;
  // Reasoning (type E).
  double ba_direction = 0.0;  // same_side + relative_dir
  double ba_distance = 0.0;   // closer
  double ba_avg = 0.0;
  double other_e_accuracy = 0.0;  // non-Yes/No subtypes, exact-match
  int n_ba_direction = 0;
  int n_ba_distance = 0;
  int n_other_e = 0;
  std::map<char, int> counts_per_qtype;

  std::string to_json() const;
  std::string to_table() const;
  std::string to_csv() const;
};

// Score a prediction set against a manifest.  Missing predictions count as
// wrong; duplicate prediction ids are an error.  Angular metrics use the
// `doa` field when present, distance metrics prefer `distance_m` and fall
// back to parsed answer text, octant accuracy prefers parsed text and falls
// back to the `doa` octant.
EvalReport evaluate(const std::vector<QaRecord>& manifest,
                    const std::vector<Prediction>& predictions);

}  // namespace ssf
