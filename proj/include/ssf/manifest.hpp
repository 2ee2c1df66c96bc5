#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssf/geometry.hpp"
#include "ssf/qa.hpp"

namespace ssf {

inline constexpr int kManifestSchemaVersion = 1;

// JSONL manifest, one QA record per line; field order is fixed so reruns
// are byte-identical.
void save_manifest(const std::string& path, const std::vector<QaRecord>& records);
std::vector<QaRecord> load_manifest(const std::string& path);

std::string record_to_json_line(const QaRecord& record);
QaRecord record_from_json_line(const std::string& line);

// A model's output for one record; every field beyond the id is optional.
struct Prediction {
  std::string record_id;
  std::optional<std::string> answer_text;
  std::map<std::string, double> detection_scores;
  std::optional<Vec3> doa;  // direction, receiver frame (any nonzero norm)
  std::optional<double> distance_m;
};

void save_predictions(const std::string& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> load_predictions(const std::string& path);

// Instruction-tuning export: JSONL of {prompt, target}.
void export_instructions(const std::string& path, const std::vector<QaRecord>& records);

}  // namespace ssf
