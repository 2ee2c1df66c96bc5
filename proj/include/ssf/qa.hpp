#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssf/rng.hpp"
#include "ssf/scene.hpp"

namespace ssf {

enum class QType { kA, kB, kC, kD, kE };

enum class ESubtype {
  kSameSide,
  kRelativeDir,
  kCloser,
  kInterDistance,
  kClassOnSide,
  kLeftOrRight,
};

char qtype_letter(QType t);
QType qtype_from_letter(char c);
std::string subtype_name(ESubtype s);
ESubtype subtype_from_name(const std::string& name);

// Yes/No subtypes enter Binary Accuracy; same_side and relative_dir are
// direction-flavored, closer is distance-flavored.
bool subtype_is_yes_no(ESubtype s);

// Spatial axes in the receiver frame, named by their label pair.
enum class Axis { kLr, kFb, kUd };  // y, x, z
std::string axis_name(Axis a);
Axis axis_from_name(const std::string& name);
Axis axis_of_side(const std::string& side);
// Signed coordinate along the axis ("left", "front", "above" are positive).
double axis_coordinate(const Vec3& receiver_frame_pos, Axis a);
std::string side_word(Axis a, bool positive);
std::string opposite_side(const std::string& side);

struct SourceTruth {
  std::vector<std::string> categories;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 0.0;
  OctantLabel octant;
  double distance_bin = 0.0;
  Vec3 position = Vec3::Zero();  // receiver frame

  static SourceTruth from_placed(const PlacedSource& p);
};

// Structured form of the question, stored so the answer is regenerable.
struct QueryInfo {
  std::string form;  // "detection", "localization", or the E subtype name
  int target = -1;   // referenced source (C/D) or first operand (E)
  int other = -1;    // second operand for two-source queries
  std::optional<Axis> axis;
  std::string side;         // primary queried side word, if any
  std::string side2;        // second side for conjunction questions
  bool conjunction = false; // relative_dir: conjunction vs comparative form
  std::string event1;
  std::string event2;
};

struct TruthPayload {
  std::vector<SourceTruth> sources;
  QueryInfo query;
};

struct QaRecord {
  std::string id;
  std::string audio_path;
  std::string room;  // preset name the scene was rendered in
  int n_channels = 0;
  QType qtype = QType::kA;
  std::optional<ESubtype> subtype;
  std::string question;
  std::string answer;
  TruthPayload truth;
  std::uint64_t seed = 0;
};

// Question paraphrase bank keyed by "A", "B", "C", "D",
// "E.same_side", "E.relative_dir.conjunction", "E.relative_dir.comparative",
// "E.closer", "E.inter_distance", "E.class_on_side", "E.left_or_right".
class TemplateBank {
 public:
  static const TemplateBank& builtin();
  static TemplateBank from_json_file(const std::string& path);

  const std::vector<std::string>& templates(const std::string& key) const;
  std::string pick(const std::string& key, Rng& rng) const;

 private:
  std::map<std::string, std::vector<std::string>> bank_;
  void validate() const;
};

struct MixtureConfig {
  // Proportions summing to 1; defaults follow the published dataset mix.
  std::map<QType, double> proportions = {{QType::kA, 0.159},
                                         {QType::kB, 0.159},
                                         {QType::kC, 0.135},
                                         {QType::kD, 0.135},
                                         {QType::kE, 0.412}};

  void validate() const;
  // Deterministic per-type counts for n records (largest remainder).
  std::map<QType, int> counts(int n) const;
};

// Thrown when a scene cannot support the requested question; the caller
// resamples source placements.
struct IllPosedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Type A (1 source) / C (2 sources + target).  The type C question embeds
// the target's octant words and distance bin, which identify it uniquely
// because mixed scenes always use distinct octants.
QaRecord gen_detection(const SpatialClip& clip, int target, const TemplateBank& bank, Rng& rng);

// Type B (1 source) / D (2 sources, target referenced by one of its
// categories, which never collides because category sets are disjoint).
QaRecord gen_localization(const SpatialClip& clip, int target, const TemplateBank& bank,
                          Rng& rng);

// Type E.  Yes/No subtypes are balanced 50/50 by construction (the desired
// answer is drawn first and the proposition negated to match); throws
// IllPosedError when the geometry cannot support the subtype.
QaRecord gen_reasoning(const SpatialClip& clip, ESubtype subtype, const TemplateBank& bank,
                       Rng& rng);

// Re-derive the answer from the truth payload by the same rules that
// generated it.  Used by the manifest audit.
std::string derive_answer(QType qtype, const std::optional<ESubtype>& subtype,
                          const TruthPayload& truth);

// Quantizer for inter-source distances: nearest 0.5 m, ties up, floor 0.5.
double quantize_inter_distance(double meters);

// Stage I -> {A, B}; II -> {A, B, C, D}; III -> everything.
enum class CurriculumStage { kI, kII, kIII };
bool stage_includes(CurriculumStage stage, QType t);
std::vector<QaRecord> curriculum_split(const std::vector<QaRecord>& records,
                                       CurriculumStage stage);

// Instruction-tuning export: the prompt template is byte-exact.
std::string instruction_prompt(const std::string& question);

}  // namespace ssf
