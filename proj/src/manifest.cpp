#include "ssf/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ssf {
namespace {

using Json = nlohmann::ordered_json;

Json source_to_json(const SourceTruth& s) {
  Json j;
  j["categories"] = s.categories;
  j["azimuth_deg"] = s.azimuth_deg;
  j["elevation_deg"] = s.elevation_deg;
  j["distance_m"] = s.distance_m;
  j["octant"] = {s.octant.lr_word(), s.octant.fb_word(), s.octant.ud_word()};
  j["distance_bin"] = s.distance_bin;
  j["position"] = {s.position.x(), s.position.y(), s.position.z()};
  return j;
}

SourceTruth source_from_json(const nlohmann::json& j) {
  SourceTruth s;
  s.categories = j.at("categories").get<std::vector<std::string>>();
  s.azimuth_deg = j.at("azimuth_deg");
  s.elevation_deg = j.at("elevation_deg");
  s.distance_m = j.at("distance_m");
  auto oct = j.at("octant");
  s.octant = OctantLabel::from_words(oct.at(0), oct.at(1), oct.at(2));
  s.distance_bin = j.at("distance_bin");
  auto pos = j.at("position");
  s.position = Vec3(pos.at(0), pos.at(1), pos.at(2));
  return s;
}

Json query_to_json(const QueryInfo& q) {
  Json j;
  j["form"] = q.form;
  j["target"] = q.target;
  j["other"] = q.other;
  j["axis"] = q.axis ? Json(axis_name(*q.axis)) : Json(nullptr);
  j["side"] = q.side;
  j["side2"] = q.side2;
  j["conjunction"] = q.conjunction;
  j["event1"] = q.event1;
  j["event2"] = q.event2;
  return j;
}

QueryInfo query_from_json(const nlohmann::json& j) {
  QueryInfo q;
  q.form = j.at("form").get<std::string>();
  q.target = j.at("target");
  q.other = j.at("other");
  if (!j.at("axis").is_null()) q.axis = axis_from_name(j.at("axis").get<std::string>());
  q.side = j.at("side").get<std::string>();
  q.side2 = j.at("side2").get<std::string>();
  q.conjunction = j.at("conjunction");
  q.event1 = j.at("event1").get<std::string>();
  q.event2 = j.at("event2").get<std::string>();
  return q;
}

}  // namespace

std::string record_to_json_line(const QaRecord& record) {
  Json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["id"] = record.id;
  j["audio_path"] = record.audio_path.empty() ? Json(nullptr) : Json(record.audio_path);
  j["room"] = record.room;
  j["n_channels"] = record.n_channels;
  j["qtype"] = std::string(1, qtype_letter(record.qtype));
  j["subtype"] = record.subtype ? Json(subtype_name(*record.subtype)) : Json(nullptr);
  j["question"] = record.question;
  j["answer"] = record.answer;
  j["truth"] = Json::object();
  j["truth"]["sources"] = Json::array();
  for (const auto& s : record.truth.sources) j["truth"]["sources"].push_back(source_to_json(s));
  j["truth"]["query"] = query_to_json(record.truth.query);
  j["seed"] = record.seed;
  return j.dump();
}

QaRecord record_from_json_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  QaRecord r;
  r.id = j.at("id").get<std::string>();
  if (!j.at("audio_path").is_null()) r.audio_path = j.at("audio_path").get<std::string>();
  r.room = j.value("room", std::string());
  r.n_channels = j.value("n_channels", 0);
  r.qtype = qtype_from_letter(j.at("qtype").get<std::string>().at(0));
  if (!j.at("subtype").is_null())
    r.subtype = subtype_from_name(j.at("subtype").get<std::string>());
  r.question = j.at("question").get<std::string>();
  r.answer = j.at("answer").get<std::string>();
  for (const auto& s : j.at("truth").at("sources"))
    r.truth.sources.push_back(source_from_json(s));
  r.truth.query = query_from_json(j.at("truth").at("query"));
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

void save_manifest(const std::string& path, const std::vector<QaRecord>& records) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("manifest: cannot write " + path);
  for (const auto& r : records) f << record_to_json_line(r) << "\n";
  if (!f) throw std::runtime_error("manifest: short write to " + path);
}

std::vector<QaRecord> load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("manifest: cannot open " + path);
  std::vector<QaRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json_line(line));
  }
  return out;
}

void save_predictions(const std::string& path, const std::vector<Prediction>& predictions) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("predictions: cannot write " + path);
  for (const auto& p : predictions) {
    Json j;
    j["record_id"] = p.record_id;
    if (p.answer_text) j["answer_text"] = *p.answer_text;
    if (!p.detection_scores.empty()) j["detection_scores"] = p.detection_scores;
    if (p.doa) j["doa"] = {p.doa->x(), p.doa->y(), p.doa->z()};
    if (p.distance_m) j["distance_m"] = *p.distance_m;
    f << j.dump() << "\n";
  }
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("predictions: cannot open " + path);
  std::vector<Prediction> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Prediction p;
    p.record_id = j.at("record_id").get<std::string>();
    if (j.contains("answer_text") && !j.at("answer_text").is_null())
      p.answer_text = j.at("answer_text").get<std::string>();
    if (j.contains("detection_scores"))
      p.detection_scores = j.at("detection_scores").get<std::map<std::string, double>>();
    if (j.contains("doa") && !j.at("doa").is_null()) {
      auto d = j.at("doa");
      if (d.is_array() && d.size() == 3) {
        p.doa = Vec3(d.at(0), d.at(1), d.at(2));
      } else if (d.is_object()) {
        RelativeGeometry g;
        g.azimuth_deg = d.at("azimuth_deg");
        g.elevation_deg = d.at("elevation_deg");
        g.distance_m = 1.0;
        p.doa = g.unit_direction();
      }
    }
    if (j.contains("distance_m") && !j.at("distance_m").is_null())
      p.distance_m = j.at("distance_m").get<double>();
    out.push_back(std::move(p));
  }
  return out;
}

void export_instructions(const std::string& path, const std::vector<QaRecord>& records) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("instructions: cannot write " + path);
  for (const auto& r : records) {
    Json j;
    j["prompt"] = instruction_prompt(r.question);
    j["target"] = r.answer;
    f << j.dump() << "\n";
  }
}

}  // namespace ssf
