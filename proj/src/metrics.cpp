#include "ssf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace ssf {
namespace {

std::string canonicalize(const std::string& text) {
  std::string out;
  bool in_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = !out.empty();
      continue;
    }
    if (in_space) out += ' ';
    in_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> split_categories(const std::string& canonical) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= canonical.size()) {
    std::size_t next = canonical.find("; ", pos);
    if (next == std::string::npos) {
      out.push_back(canonical.substr(pos));
      break;
    }
    out.push_back(canonical.substr(pos, next - pos));
    pos = next + 2;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool parse_meters(const std::string& token, double& out) {
  if (token.size() < 2 || token.back() != 'm') return false;
  const std::string num = token.substr(0, token.size() - 1);
  try {
    std::size_t used = 0;
    out = std::stod(num, &used);
    return used == num.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

ParsedAnswer parse_answer(const std::string& text, QType qtype) {
  ParsedAnswer ans;
  const std::string canon = canonicalize(text);
  if (canon.empty()) return ans;

  switch (qtype) {
    case QType::kA:
    case QType::kC: {
      ans.kind = ParsedAnswer::Kind::kCategoryList;
      ans.categories = split_categories(canon);
      return ans;
    }
    case QType::kB:
    case QType::kD: {
      const std::size_t semi = canon.find(';');
      if (semi == std::string::npos) return ans;
      std::string left = canon.substr(0, semi);
      std::string dist = canonicalize(canon.substr(semi + 1));
      std::vector<std::string> words;
      std::size_t pos = 0;
      while (pos <= left.size()) {
        std::size_t next = left.find(',', pos);
        std::string w = canonicalize(next == std::string::npos ? left.substr(pos)
                                                               : left.substr(pos, next - pos));
        if (!w.empty()) words.push_back(w);
        if (next == std::string::npos) break;
        pos = next + 1;
      }
      if (words.size() != 3) return ans;
      double meters = 0.0;
      if (!parse_meters(dist, meters)) return ans;
      try {
        ans.octant = OctantLabel::from_words(words[0], words[1], words[2]);
      } catch (const std::exception&) {
        return ans;
      }
      ans.distance_m = meters;
      ans.kind = ParsedAnswer::Kind::kLocalization;
      return ans;
    }
    case QType::kE: {
      if (canon == "yes" || canon == "no") {
        ans.kind = ParsedAnswer::Kind::kYesNo;
        ans.yes = canon == "yes";
        return ans;
      }
      if (canon == "left" || canon == "right") {
        ans.kind = ParsedAnswer::Kind::kLeftRight;
        ans.left = canon == "left";
        return ans;
      }
      double meters = 0.0;
      if (parse_meters(canon, meters)) {
        ans.kind = ParsedAnswer::Kind::kMeters;
        ans.distance_m = meters;
        return ans;
      }
      ans.kind = ParsedAnswer::Kind::kCategoryList;
      ans.categories = split_categories(canon);
      return ans;
    }
  }
  return ans;
}

double average_precision(const std::vector<double>& scores, const std::vector<bool>& truth) {
  if (scores.size() != truth.size())
    throw std::invalid_argument("average_precision: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double sum_precision = 0.0;
  int positives = 0;
  int seen = 0;
  for (std::size_t idx : order) {
    ++seen;
    if (truth[idx]) {
      ++positives;
      sum_precision += static_cast<double>(positives) / seen;
    }
  }
  if (positives == 0) throw std::invalid_argument("average_precision: no positives");
  return sum_precision / positives;
}

double mean_average_precision(const std::vector<std::map<std::string, double>>& scores,
                              const std::vector<std::vector<std::string>>& truths,
                              const std::vector<std::string>& categories) {
  if (scores.size() != truths.size())
    throw std::invalid_argument("mean_average_precision: size mismatch");
  double sum_ap = 0.0;
  int n_categories = 0;
  for (const auto& cat : categories) {
    std::vector<double> cat_scores(scores.size(), 0.0);
    std::vector<bool> cat_truth(scores.size(), false);
    bool any_positive = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      auto it = scores[i].find(cat);
      if (it != scores[i].end()) cat_scores[i] = it->second;
      if (std::find(truths[i].begin(), truths[i].end(), cat) != truths[i].end()) {
        cat_truth[i] = true;
        any_positive = true;
      }
    }
    if (!any_positive) continue;
    sum_ap += average_precision(cat_scores, cat_truth);
    ++n_categories;
  }
  if (n_categories == 0)
    throw std::invalid_argument("mean_average_precision: no category has a positive");
  return sum_ap / n_categories;
}

EvalReport evaluate(const std::vector<QaRecord>& manifest,
                    const std::vector<Prediction>& predictions) {
  std::unordered_map<std::string, const Prediction*> by_id;
  std::set<std::string> manifest_ids;
  for (const auto& r : manifest) manifest_ids.insert(r.id);
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.record_id, &p).second)
      throw std::invalid_argument("evaluate: duplicate prediction id " + p.record_id);
    if (!manifest_ids.count(p.record_id))
      throw std::invalid_argument("evaluate: prediction id not in manifest: " + p.record_id);
  }

  EvalReport rep;
  int detection_correct = 0;
  std::vector<std::map<std::string, double>> map_scores;
  std::vector<std::vector<std::string>> map_truths;

  double angular_error_sum = 0.0;
  int er20_errors = 0, octant_correct = 0, der_errors = 0;
  int ba_dir_correct = 0, ba_dist_correct = 0, other_e_correct = 0;

  for (const auto& rec : manifest) {
    rep.counts_per_qtype[qtype_letter(rec.qtype)] += 1;
    const Prediction* pred = nullptr;
    if (auto it = by_id.find(rec.id); it != by_id.end()) pred = it->second;
    const int target = rec.truth.query.target < 0 ? 0 : rec.truth.query.target;
    const SourceTruth& truth_src = rec.truth.sources.at(static_cast<std::size_t>(target));

    switch (rec.qtype) {
      case QType::kA:
      case QType::kC: {
        rep.n_detection += 1;
        if (pred && pred->answer_text) {
          const auto got = parse_answer(*pred->answer_text, rec.qtype);
          const auto want = parse_answer(rec.answer, rec.qtype);
          if (got.kind == ParsedAnswer::Kind::kCategoryList && got.categories == want.categories)
            ++detection_correct;
        }
        if (pred && !pred->detection_scores.empty()) {
          map_scores.push_back(pred->detection_scores);
          map_truths.push_back(truth_src.categories);
        }
        break;
      }
      case QType::kB:
      case QType::kD: {
        rep.localization.n_octant += 1;
        rep.localization.n_distance += 1;

        std::optional<OctantLabel> octant_pred;
        std::optional<double> dist_pred;
        if (pred && pred->answer_text) {
          const auto got = parse_answer(*pred->answer_text, rec.qtype);
          if (got.kind == ParsedAnswer::Kind::kLocalization) {
            octant_pred = got.octant;
            dist_pred = got.distance_m;
          }
        }
        if (pred && pred->doa && !octant_pred) octant_pred = octant_of(*pred->doa);
        if (pred && pred->distance_m) dist_pred = *pred->distance_m;

        if (octant_pred && *octant_pred == truth_src.octant) ++octant_correct;
        // Distance truth is the labeled bin; errors beyond 0.5 m count.
        if (!dist_pred || std::abs(*dist_pred - truth_src.distance_bin) > 0.5) ++der_errors;

        if (pred && pred->doa && pred->doa->norm() > 0.0) {
          RelativeGeometry g;
          g.azimuth_deg = truth_src.azimuth_deg;
          g.elevation_deg = truth_src.elevation_deg;
          g.distance_m = 1.0;
          const double err = angular_error_deg(*pred->doa, g.unit_direction());
          rep.localization.n_direction += 1;
          angular_error_sum += err;
          if (err > 20.0) ++er20_errors;
        } else {
          // Missing direction cannot land within 20 degrees.
          ++er20_errors;
        }
        break;
      }
      case QType::kE: {
        const bool is_yes_no = rec.subtype && subtype_is_yes_no(*rec.subtype);
        bool correct = false;
        if (pred && pred->answer_text)
          correct = canonicalize(*pred->answer_text) == canonicalize(rec.answer);
        if (is_yes_no) {
          if (*rec.subtype == ESubtype::kCloser) {
            rep.n_ba_distance += 1;
            if (correct) ++ba_dist_correct;
          } else {
            rep.n_ba_direction += 1;
            if (correct) ++ba_dir_correct;
          }
        } else {
          rep.n_other_e += 1;
          if (correct) ++other_e_correct;
        }
        break;
      }
    }
  }

  if (rep.n_detection > 0)
    rep.detection_accuracy = static_cast<double>(detection_correct) / rep.n_detection;
  if (!map_scores.empty()) {
    std::set<std::string> cat_set;
    for (const auto& t : map_truths) cat_set.insert(t.begin(), t.end());
    rep.map = mean_average_precision(map_scores, map_truths,
                                     {cat_set.begin(), cat_set.end()});
  }
  auto& loc = rep.localization;
  if (loc.n_direction > 0) loc.mae_deg = angular_error_sum / loc.n_direction;
  if (loc.n_octant > 0) {
    loc.er20 = static_cast<double>(er20_errors) / loc.n_octant;
    loc.octant_acc = static_cast<double>(octant_correct) / loc.n_octant;
    loc.der = static_cast<double>(der_errors) / loc.n_distance;
  }
  if (rep.n_ba_direction > 0)
    rep.ba_direction = static_cast<double>(ba_dir_correct) / rep.n_ba_direction;
  if (rep.n_ba_distance > 0)
    rep.ba_distance = static_cast<double>(ba_dist_correct) / rep.n_ba_distance;
  if (rep.n_ba_direction > 0 && rep.n_ba_distance > 0)
    rep.ba_avg = (rep.ba_direction + rep.ba_distance) / 2.0;
  else
    rep.ba_avg = rep.n_ba_direction > 0 ? rep.ba_direction : rep.ba_distance;
  if (rep.n_other_e > 0)
    rep.other_e_accuracy = static_cast<double>(other_e_correct) / rep.n_other_e;
  return rep;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["counts"] = nlohmann::ordered_json::object();
  for (const auto& [t, c] : counts_per_qtype) j["counts"][std::string(1, t)] = c;
  j["detection"] = {{"exact_match_accuracy", detection_accuracy},
                    {"map", map ? nlohmann::ordered_json(*map) : nlohmann::ordered_json(nullptr)},
                    {"n", n_detection}};
  j["localization"] = {{"er20", localization.er20},
                       {"mae_deg", localization.mae_deg},
                       {"octant_acc", localization.octant_acc},
                       {"der", localization.der},
                       {"n_direction", localization.n_direction},
                       {"n_octant", localization.n_octant},
                       {"n_distance", localization.n_distance}};
  j["reasoning"] = {{"ba_direction", ba_direction}, {"ba_distance", ba_distance},
                    {"ba_avg", ba_avg},             {"other_accuracy", other_e_accuracy},
                    {"n_ba_direction", n_ba_direction}, {"n_ba_distance", n_ba_distance},
                    {"n_other", n_other_e}};
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << "counts:";
  for (const auto& [t, c] : counts_per_qtype) os << " " << t << "=" << c;
  os << "\n";
  os << "detection   exact-match " << 100.0 * detection_accuracy << "%";
  if (map) os << "  mAP " << 100.0 * *map << "%";
  os << "  (n=" << n_detection << ")\n";
  os << "doa         ER20 " << 100.0 * localization.er20 << "%  MAE " << localization.mae_deg
     << " deg  octant-acc " << 100.0 * localization.octant_acc << "%\n";
  os << "distance    DER " << 100.0 * localization.der << "%\n";
  os << "reasoning   BA direction " << 100.0 * ba_direction << "%  BA distance "
     << 100.0 * ba_distance << "%  BA avg " << 100.0 * ba_avg << "%  other-acc "
     << 100.0 * other_e_accuracy << "%\n";
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "metric,value\n";
  os << "detection_exact_match," << detection_accuracy << "\n";
  if (map) os << "map," << *map << "\n";
  os << "er20," << localization.er20 << "\n";
  os << "mae_deg," << localization.mae_deg << "\n";
  os << "octant_acc," << localization.octant_acc << "\n";
  os << "der," << localization.der << "\n";
  os << "ba_direction," << ba_direction << "\n";
  os << "ba_distance," << ba_distance << "\n";
  os << "ba_avg," << ba_avg << "\n";
  os << "other_e_accuracy," << other_e_accuracy << "\n";
  return os.str();
}

}  // namespace ssf
