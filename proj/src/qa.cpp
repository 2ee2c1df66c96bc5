#include "ssf/qa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ssf {

char qtype_letter(QType t) {
  switch (t) {
    case QType::kA: return 'A';
    case QType::kB: return 'B';
    case QType::kC: return 'C';
    case QType::kD: return 'D';
    case QType::kE: return 'E';
  }
  throw std::logic_error("bad qtype");
}

QType qtype_from_letter(char c) {
  switch (c) {
    case 'A': return QType::kA;
    case 'B': return QType::kB;
    case 'C': return QType::kC;
    case 'D': return QType::kD;
    case 'E': return QType::kE;
    default: throw std::invalid_argument(std::string("bad qtype letter '") + c + "'");
  }
}

std::string subtype_name(ESubtype s) {
  switch (s) {
    case ESubtype::kSameSide: return "same_side";
    case ESubtype::kRelativeDir: return "relative_dir";
    case ESubtype::kCloser: return "closer";
    case ESubtype::kInterDistance: return "inter_distance";
    case ESubtype::kClassOnSide: return "class_on_side";
    case ESubtype::kLeftOrRight: return "left_or_right";
  }
  throw std::logic_error("bad subtype");
}

ESubtype subtype_from_name(const std::string& name) {
  if (name == "same_side") return ESubtype::kSameSide;
  if (name == "relative_dir") return ESubtype::kRelativeDir;
  if (name == "closer") return ESubtype::kCloser;
  if (name == "inter_distance") return ESubtype::kInterDistance;
  if (name == "class_on_side") return ESubtype::kClassOnSide;
  if (name == "left_or_right") return ESubtype::kLeftOrRight;
  throw std::invalid_argument("bad subtype name '" + name + "'");
}

bool subtype_is_yes_no(ESubtype s) {
  return s == ESubtype::kSameSide || s == ESubtype::kRelativeDir || s == ESubtype::kCloser;
}

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::kLr: return "lr";
    case Axis::kFb: return "fb";
    case Axis::kUd: return "ud";
  }
  throw std::logic_error("bad axis");
}

Axis axis_from_name(const std::string& name) {
  if (name == "lr") return Axis::kLr;
  if (name == "fb") return Axis::kFb;
  if (name == "ud") return Axis::kUd;
  throw std::invalid_argument("bad axis name '" + name + "'");
}

Axis axis_of_side(const std::string& side) {
  if (side == "left" || side == "right") return Axis::kLr;
  if (side == "front" || side == "behind") return Axis::kFb;
  if (side == "above" || side == "below") return Axis::kUd;
  throw std::invalid_argument("bad side word '" + side + "'");
}

double axis_coordinate(const Vec3& p, Axis a) {
  switch (a) {
    case Axis::kLr: return p.y();
    case Axis::kFb: return p.x();
    case Axis::kUd: return p.z();
  }
  throw std::logic_error("bad axis");
}

std::string side_word(Axis a, bool positive) {
  switch (a) {
    case Axis::kLr: return positive ? "left" : "right";
    case Axis::kFb: return positive ? "front" : "behind";
    case Axis::kUd: return positive ? "above" : "below";
  }
  throw std::logic_error("bad axis");
}

std::string opposite_side(const std::string& side) {
  const Axis a = axis_of_side(side);
  return side_word(a, side != side_word(a, true));
}

SourceTruth SourceTruth::from_placed(const PlacedSource& p) {
  SourceTruth t;
  t.categories = p.categories;
  std::sort(t.categories.begin(), t.categories.end());
  t.azimuth_deg = p.geometry.azimuth_deg;
  t.elevation_deg = p.geometry.elevation_deg;
  t.distance_m = p.geometry.distance_m;
  t.octant = p.octant;
  t.distance_bin = p.distance_bin;
  t.position = p.position_receiver_frame;
  return t;
}

namespace {

std::string octant_side(const OctantLabel& o, Axis a) {
  switch (a) {
    case Axis::kLr: return o.lr_word();
    case Axis::kFb: return o.fb_word();
    case Axis::kUd: return o.ud_word();
  }
  throw std::logic_error("bad axis");
}

std::string join_sorted(std::vector<std::string> categories) {
  std::sort(categories.begin(), categories.end());
  std::string out;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (i) out += "; ";
    out += categories[i];
  }
  return out;
}

// "3 meters", "2.5 meters", "1 meter" - the phrasing used inside questions.
std::string distance_words(double meters) {
  std::string num = format_distance(meters);
  num.pop_back();  // strip the trailing 'm'
  return num + (num == "1" ? " meter" : " meters");
}

std::string substitute(std::string tmpl,
                       const std::vector<std::pair<std::string, std::string>>& subs) {
  for (const auto& [key, value] : subs) {
    const std::string token = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = tmpl.find(token, pos)) != std::string::npos) {
      tmpl.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  if (tmpl.find('{') != std::string::npos)
    throw std::logic_error("template placeholder left unresolved: " + tmpl);
  return tmpl;
}

std::string pick_category(const SourceTruth& s, Rng& rng) {
  return s.categories[rng.uniform_int(s.categories.size())];
}

// Margin below which two sources count as tied on an axis; such questions
// are resampled rather than asked.
constexpr double kCoordinateMargin = 0.2;
constexpr double kCloserMargin = 0.5;

}  // namespace

const TemplateBank& TemplateBank::builtin() {
  static const TemplateBank bank = [] {
    TemplateBank b;
    b.bank_["A"] = {
        "Identify the sound events in the audio clip.",
        "What are the distinct sounds present in this audio clip?",
        "What sound events can you detect in the audio recording?",
        "Which sound events are present in this audio clip?",
        "List the sound events you can hear in the recording.",
        "What sounds can be heard in this audio clip?",
        "Name the sound events occurring in the audio.",
        "What do you hear in this audio clip?",
    };
    b.bank_["B"] = {
        "Where is the audio clip coming from?",
        "How would you describe the location of this audio clip?",
        "How would you describe the location of the {event}'s sound?",
        "At what distance and in which direction, is the {event}'s sound originating?",
        "Where is the sound of the {event} coming from?",
        "From which direction and how far away does this sound arrive?",
        "Can you describe where the {event}'s sound is located?",
        "In which direction and at what distance is this sound?",
    };
    b.bank_["C"] = {
        "Identify the sound events in the audio clip coming from the {d1}, {d2}, {d3}, "
        "approximately {distance} away.",
        "What sound events can you detect in the audio recording emanating from the {d1}, {d2}, "
        "{d3}, roughly {distance} away?",
        "Which sounds originate from the {d1}, {d2}, {d3}, about {distance} away?",
        "List the sound events located to the {d1}, {d2}, {d3}, approximately {distance} from "
        "you.",
        "What do you hear coming from the {d1}, {d2}, {d3}, around {distance} away?",
        "Identify the sounds arriving from the {d1}, {d2}, {d3}, at a distance of roughly "
        "{distance}.",
        "What sound events come from the {d1}, {d2}, {d3}, approximately {distance} away?",
        "Name the sound events produced by the source at the {d1}, {d2}, {d3}, about {distance} "
        "away.",
    };
    b.bank_["D"] = {
        "Where is the sound of the {event} coming from?",
        "In which direction and how far away is the source of the {event}'s sound?",
        "How would you describe the location of the {event}'s sound?",
        "At what distance and in which direction, is the {event}'s sound originating?",
        "Where is the {event}'s sound located?",
        "Can you pinpoint the direction and distance of the {event}'s sound?",
        "From where does the sound of the {event} originate?",
        "Describe the position of the {event}'s sound.",
    };
    b.bank_["E.same_side"] = {
        "Do the sound of {event1} and the sound of {event2} both come from your {d} side?",
        "Is the source of both {event1} and {event2}'s sounds from your {d} side?",
        "Are the sounds of {event1} and {event2} both located on your {d} side?",
        "Do both the {event1}'s sound and the {event2}'s sound originate from your {d} side?",
        "Can you hear both the {event1} and the {event2} from your {d} side?",
        "Are both sound sources, {event1} and {event2}, on your {d} side?",
        "Is it true that the sounds of {event1} and {event2} both come from your {d} side?",
        "Do the {event1} and the {event2} both sound from your {d} side?",
    };
    b.bank_["E.relative_dir.conjunction"] = {
        "Can you hear the {event1}'s sound from the {d1} and the {event2}'s from the {d2}?",
        "Is the sound from the {event1} on the {d1} and the sound from the {event2} on the {d2}?",
        "Does the {event1}'s sound come from the {d1} while the {event2}'s sound comes from the "
        "{d2}?",
        "Is the {event1} located on the {d1} and the {event2} on the {d2}?",
        "Would you say the {event1}'s sound is on the {d1} and the {event2}'s sound on the {d2}?",
        "Is it the case that the {event1} sounds from the {d1} and the {event2} from the {d2}?",
        "Do you hear the {event1} on the {d1} side and the {event2} on the {d2} side?",
        "Can the {event1} be heard from the {d1} and the {event2} from the {d2}?",
    };
    b.bank_["E.relative_dir.comparative"] = {
        "Would you find the sound of {event1} on the {d} side of the sound of {event2}?",
        "Does the sound of {event1} appear on the {d} of the sound of {event2}?",
        "Is the {event1}'s sound on the {d} side of the {event2}'s sound?",
        "Relative to the sound of {event2}, is the sound of {event1} on the {d} side?",
        "Does the {event1} sound from the {d} side of the {event2}?",
        "Would you place the {event1}'s sound on the {d} side of the {event2}'s sound?",
        "Compared with the {event2}'s sound, is the {event1}'s sound on the {d} side?",
        "Is the sound of the {event1} located on the {d} side of the sound of the {event2}?",
    };
    b.bank_["E.closer"] = {
        "When measuring the direct line distance, is the sound produced by {event1} closer to "
        "you than the sound from {event2}?",
        "In terms of straight-line distance, does the sound of {event1} reach you from a closer "
        "point compared to the sound of {event2}?",
        "Is the sound of {event1} closer to you than the sound of {event2}?",
        "Does the {event1}'s sound originate nearer to you than the {event2}'s sound?",
        "Measuring straight-line distance, is the {event1} closer to you than the {event2}?",
        "Is the source of the {event1}'s sound at a shorter distance from you than the source of "
        "the {event2}'s sound?",
        "Would you say the sound of {event1} comes from a closer point than the sound of "
        "{event2}?",
        "Compared with the sound of {event2}, is the sound of {event1} closer to you?",
    };
    b.bank_["E.inter_distance"] = {
        "Can you estimate the distance from the sound of the {event1} to the sound of the "
        "{event2}?",
        "What is the distance between the sound of the {event1} and the sound of the {event2}?",
        "How far apart are the sources of the {event1}'s sound and the {event2}'s sound?",
        "Estimate the separation between the {event1}'s sound and the {event2}'s sound.",
        "What is the straight-line distance between the {event1} and the {event2} sounds?",
        "How far is the source of the {event1}'s sound from the source of the {event2}'s sound?",
        "Could you judge the distance separating the sounds of the {event1} and the {event2}?",
        "What distance separates the {event1}'s sound from the {event2}'s sound?",
    };
    b.bank_["E.class_on_side"] = {
        "What is the sound on the {d} side of the sound of the {event2}?",
        "Which sound event is located on the {d} side of the {event2}'s sound?",
        "Identify the sound on the {d} side of the sound of the {event2}.",
        "What sound can you hear on the {d} side of the {event2}'s sound?",
        "Name the sound event on the {d} side of the sound of the {event2}.",
        "On the {d} side of the {event2}'s sound, what sound is present?",
        "What do you hear on the {d} side of the sound of the {event2}?",
        "Which sound lies on the {d} side of the {event2}'s sound?",
    };
    b.bank_["E.left_or_right"] = {
        "Could you determine whether the {event1}'s sound is to the left or right of the "
        "{event2}'s sound?",
        "Is the sound of the {event1} to the left or right of the sound of the {event2}?",
        "Does the {event1}'s sound lie to the left or to the right of the {event2}'s sound?",
        "To which side, left or right, of the {event2}'s sound is the {event1}'s sound?",
        "Tell me whether the {event1}'s sound is left or right of the {event2}'s sound.",
        "Relative to the {event2}'s sound, is the {event1}'s sound on the left or the right?",
        "Would you place the sound of the {event1} to the left or to the right of the sound of "
        "the {event2}?",
        "Judging by ear, is the {event1} positioned left or right of the {event2}?",
    };
    b.validate();
    return b;
  }();
  return bank;
}

TemplateBank TemplateBank::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("templates: cannot open " + path);
  nlohmann::json j;
  f >> j;
  TemplateBank b;
  for (auto it = j.begin(); it != j.end(); ++it)
    b.bank_[it.key()] = it.value().get<std::vector<std::string>>();
  b.validate();
  return b;
}

void TemplateBank::validate() const {
  static const char* kRequired[] = {
      "A", "B", "C", "D", "E.same_side", "E.relative_dir.conjunction",
      "E.relative_dir.comparative", "E.closer", "E.inter_distance", "E.class_on_side",
      "E.left_or_right"};
  for (const char* key : kRequired) {
    auto it = bank_.find(key);
    if (it == bank_.end() || it->second.empty())
      throw std::runtime_error(std::string("templates: missing bank for ") + key);
  }
}

const std::vector<std::string>& TemplateBank::templates(const std::string& key) const {
  auto it = bank_.find(key);
  if (it == bank_.end()) throw std::invalid_argument("templates: no bank for " + key);
  return it->second;
}

std::string TemplateBank::pick(const std::string& key, Rng& rng) const {
  const auto& list = templates(key);
  return list[rng.uniform_int(list.size())];
}

void MixtureConfig::validate() const {
  double sum = 0.0;
  for (const auto& [t, p] : proportions) {
    if (p < 0.0) throw std::invalid_argument("mixture: negative proportion");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("mixture: proportions must sum to 1");
}

std::map<QType, int> MixtureConfig::counts(int n) const {
  validate();
  std::map<QType, int> out;
  std::vector<std::pair<double, QType>> remainders;
  int assigned = 0;
  for (const auto& [t, p] : proportions) {
    const double exact = p * n;
    const int base = static_cast<int>(std::floor(exact));
    out[t] = base;
    assigned += base;
    remainders.push_back({exact - base, t});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; i < n - assigned; ++i) out[remainders[static_cast<std::size_t>(i)].second] += 1;
  return out;
}

QaRecord gen_detection(const SpatialClip& clip, int target, const TemplateBank& bank, Rng& rng) {
  QaRecord rec;
  if (clip.sources.size() == 1) {
    if (target > 0) throw std::invalid_argument("gen_detection: target given for a 1-source clip");
    rec.qtype = QType::kA;
    rec.truth.sources = {SourceTruth::from_placed(clip.sources[0])};
    rec.truth.query.form = "detection";
    rec.truth.query.target = 0;
    rec.question = bank.pick("A", rng);
  } else if (clip.sources.size() == 2) {
    if (target < 0 || target > 1)
      throw std::invalid_argument("gen_detection: type C needs a target source");
    const PlacedSource& t = clip.sources[static_cast<std::size_t>(target)];
    const PlacedSource& o = clip.sources[static_cast<std::size_t>(1 - target)];
    if (t.octant == o.octant && t.distance_bin == o.distance_bin)
      throw std::invalid_argument("gen_detection: ambiguous location reference");
    rec.qtype = QType::kC;
    rec.truth.sources = {SourceTruth::from_placed(clip.sources[0]),
                         SourceTruth::from_placed(clip.sources[1])};
    rec.truth.query.form = "detection";
    rec.truth.query.target = target;
    rec.truth.query.other = 1 - target;
    rec.question = substitute(bank.pick("C", rng), {{"d1", t.octant.lr_word()},
                                                    {"d2", t.octant.fb_word()},
                                                    {"d3", t.octant.ud_word()},
                                                    {"distance", distance_words(t.distance_bin)}});
  } else {
    throw std::invalid_argument("gen_detection: clip must have 1 or 2 sources");
  }
  rec.answer = derive_answer(rec.qtype, std::nullopt, rec.truth);
  return rec;
}

QaRecord gen_localization(const SpatialClip& clip, int target, const TemplateBank& bank,
                          Rng& rng) {
  QaRecord rec;
  if (clip.sources.size() == 1) {
    if (target > 0)
      throw std::invalid_argument("gen_localization: target given for a 1-source clip");
    rec.qtype = QType::kB;
    rec.truth.sources = {SourceTruth::from_placed(clip.sources[0])};
    rec.truth.query.form = "localization";
    rec.truth.query.target = 0;
    std::string tmpl = bank.pick("B", rng);
    if (tmpl.find("{event}") != std::string::npos) {
      rec.truth.query.event1 = pick_category(rec.truth.sources[0], rng);
      tmpl = substitute(tmpl, {{"event", rec.truth.query.event1}});
    }
    rec.question = tmpl;
  } else if (clip.sources.size() == 2) {
    if (target < 0 || target > 1)
      throw std::invalid_argument("gen_localization: type D needs a target source");
    rec.qtype = QType::kD;
    rec.truth.sources = {SourceTruth::from_placed(clip.sources[0]),
                         SourceTruth::from_placed(clip.sources[1])};
    const SourceTruth& t = rec.truth.sources[static_cast<std::size_t>(target)];
    const SourceTruth& o = rec.truth.sources[static_cast<std::size_t>(1 - target)];
    rec.truth.query.form = "localization";
    rec.truth.query.target = target;
    rec.truth.query.other = 1 - target;
    rec.truth.query.event1 = pick_category(t, rng);
    if (std::find(o.categories.begin(), o.categories.end(), rec.truth.query.event1) !=
        o.categories.end())
      throw std::invalid_argument("gen_localization: referenced category is not unique");
    rec.question = substitute(bank.pick("D", rng), {{"event", rec.truth.query.event1}});
  } else {
    throw std::invalid_argument("gen_localization: clip must have 1 or 2 sources");
  }
  rec.answer = derive_answer(rec.qtype, std::nullopt, rec.truth);
  return rec;
}

double quantize_inter_distance(double meters) {
  double bin = kDistanceBinWidth * std::floor(meters / kDistanceBinWidth + 0.5);
  return std::max(bin, kDistanceBinWidth);
}

QaRecord gen_reasoning(const SpatialClip& clip, ESubtype subtype, const TemplateBank& bank,
                       Rng& rng) {
  if (clip.sources.size() != 2)
    throw std::invalid_argument("gen_reasoning: type E needs exactly 2 sources");

  QaRecord rec;
  rec.qtype = QType::kE;
  rec.subtype = subtype;
  rec.truth.sources = {SourceTruth::from_placed(clip.sources[0]),
                       SourceTruth::from_placed(clip.sources[1])};
  const SourceTruth& s0 = rec.truth.sources[0];
  const SourceTruth& s1 = rec.truth.sources[1];
  QueryInfo& q = rec.truth.query;
  q.form = subtype_name(subtype);

  const auto margin_axes = [&](double margin) {
    std::vector<Axis> axes;
    for (Axis a : {Axis::kLr, Axis::kFb, Axis::kUd})
      if (std::abs(axis_coordinate(s0.position, a) - axis_coordinate(s1.position, a)) >= margin)
        axes.push_back(a);
    return axes;
  };

  switch (subtype) {
    case ESubtype::kSameSide: {
      q.target = 0;
      q.other = 1;
      const bool want_yes = rng.coin();
      if (want_yes) {
        std::vector<Axis> agreeing;
        for (Axis a : {Axis::kLr, Axis::kFb, Axis::kUd})
          if (octant_side(s0.octant, a) == octant_side(s1.octant, a)) agreeing.push_back(a);
        if (agreeing.empty())
          throw IllPosedError("same_side: no agreeing axis for a Yes question");
        q.axis = agreeing[rng.uniform_int(agreeing.size())];
        q.side = octant_side(s0.octant, *q.axis);
      } else {
        q.axis = static_cast<Axis>(rng.uniform_int(3));
        const std::string la = octant_side(s0.octant, *q.axis);
        const std::string lb = octant_side(s1.octant, *q.axis);
        q.side = la == lb ? opposite_side(la) : (rng.coin() ? la : lb);
      }
      q.event1 = pick_category(s0, rng);
      q.event2 = pick_category(s1, rng);
      rec.question = substitute(bank.pick("E.same_side", rng),
                                {{"event1", q.event1}, {"event2", q.event2}, {"d", q.side}});
      break;
    }
    case ESubtype::kRelativeDir: {
      q.target = 0;
      q.other = 1;
      q.conjunction = rng.coin();
      const bool want_yes = rng.coin();
      if (q.conjunction) {
        q.axis = static_cast<Axis>(rng.uniform_int(3));
        std::string d1 = octant_side(s0.octant, *q.axis);
        std::string d2 = octant_side(s1.octant, *q.axis);
        if (!want_yes) {
          if (rng.coin())
            d1 = opposite_side(d1);
          else
            d2 = opposite_side(d2);
        }
        q.side = d1;
        q.side2 = d2;
        q.event1 = pick_category(s0, rng);
        q.event2 = pick_category(s1, rng);
        rec.question = substitute(
            bank.pick("E.relative_dir.conjunction", rng),
            {{"event1", q.event1}, {"event2", q.event2}, {"d1", q.side}, {"d2", q.side2}});
      } else {
        const auto axes = margin_axes(kCoordinateMargin);
        if (axes.empty())
          throw IllPosedError("relative_dir: sources tie on every axis");
        q.axis = axes[rng.uniform_int(axes.size())];
        const bool positive = axis_coordinate(s0.position, *q.axis) >
                              axis_coordinate(s1.position, *q.axis);
        const std::string actual = side_word(*q.axis, positive);
        q.side = want_yes ? actual : opposite_side(actual);
        q.event1 = pick_category(s0, rng);
        q.event2 = pick_category(s1, rng);
        rec.question = substitute(bank.pick("E.relative_dir.comparative", rng),
                                  {{"event1", q.event1}, {"event2", q.event2}, {"d", q.side}});
      }
      break;
    }
    case ESubtype::kCloser: {
      if (std::abs(s0.distance_m - s1.distance_m) < kCloserMargin)
        throw IllPosedError("closer: distances tie within 0.5 m");
      const bool want_yes = rng.coin();
      const int nearer = s0.distance_m < s1.distance_m ? 0 : 1;
      q.target = want_yes ? nearer : 1 - nearer;
      q.other = 1 - q.target;
      q.event1 = pick_category(rec.truth.sources[static_cast<std::size_t>(q.target)], rng);
      q.event2 = pick_category(rec.truth.sources[static_cast<std::size_t>(q.other)], rng);
      rec.question = substitute(bank.pick("E.closer", rng),
                                {{"event1", q.event1}, {"event2", q.event2}});
      break;
    }
    case ESubtype::kInterDistance: {
      q.target = rng.coin() ? 0 : 1;
      q.other = 1 - q.target;
      q.event1 = pick_category(rec.truth.sources[static_cast<std::size_t>(q.target)], rng);
      q.event2 = pick_category(rec.truth.sources[static_cast<std::size_t>(q.other)], rng);
      rec.question = substitute(bank.pick("E.inter_distance", rng),
                                {{"event1", q.event1}, {"event2", q.event2}});
      break;
    }
    case ESubtype::kClassOnSide: {
      const auto axes = margin_axes(kCoordinateMargin);
      if (axes.empty()) throw IllPosedError("class_on_side: sources tie on every axis");
      q.axis = axes[rng.uniform_int(axes.size())];
      q.other = rng.coin() ? 1 : 0;  // the reference source named in the question
      q.target = 1 - q.other;
      const bool positive =
          axis_coordinate(rec.truth.sources[static_cast<std::size_t>(q.target)].position,
                          *q.axis) >
          axis_coordinate(rec.truth.sources[static_cast<std::size_t>(q.other)].position, *q.axis);
      q.side = side_word(*q.axis, positive);
      q.event2 = pick_category(rec.truth.sources[static_cast<std::size_t>(q.other)], rng);
      rec.question = substitute(bank.pick("E.class_on_side", rng),
                                {{"d", q.side}, {"event2", q.event2}});
      break;
    }
    case ESubtype::kLeftOrRight: {
      if (octant_side(s0.octant, Axis::kLr) == octant_side(s1.octant, Axis::kLr))
        throw IllPosedError("left_or_right: sources share the left/right side");
      if (std::abs(s0.position.y() - s1.position.y()) < kCoordinateMargin)
        throw IllPosedError("left_or_right: sources tie on the left/right axis");
      q.axis = Axis::kLr;
      q.target = rng.coin() ? 0 : 1;
      q.other = 1 - q.target;
      q.event1 = pick_category(rec.truth.sources[static_cast<std::size_t>(q.target)], rng);
      q.event2 = pick_category(rec.truth.sources[static_cast<std::size_t>(q.other)], rng);
      rec.question = substitute(bank.pick("E.left_or_right", rng),
                                {{"event1", q.event1}, {"event2", q.event2}});
      break;
    }
  }

  rec.answer = derive_answer(rec.qtype, rec.subtype, rec.truth);
  return rec;
}

std::string derive_answer(QType qtype, const std::optional<ESubtype>& subtype,
                          const TruthPayload& truth) {
  const QueryInfo& q = truth.query;
  const auto source = [&](int idx) -> const SourceTruth& {
    if (idx < 0 || idx >= static_cast<int>(truth.sources.size()))
      throw std::invalid_argument("derive_answer: source index out of range");
    return truth.sources[static_cast<std::size_t>(idx)];
  };

  switch (qtype) {
    case QType::kA:
    case QType::kC:
      return join_sorted(source(q.target < 0 ? 0 : q.target).categories);
    case QType::kB:
    case QType::kD: {
      const SourceTruth& s = source(q.target < 0 ? 0 : q.target);
      return s.octant.words() + "; " + format_distance(s.distance_bin);
    }
    case QType::kE:
      break;
  }

  if (!subtype) throw std::invalid_argument("derive_answer: type E requires a subtype");
  const SourceTruth& t = source(q.target);
  const SourceTruth& o = source(q.other);
  switch (*subtype) {
    case ESubtype::kSameSide: {
      if (!q.axis) throw std::invalid_argument("derive_answer: same_side without axis");
      const bool yes =
          octant_side(t.octant, *q.axis) == q.side && octant_side(o.octant, *q.axis) == q.side;
      return yes ? "Yes" : "No";
    }
    case ESubtype::kRelativeDir: {
      if (!q.axis) throw std::invalid_argument("derive_answer: relative_dir without axis");
      if (q.conjunction) {
        const bool yes = octant_side(t.octant, *q.axis) == q.side &&
                         octant_side(o.octant, *q.axis) == q.side2;
        return yes ? "Yes" : "No";
      }
      const bool positive =
          axis_coordinate(t.position, *q.axis) > axis_coordinate(o.position, *q.axis);
      return side_word(*q.axis, positive) == q.side ? "Yes" : "No";
    }
    case ESubtype::kCloser:
      return t.distance_m < o.distance_m ? "Yes" : "No";
    case ESubtype::kInterDistance:
      return format_distance(quantize_inter_distance((t.position - o.position).norm()));
    case ESubtype::kClassOnSide: {
      if (!q.axis) throw std::invalid_argument("derive_answer: class_on_side without axis");
      const bool positive =
          axis_coordinate(t.position, *q.axis) > axis_coordinate(o.position, *q.axis);
      if (side_word(*q.axis, positive) != q.side)
        throw std::invalid_argument("derive_answer: class_on_side truth is inconsistent");
      return join_sorted(t.categories);
    }
    case ESubtype::kLeftOrRight:
      return t.position.y() > o.position.y() ? "left" : "right";
  }
  throw std::logic_error("derive_answer: unhandled subtype");
}

bool stage_includes(CurriculumStage stage, QType t) {
  switch (stage) {
    case CurriculumStage::kI:
      return t == QType::kA || t == QType::kB;
    case CurriculumStage::kII:
      return t != QType::kE;
    case CurriculumStage::kIII:
      return true;
  }
  throw std::logic_error("bad curriculum stage");
}

std::vector<QaRecord> curriculum_split(const std::vector<QaRecord>& records,
                                       CurriculumStage stage) {
  std::vector<QaRecord> out;
  for (const auto& r : records)
    if (stage_includes(stage, r.qtype)) out.push_back(r);
  return out;
}

std::string instruction_prompt(const std::string& question) {
  if (question.empty()) throw std::invalid_argument("instruction_prompt: empty question");
  return "Based on the audio you've heard, refer to the instruction and provide a response."
         "\n\n### Instruction:\n" +
         question + "\n\n### Response:";
}

}  // namespace ssf
