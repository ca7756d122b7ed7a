#include "nirattack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "nirattack/error.hpp"

namespace nirattack {

using nlohmann::json;

std::string EvalRecord::to_json() const {
  json dets = json::array();
  for (const auto& d : detections)
    dets.push_back({{"label", d.label},
                    {"confidence", d.confidence},
                    {"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}}});
  return json{{"scene", scene_id},
              {"gt_box", {ground_truth.x1, ground_truth.y1, ground_truth.x2, ground_truth.y2}},
              {"condition", condition},
              {"repeat", repeat},
              {"detections", dets}}
      .dump();
}

EvalRecord EvalRecord::from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    EvalRecord r;
    r.scene_id = j.at("scene").get<std::string>();
    const auto& gt = j.at("gt_box");
    r.ground_truth = {gt.at(0).get<double>(), gt.at(1).get<double>(), gt.at(2).get<double>(),
                      gt.at(3).get<double>()};
    r.condition = j.at("condition").get<std::string>();
    r.repeat = j.value("repeat", 0);
    for (const auto& d : j.at("detections")) {
      const auto& b = d.at("box");
      r.detections.push_back({d.at("label").get<std::string>(), d.at("confidence").get<double>(),
                              {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                               b.at(3).get<double>()}});
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid record: ") + e.what());
  }
}

double iou(const DetectionBox& a, const DetectionBox& b) noexcept {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double image_confidence(const EvalRecord& record) {
  return max_person_confidence(record.detections, kDetectionThreshold);
}

bool has_true_positive(const EvalRecord& record) {
  return std::any_of(record.detections.begin(), record.detections.end(), [&](const Detection& d) {
    return d.label == kPersonLabel && d.confidence >= kDetectionThreshold &&
           iou(d.box, record.ground_truth) >= kTruePositiveIou;
  });
}

std::size_t count_person_detections(const EvalRecord& record) {
  return static_cast<std::size_t>(
      std::count_if(record.detections.begin(), record.detections.end(), [](const Detection& d) {
        return d.label == kPersonLabel && d.confidence >= kDetectionThreshold;
      }));
}

double average_confidence(std::span<const EvalRecord> records) {
  if (records.empty()) throw MetricUndefined("average confidence of an empty record set");
  double sum = 0.0;
  for (const auto& r : records) sum += image_confidence(r);
  return sum / static_cast<double>(records.size());
}

double attack_success_rate(std::size_t n0, std::size_t na) {
  if (n0 == 0) throw MetricUndefined("ASR undefined: no true positives without attack (N_0 = 0)");
  return (1.0 - static_cast<double>(na) / static_cast<double>(n0)) * 100.0;
}

double attack_success_rate(std::span<const EvalRecord> no_attack, std::span<const EvalRecord> attacked) {
  std::multiset<std::string> a, b;
  for (const auto& r : no_attack) a.insert(r.scene_id);
  for (const auto& r : attacked) b.insert(r.scene_id);
  if (a != b) throw MetricUndefined("ASR: attacked and unattacked records cover different scenes");
  std::size_t n0 = 0, na = 0;
  for (const auto& r : no_attack) n0 += has_true_positive(r) ? 1 : 0;
  for (const auto& r : attacked) na += count_person_detections(r);
  return attack_success_rate(n0, na);
}

double detection_rate(std::span<const EvalRecord> records) {
  if (records.empty()) throw MetricUndefined("detection rate of an empty record set");
  std::size_t hits = 0;
  for (const auto& r : records) hits += has_true_positive(r) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

void write_records(const std::filesystem::path& path, std::span<const EvalRecord> records, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << r.to_json() << '\n';
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open records file " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(EvalRecord::from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::vector<ConditionSummary> summarize_conditions(std::span<const EvalRecord> records,
                                                   const std::string& baseline) {
  // condition -> repeat -> records; conditions keep first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::vector<EvalRecord>>> groups;
  for (const auto& r : records) {
    if (!groups.count(r.condition)) order.push_back(r.condition);
    groups[r.condition][r.repeat].push_back(r);
  }
  const auto base = groups.find(baseline);

  std::vector<ConditionSummary> rows;
  for (const auto& cond : order) {
    ConditionSummary row;
    row.condition = cond;
    row.is_detection_rate = cond == baseline;
    std::vector<double> acs, rates;
    for (const auto& [repeat, recs] : groups[cond]) {
      acs.push_back(average_confidence(recs));
      if (row.is_detection_rate) {
        rates.push_back(detection_rate(recs));
      } else {
        if (base == groups.end() || !base->second.count(repeat))
          throw MetricUndefined("condition '" + cond + "' repeat " + std::to_string(repeat) +
                                " has no '" + baseline + "' reference");
        rates.push_back(attack_success_rate(base->second.at(repeat), recs));
      }
    }
    row.repeats = acs.size();
    std::tie(row.ac_mean, row.ac_std) = mean_std(acs);
    std::tie(row.rate_mean, row.rate_std) = mean_std(rates);
    rows.push_back(row);
  }
  return rows;
}

std::string report_json(std::span<const ConditionSummary> rows, const std::string& model_id) {
  json out{{"model", model_id}, {"threshold", kDetectionThreshold}, {"iou", kTruePositiveIou}};
  json conds = json::array();
  for (const auto& r : rows) {
    json c{{"condition", r.condition},
           {"repeats", r.repeats},
           {"ac", {{"mean", r.ac_mean}, {"std", r.ac_std}}}};
    c[r.is_detection_rate ? "dr" : "asr"] = {{"mean", r.rate_mean}, {"std", r.rate_std}};
    conds.push_back(c);
  }
  out["conditions"] = conds;
  return out.dump(2);
}

std::string report_text(std::span<const ConditionSummary> rows, const std::string& model_id) {
  std::string out = "model: " + model_id + "\n";
  char line[200];
  std::snprintf(line, sizeof line, "%-14s | %-17s | %-22s | %s\n", "condition", "AC", "ASR/DR (%)", "repeats");
  out += line;
  out += std::string(72, '-') + "\n";
  for (const auto& r : rows) {
    char ac[64], rate[64];
    std::snprintf(ac, sizeof ac, "%.3f +- %.3f", r.ac_mean, r.ac_std);
    std::snprintf(rate, sizeof rate, "%s %.2f +- %.2f", r.is_detection_rate ? "DR " : "ASR", r.rate_mean,
                  r.rate_std);
    std::snprintf(line, sizeof line, "%-14s | %-17s | %-22s | %zu\n", r.condition.c_str(), ac, rate,
                  r.repeats);
    out += line;
  }
  return out;
}

}  // namespace nirattack
