#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nirattack/detector.hpp"

namespace nirattack {

/// Person-class detection threshold used by every metric.
inline constexpr double kDetectionThreshold = 0.25;
/// IoU at which a detection matches the ground-truth silhouette box.
inline constexpr double kTruePositiveIou = 0.5;

/// Detector output for one test scene under one condition.
struct EvalRecord {
  std::string scene_id;
  DetectionBox ground_truth;
  std::vector<Detection> detections;
  std::string condition;  // "no_attack", "all_black", ..., "searched"
  int repeat = 0;

  std::string to_json() const;
  static EvalRecord from_json(const std::string& line);
};

double iou(const DetectionBox& a, const DetectionBox& b) noexcept;

/// Max person confidence at or above the threshold, 0 if none.
double image_confidence(const EvalRecord& record);

/// Scene contains a person detection above threshold with IoU >= 0.5 against
/// the ground truth.
bool has_true_positive(const EvalRecord& record);

/// Person detections above threshold, unmatched.
std::size_t count_person_detections(const EvalRecord& record);

/// AC: mean image_confidence. Throws MetricUndefined on an empty set.
double average_confidence(std::span<const EvalRecord> records);

/// ASR in percent: (1 - N_a / N_0) * 100 with N_0 = unattacked scenes with a
/// true positive and N_a = person detections under attack. Both sets must
/// cover the same scenes. Throws MetricUndefined when N_0 == 0. Not clamped.
double attack_success_rate(std::span<const EvalRecord> no_attack, std::span<const EvalRecord> attacked);

/// ASR from the two counts.
double attack_success_rate(std::size_t n0, std::size_t na);

/// DR in percent: scenes with a true positive. Throws MetricUndefined on empty input.
double detection_rate(std::span<const EvalRecord> records);

/// JSON-lines persistence.
void write_records(const std::filesystem::path& path, std::span<const EvalRecord> records,
                   bool append = false);
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

/// Per-condition summary across repeats.
struct ConditionSummary {
  std::string condition;
  std::size_t repeats = 0;
  double ac_mean = 0, ac_std = 0;
  // ASR for attacked conditions, DR for the no-attack condition.
  bool is_detection_rate = false;
  double rate_mean = 0, rate_std = 0;
};

/// Groups records by (condition, repeat). The condition named `baseline`
/// ("no_attack") is the N_0 reference of each repeat; it reports DR, every
/// other condition reports ASR against it. Std is the sample standard
/// deviation (0 for one repeat).
std::vector<ConditionSummary> summarize_conditions(std::span<const EvalRecord> records,
                                                   const std::string& baseline = "no_attack");

std::string report_json(std::span<const ConditionSummary> rows, const std::string& model_id);
/// Fixed-width table: condition | AC | ASR/DR (%) | repeats.
std::string report_text(std::span<const ConditionSummary> rows, const std::string& model_id);

}  // namespace nirattack
