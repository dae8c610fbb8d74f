#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "schemnet/netlist.hpp"
#include "schemnet/types.hpp"

namespace schemnet {

struct MatchPair {
  int pred = 0;
  int gold = 0;
  double iou = 0;
};

struct DetectionMatch {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_pred;
  std::vector<int> unmatched_gold;
};

/// Greedy one-to-one matching: pairs sorted by IoU descending, then (gold id, pred id);
/// a pair is taken when types agree, IoU >= threshold and both sides are free.
DetectionMatch match_detections(const std::vector<Component>& pred, const std::vector<Component>& gold,
                                double iou_threshold = 0.5);

struct DetectionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  void add(const DetectionMatch& m);
};

struct DetectionMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

double f1_score(double precision, double recall);
// Throws std::invalid_argument when there is no golden component.
DetectionMetrics detection_metrics(const DetectionCounts& c);

struct SchematicScores {
  double text_accuracy = 0;
  double structure_accuracy = 0;
  double overall_accuracy = 0;  // fractional
  bool overall_exact = false;   // binary reading: equivalent with values and designators
  bool search_exact = true;     // false if a common-subset search hit its cap
};

/// `generated` is empty when no netlist could be emitted.
SchematicScores netlist_scores(const std::optional<Netlist>& generated, const Netlist& golden);

struct SchematicRow {
  std::string name;
  int golden_cards = 0;
  DetectionCounts detection;
  SchematicScores scores;
  int unresolved_flags = 0;
  bool emitted = false;
};

struct EvalReport {
  std::vector<SchematicRow> rows;
  DetectionMetrics pooled;
  double f1_rounded_inputs = 0;  // F1 from precision and recall rounded to two decimals
  double text_accuracy = 0;
  double structure_accuracy = 0;
  double overall_accuracy = 0;
  double overall_exact_rate = 0;
  double iou_threshold = 0.5;
};

// Unweighted means over rows; detection pooled over rows.
EvalReport summarize(std::vector<SchematicRow> rows, double iou_threshold);

/// Corpus layout: <corpus>/<name>/{golden.cir, detections.json}. Predictions:
/// <pred>/<name>.cir, <name>.detections.json, <name>.flags.json (each optional).
EvalReport evaluate_corpus(const std::filesystem::path& corpus, const std::filesystem::path& predictions,
                           double iou_threshold = 0.5);

std::string report_text(const EvalReport& r);
std::string report_json(const EvalReport& r, const std::string& config_text = "");

}  // namespace schemnet
