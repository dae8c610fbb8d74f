#include "schemnet/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "schemnet/detect.hpp"
#include "schemnet/raster.hpp"

namespace schemnet {

DetectionMatch match_detections(const std::vector<Component>& pred, const std::vector<Component>& gold,
                                double iou_threshold) {
  if (!(iou_threshold > 0 && iou_threshold <= 1)) throw std::invalid_argument("iou threshold must be in (0, 1]");
  struct Cand {
    double iou;
    int gi, pi;
  };
  std::vector<Cand> cands;
  for (std::size_t g = 0; g < gold.size(); ++g)
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (pred[p].ctype != gold[g].ctype) continue;
      double v = iou(pred[p].bbox, gold[g].bbox);
      if (v >= iou_threshold) cands.push_back({v, static_cast<int>(g), static_cast<int>(p)});
    }
  std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (gold[a.gi].id != gold[b.gi].id) return gold[a.gi].id < gold[b.gi].id;
    return pred[a.pi].id < pred[b.pi].id;
  });
  std::vector<char> gused(gold.size(), 0), pused(pred.size(), 0);
  DetectionMatch m;
  for (const auto& c : cands) {
    if (gused[c.gi] || pused[c.pi]) continue;
    gused[c.gi] = pused[c.pi] = 1;
    m.pairs.push_back({pred[c.pi].id, gold[c.gi].id, c.iou});
  }
  for (std::size_t p = 0; p < pred.size(); ++p)
    if (!pused[p]) m.unmatched_pred.push_back(pred[p].id);
  for (std::size_t g = 0; g < gold.size(); ++g)
    if (!gused[g]) m.unmatched_gold.push_back(gold[g].id);
  return m;
}

void DetectionCounts::add(const DetectionMatch& m) {
  tp += static_cast<long>(m.pairs.size());
  fp += static_cast<long>(m.unmatched_pred.size());
  fn += static_cast<long>(m.unmatched_gold.size());
}

double f1_score(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

DetectionMetrics detection_metrics(const DetectionCounts& c) {
  if (c.tp + c.fn == 0) throw std::invalid_argument("no golden components in corpus");
  DetectionMetrics m;
  m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

namespace {

std::string card_field(const Card& c) {
  if (c.model) return *c.model;
  return c.value ? format_value(*c.value) : std::string();
}

}  // namespace

SchematicScores netlist_scores(const std::optional<Netlist>& generated, const Netlist& golden) {
  SchematicScores s;
  if (golden.cards.empty()) throw std::invalid_argument("golden netlist has no cards");
  if (!generated) return s;
  const double total = static_cast<double>(golden.cards.size());

  std::map<std::string, const Card*> by_designator;
  for (const auto& c : generated->cards) by_designator[c.designator] = &c;
  int labels_ok = 0;
  for (const auto& g : golden.cards) {
    auto it = by_designator.find(g.designator);
    if (it == by_designator.end() || it->second->ctype != g.ctype) continue;
    ++labels_ok;
    if (card_field(*it->second) == card_field(g)) ++labels_ok;
  }
  s.text_accuracy = labels_ok / (2 * total);

  EquivalenceOptions bare{false, false};
  if (netlists_equivalent(golden, *generated, bare).equivalent) {
    s.structure_accuracy = 1.0;
  } else {
    CommonSubset cs = max_common_cards(golden, *generated, bare);
    s.structure_accuracy = cs.matched / total;
    s.search_exact = s.search_exact && cs.exact;
  }

  s.overall_exact = netlists_equivalent(golden, *generated, {true, true}).equivalent;
  if (s.overall_exact) {
    s.overall_accuracy = 1.0;
  } else {
    CommonSubset cs = max_common_cards(golden, *generated, {true, false});
    s.overall_accuracy = cs.matched / total;
    s.search_exact = s.search_exact && cs.exact;
  }
  return s;
}

EvalReport summarize(std::vector<SchematicRow> rows, double iou_threshold) {
  EvalReport r;
  r.iou_threshold = iou_threshold;
  r.rows = std::move(rows);
  DetectionCounts pooled;
  for (const auto& row : r.rows) {
    pooled.tp += row.detection.tp;
    pooled.fp += row.detection.fp;
    pooled.fn += row.detection.fn;
    r.text_accuracy += row.scores.text_accuracy;
    r.structure_accuracy += row.scores.structure_accuracy;
    r.overall_accuracy += row.scores.overall_accuracy;
    r.overall_exact_rate += row.scores.overall_exact ? 1 : 0;
  }
  if (!r.rows.empty()) {
    double n = static_cast<double>(r.rows.size());
    r.text_accuracy /= n;
    r.structure_accuracy /= n;
    r.overall_accuracy /= n;
    r.overall_exact_rate /= n;
  }
  r.pooled = detection_metrics(pooled);
  auto round2 = [](double v) { return std::round(v * 100) / 100; };
  r.f1_rounded_inputs = f1_score(round2(r.pooled.precision), round2(r.pooled.recall));
  return r;
}

namespace {

std::optional<std::string> slurp(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) return std::nullopt;
  auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

ImageDims document_dims(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  const auto& img = doc.at("image");
  return {img.at("width").get<int>(), img.at("height").get<int>()};
}

}  // namespace

EvalReport evaluate_corpus(const std::filesystem::path& corpus, const std::filesystem::path& predictions,
                           double iou_threshold) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(corpus)) throw std::invalid_argument("corpus directory not found: " + corpus.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(corpus))
    if (e.is_directory() && fs::exists(e.path() / "golden.cir")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw std::invalid_argument("no schematics under " + corpus.string());

  std::vector<SchematicRow> rows;
  for (const auto& dir : dirs) {
    SchematicRow row;
    row.name = dir.filename().string();
    Netlist golden = parse_netlist(*slurp(dir / "golden.cir"));
    row.golden_cards = static_cast<int>(golden.cards.size());

    std::vector<Component> gold_det, pred_det;
    if (auto d = slurp(dir / "detections.json")) gold_det = ingest_detections(*d, document_dims(*d));
    if (auto d = slurp(predictions / (row.name + ".detections.json"))) pred_det = ingest_detections(*d, document_dims(*d));
    row.detection.add(match_detections(pred_det, gold_det, iou_threshold));

    std::optional<Netlist> gen;
    if (auto c = slurp(predictions / (row.name + ".cir"))) gen = parse_netlist(*c);
    row.emitted = gen.has_value();
    if (auto f = slurp(predictions / (row.name + ".flags.json"))) {
      nlohmann::json doc = nlohmann::json::parse(*f);
      row.unresolved_flags = doc.value("unresolved", 0);
    }
    row.scores = netlist_scores(gen, golden);
    rows.push_back(std::move(row));
  }
  return summarize(std::move(rows), iou_threshold);
}

std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  char buf[256];
  os << "# text      = exact designator and value strings matched / golden labels\n"
     << "# structure = 1 if equivalent ignoring values, else largest common card subset / golden cards\n"
     << "# overall   = 1 if equivalent with values and designators, else golden cards reproduced with\n"
     << "#             type, nodes and value / golden cards; exact = share of fully equivalent schematics\n"
     << "# detection = precision, recall, F1 pooled over all components at IoU >= " << r.iou_threshold << "\n";
  std::snprintf(buf, sizeof buf, "%-14s %6s %6s %4s %4s %4s %6s %9s %7s %5s %5s\n", "schematic", "cards", "flags", "tp",
                "fp", "fn", "text", "structure", "overall", "exact", "cir");
  os << buf;
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-14s %6d %6d %4ld %4ld %4ld %6.4f %9.4f %7.4f %5s %5s\n", row.name.c_str(),
                  row.golden_cards, row.unresolved_flags, row.detection.tp, row.detection.fp, row.detection.fn,
                  row.scores.text_accuracy, row.scores.structure_accuracy, row.scores.overall_accuracy,
                  row.scores.overall_exact ? "yes" : "no", row.emitted ? "yes" : "no");
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "\nschematics %zu\nprecision %.4f\nrecall %.4f\nf1 %.4f\nf1 from rounded P/R %.4f\n"
                "text accuracy %.4f\nstructure accuracy %.4f\noverall accuracy %.4f\noverall exact %.4f\n",
                r.rows.size(), r.pooled.precision, r.pooled.recall, r.pooled.f1, r.f1_rounded_inputs, r.text_accuracy,
                r.structure_accuracy, r.overall_accuracy, r.overall_exact_rate);
  os << buf;
  return os.str();
}

std::string report_json(const EvalReport& r, const std::string& config_text) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"name", row.name},
                    {"golden_cards", row.golden_cards},
                    {"unresolved_flags", row.unresolved_flags},
                    {"emitted", row.emitted},
                    {"tp", row.detection.tp},
                    {"fp", row.detection.fp},
                    {"fn", row.detection.fn},
                    {"text_accuracy", row.scores.text_accuracy},
                    {"structure_accuracy", row.scores.structure_accuracy},
                    {"overall_accuracy", row.scores.overall_accuracy},
                    {"overall_exact", row.scores.overall_exact},
                    {"search_exact", row.scores.search_exact}});
  json j = {{"iou_threshold", r.iou_threshold},
            {"precision", r.pooled.precision},
            {"recall", r.pooled.recall},
            {"f1", r.pooled.f1},
            {"f1_rounded_inputs", r.f1_rounded_inputs},
            {"text_accuracy", r.text_accuracy},
            {"structure_accuracy", r.structure_accuracy},
            {"overall_accuracy", r.overall_accuracy},
            {"overall_exact_rate", r.overall_exact_rate},
            {"per_schematic", rows}};
  if (!config_text.empty()) j["config"] = config_text;
  return j.dump(2) + "\n";
}

}  // namespace schemnet
