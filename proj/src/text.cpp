#include "schemnet/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "schemnet/detect.hpp"
#include "schemnet/font.hpp"

namespace schemnet {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

constexpr std::string_view kPrefixes = "RCLDVIQM";

}  // namespace

DesignatorParse parse_designator(std::string_view raw) {
  DesignatorParse out;
  std::string_view s = trim(raw);
  if (s.size() >= 2 && kPrefixes.find(s[0]) != std::string_view::npos &&
      std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    if (s.size() > 10) return out;
    ParsedDesignator d;
    d.prefix = s[0];
    d.index = std::stoi(std::string(s.substr(1)));
    out.parsed = d;
    return out;
  }
  ValueParse v = parse_value(s, ValueDialect::Label);
  out.ambiguous = v.ambiguous;
  if (v.value) out.parsed = ParsedDesignator{'\0', -1, v.value};
  return out;
}

std::string format_designator(const ParsedDesignator& d) {
  if (d.is_designator()) return std::string(1, d.prefix) + std::to_string(d.index);
  return d.value ? format_value(*d.value) : std::string();
}

namespace {

struct GlyphPart {
  int dx, dy, w, h;
};

struct ScaledGlyph {
  const font::Glyph* glyph;
  BinaryImage cell;
  std::vector<GlyphPart> parts;
};

std::vector<ScaledGlyph> scaled_glyphs(int scale) {
  std::vector<ScaledGlyph> out;
  for (const auto& g : font::glyphs()) {
    ScaledGlyph sg{&g, BinaryImage(font::kGlyphW * scale, font::kGlyphH * scale), {}};
    font::draw_word(sg.cell, 0, 0, std::u32string(1, g.code), scale);
    LabelMap lm = label_components(sg.cell, Connectivity::Eight);
    for (const auto& r : lm.regions) sg.parts.push_back({r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h});
    out.push_back(std::move(sg));
  }
  return out;
}

bool cell_matches(const BinaryImage& img, const ScaledGlyph& g, int ox, int oy) {
  const int w = g.cell.width, h = g.cell.height;
  if (ox < 0 || oy < 0 || ox + w > img.width || oy + h > img.height) return false;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (img.get(ox + x, oy + y) != g.cell.get(x, y)) return false;
  for (int x = -1; x <= w; ++x)
    if (img.test(ox + x, oy - 1) || img.test(ox + x, oy + h)) return false;
  for (int y = 0; y < h; ++y)
    if (img.test(ox - 1, oy + y) || img.test(ox + w, oy + y)) return false;
  return true;
}

struct GlyphHit {
  int x, y;
  char32_t code;
};

}  // namespace

std::vector<TextBox> recognize_glyphs(const BinaryImage& img, const std::vector<BBox>& mask,
                                      const GlyphOptions& opts) {
  BinaryImage work = img;
  for (const auto& b : mask) {
    BBox clip = intersection(b, {0, 0, work.width, work.height});
    for (int y = clip.y; y < clip.bottom(); ++y)
      for (int x = clip.x; x < clip.right(); ++x) work.set(x, y, false);
  }
  static thread_local std::map<int, std::vector<ScaledGlyph>> cache;
  auto& glyphs = cache.try_emplace(opts.scale, scaled_glyphs(opts.scale)).first->second;
  const int cw = font::kGlyphW * opts.scale, ch = font::kGlyphH * opts.scale;

  LabelMap lm = label_components(work, Connectivity::Eight);
  std::set<std::tuple<int, int, char32_t>> hits;
  for (const auto& r : lm.regions) {
    if (r.bbox.w > cw || r.bbox.h > ch) continue;
    for (const auto& g : glyphs)
      for (const auto& p : g.parts) {
        if (p.w != r.bbox.w || p.h != r.bbox.h) continue;
        int ox = r.bbox.x - p.dx, oy = r.bbox.y - p.dy;
        if (cell_matches(work, g, ox, oy)) hits.insert({oy, ox, g.glyph->code});
      }
  }

  std::vector<GlyphHit> sorted;
  for (auto [y, x, c] : hits) sorted.push_back({x, y, c});
  std::sort(sorted.begin(), sorted.end(), [](const GlyphHit& a, const GlyphHit& b) {
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });

  std::vector<TextBox> out;
  const double max_gap = opts.merge_gap_glyphs * cw;
  std::u32string word;
  BBox box;
  int last_right = 0;
  auto flush = [&] {
    if (word.empty()) return;
    out.push_back({static_cast<int>(out.size()), font::encode_utf8(word), box, 1.0});
    word.clear();
  };
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& h = sorted[i];
    bool joins = !word.empty() && h.y == box.y && h.x - last_right <= max_gap && h.x >= last_right;
    if (!joins) {
      flush();
      box = {h.x, h.y, cw, ch};
    } else {
      box = bbox_union(box, {h.x, h.y, cw, ch});
    }
    word.push_back(h.code);
    last_right = h.x + cw;
  }
  flush();
  return out;
}

std::vector<TextBox> ingest_ocr(std::string_view json_text, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IngestError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("texts")) throw IngestError("/texts", "missing required field");
  const json& list = doc["texts"];
  if (!list.is_array()) throw IngestError("/texts", "expected array");
  std::vector<TextBox> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = "/texts/" + std::to_string(i);
    const json& e = list[i];
    if (!e.is_object()) throw IngestError(path, "expected object");
    if (!e.contains("string") || !e["string"].is_string()) throw IngestError(path + "/string", "expected string");
    if (!e.contains("bbox") || !e["bbox"].is_array() || e["bbox"].size() != 4)
      throw IngestError(path + "/bbox", "expected [x, y, w, h]");
    TextBox t;
    for (int k = 0; k < 4; ++k)
      if (!e["bbox"][k].is_number_integer()) throw IngestError(path + "/bbox/" + std::to_string(k), "expected integer");
    t.bbox = {e["bbox"][0].get<int>(), e["bbox"][1].get<int>(), e["bbox"][2].get<int>(), e["bbox"][3].get<int>()};
    if (t.bbox.w < 1 || t.bbox.h < 1) throw IngestError(path + "/bbox", "width and height must be >= 1");
    if (e.contains("confidence")) {
      if (!e["confidence"].is_number()) throw IngestError(path + "/confidence", "expected number");
      t.confidence = e["confidence"].get<double>();
    }
    std::string s = e["string"].get<std::string>();
    if (trim(s).empty()) {
      if (warnings) warnings->push_back(path + ": empty string dropped");
      continue;
    }
    t.text = std::string(trim(s));
    out.push_back(std::move(t));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TextBox& a, const TextBox& b) { return std::tie(a.bbox.y, a.bbox.x) < std::tie(b.bbox.y, b.bbox.x); });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

std::string serialize_ocr(const std::vector<TextBox>& texts) {
  json list = json::array();
  for (const auto& t : texts)
    list.push_back({{"string", t.text}, {"bbox", {t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h}}, {"confidence", t.confidence}});
  return json{{"texts", list}}.dump(2) + "\n";
}

double text_to_component_distance(const BBox& text, const BBox& comp) {
  double cx = text.x + text.w / 2.0, cy = text.y + text.h / 2.0;
  double x0 = comp.x, y0 = comp.y, x1 = comp.right(), y1 = comp.bottom();
  bool inside = cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1;
  if (inside) return std::min({cx - x0, x1 - cx, cy - y0, y1 - cy});
  double dx = std::max({x0 - cx, 0.0, cx - x1});
  double dy = std::max({y0 - cy, 0.0, cy - y1});
  return std::hypot(dx, dy);
}

BindResult bind_text(const std::vector<Component>& comps, const std::vector<TextBox>& texts, const BindOptions& opts) {
  struct Pair {
    double d;
    int text_idx;
    int comp_idx;
  };
  std::vector<Pair> pairs;
  for (std::size_t ti = 0; ti < texts.size(); ++ti)
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
      const auto& c = comps[ci];
      if (!emits_card(c.ctype)) continue;
      double d = text_to_component_distance(texts[ti].bbox, c.bbox);
      if (d <= opts.max_distance_factor * std::max(c.bbox.w, c.bbox.h))
        pairs.push_back({d, static_cast<int>(ti), static_cast<int>(ci)});
    }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (a.d != b.d) return a.d < b.d;
    int ta = texts[a.text_idx].id, tb = texts[b.text_idx].id;
    if (ta != tb) return ta < tb;
    return comps[a.comp_idx].id < comps[b.comp_idx].id;
  });

  std::vector<DesignatorParse> parsed;
  for (const auto& t : texts) parsed.push_back(parse_designator(t.text));
  auto is_designator = [&](int ti) { return parsed[ti].parsed && parsed[ti].parsed->is_designator(); };

  BindResult res;
  std::map<int, LabelBinding> by_comp;
  for (std::size_t ci = 0; ci < comps.size(); ++ci)
    if (emits_card(comps[ci].ctype)) by_comp[static_cast<int>(ci)] = LabelBinding{comps[ci].id, {}, {}, {}};
  std::vector<char> used(texts.size(), 0);
  std::vector<int> conflicted_with(texts.size(), -1);
  for (const auto& p : pairs) {
    if (used[p.text_idx]) continue;
    auto& b = by_comp[p.comp_idx];
    if (is_designator(p.text_idx)) {
      if (b.designator_text) {
        if (conflicted_with[p.text_idx] < 0) conflicted_with[p.text_idx] = p.comp_idx;
        continue;
      }
      b.designator_text = texts[p.text_idx].id;
      b.parsed = parsed[p.text_idx].parsed;
    } else {
      if (b.value_text) continue;
      b.value_text = texts[p.text_idx].id;
    }
    used[p.text_idx] = 1;
  }
  for (std::size_t ti = 0; ti < texts.size(); ++ti) {
    if (used[ti]) continue;
    if (conflicted_with[ti] >= 0) {
      const auto& c = comps[conflicted_with[ti]];
      add_flag(res.flags, {FlagKind::PrefixConflict, component_subject(c.id), text_subject(texts[ti].id),
                           "second designator candidate \"" + texts[ti].text + "\" left unbound", std::nullopt});
    } else {
      add_flag(res.flags, {FlagKind::UnboundText, text_subject(texts[ti].id), "",
                           "text \"" + texts[ti].text + "\" not bound to any component", std::nullopt});
    }
  }
  for (auto& [ci, b] : by_comp) res.bindings.push_back(b);
  return res;
}

}  // namespace schemnet
