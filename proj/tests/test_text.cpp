#include <doctest.h>

#include <algorithm>
#include <random>

#include "schemnet/detect.hpp"
#include "schemnet/font.hpp"
#include "schemnet/synth.hpp"
#include "schemnet/text.hpp"

using namespace schemnet;

namespace {

TextBox tb(int id, std::string s, BBox b) { return TextBox{id, std::move(s), b, 1.0}; }

Component resistor(int id, BBox b) {
  Component c;
  c.id = id;
  c.ctype = ComponentType::Resistor;
  c.bbox = b;
  return c;
}

}  // namespace

TEST_CASE("parse_designator grammar") {
  auto r12 = parse_designator("R12");
  REQUIRE(r12.parsed);
  CHECK(r12.parsed->prefix == 'R');
  CHECK(r12.parsed->index == 12);
  CHECK_FALSE(r12.parsed->value);

  auto ohms = parse_designator("10k\xCE\xA9");
  REQUIRE(ohms.parsed);
  CHECK_FALSE(ohms.parsed->is_designator());
  CHECK(ohms.parsed->value->magnitude == 10);
  CHECK(ohms.parsed->value->mult == Multiplier::Kilo);

  auto farads = parse_designator("4.7uF");
  REQUIRE(farads.parsed);
  CHECK(farads.parsed->value->magnitude == 4.7);
  CHECK(farads.parsed->value->mult == Multiplier::Micro);

  CHECK(parse_designator("2.2\xC2\xB5H").parsed->value->mult == Multiplier::Micro);
  CHECK(parse_designator("1Meg").parsed->value->mult == Multiplier::Mega);
  CHECK(parse_designator("1MEG").parsed->value->mult == Multiplier::Mega);
  CHECK(parse_designator("3K").parsed->value->mult == Multiplier::Kilo);
  CHECK(parse_designator("5V").parsed->value->mult == Multiplier::One);
  CHECK(parse_designator("100Ohm").parsed->value->magnitude == 100);

  auto m = parse_designator("10M");
  CHECK(m.ambiguous);
  CHECK_FALSE(m.parsed);
  CHECK_FALSE(parse_designator("X7").parsed);
  CHECK_FALSE(parse_designator("").parsed);
  CHECK_FALSE(parse_designator("10kQ").parsed);
  CHECK_FALSE(parse_designator("0").parsed);
}

TEST_CASE("format then parse is identity") {
  std::mt19937_64 rng(3);
  const std::string prefixes = "RCLDVIQM";
  const Multiplier mults[] = {Multiplier::Pico, Multiplier::Nano,  Multiplier::Micro, Multiplier::Milli,
                              Multiplier::One,  Multiplier::Kilo, Multiplier::Mega, Multiplier::Giga};
  for (int i = 0; i < 500; ++i) {
    ParsedDesignator d;
    if (rng() % 2) {
      d.prefix = prefixes[rng() % prefixes.size()];
      d.index = static_cast<int>(rng() % 1000);
    } else {
      d.value = Value{static_cast<double>(1 + rng() % 999) / (rng() % 2 ? 10.0 : 1.0), mults[rng() % 8]};
    }
    auto back = parse_designator(format_designator(d));
    REQUIRE(back.parsed);
    CHECK(*back.parsed == d);
  }
}

TEST_CASE("glyph recognizer reads synth labels") {
  CHECK(recognize_glyphs(BinaryImage(60, 40), {}).empty());

  auto g = synthesize(3, 10);
  std::vector<BBox> mask;
  for (auto& c : g.detections) mask.push_back(c.bbox);
  auto found = recognize_glyphs(g.ink, mask);
  auto want = g.texts;
  auto by_pos = [](const TextBox& a, const TextBox& b) {
    return std::pair(a.bbox.y, a.bbox.x) < std::pair(b.bbox.y, b.bbox.x);
  };
  std::sort(found.begin(), found.end(), by_pos);
  std::sort(want.begin(), want.end(), by_pos);
  REQUIRE(found.size() == want.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    CHECK(found[i].text == want[i].text);
    CHECK(found[i].bbox == want[i].bbox);
  }
  CHECK(std::any_of(found.begin(), found.end(), [](const TextBox& t) { return t.text == "R1"; }));
}

TEST_CASE("glyph words split beyond the merge gap") {
  BinaryImage img(200, 40);
  auto word = font::decode_utf8("10k");
  auto ohm = font::decode_utf8("\xCE\xA9");
  font::draw_word(img, 10, 10, word, 2);
  int glyph_w = font::word_width(font::decode_utf8("0"), 2);
  font::draw_word(img, 10 + font::word_width(word, 2) + 2 * glyph_w, 10, ohm, 2);
  auto found = recognize_glyphs(img, {});
  REQUIRE(found.size() == 2);
  CHECK(found[0].text == "10k");
  CHECK(found[1].text == "\xCE\xA9");

  BinaryImage joined(200, 40);
  font::draw_word(joined, 10, 10, font::decode_utf8("10k\xCE\xA9"), 2);
  auto one = recognize_glyphs(joined, {});
  REQUIRE(one.size() == 1);
  CHECK(one[0].text == "10k\xCE\xA9");
}

TEST_CASE("ingest_ocr") {
  auto one = ingest_ocr(R"({"texts": [{"string": "R1", "bbox": [1, 2, 10, 8]}]})");
  REQUIRE(one.size() == 1);
  CHECK(one[0].text == "R1");

  std::vector<std::string> warnings;
  auto dropped = ingest_ocr(R"({"texts": [{"string": "  ", "bbox": [1, 2, 10, 8]}]})", &warnings);
  CHECK(dropped.empty());
  CHECK(warnings.size() == 1);

  auto both = ingest_ocr(
      R"({"texts": [{"string": "R1", "bbox": [1, 2, 10, 8]}, {"string": "R2", "bbox": [1, 2, 10, 8]}]})");
  CHECK(both.size() == 2);

  auto sorted = ingest_ocr(
      R"({"texts": [{"string": "B", "bbox": [30, 2, 10, 8]}, {"string": "A", "bbox": [1, 2, 10, 8]}]})");
  CHECK(sorted[0].text == "A");
  CHECK(ingest_ocr(serialize_ocr(sorted)) == sorted);

  CHECK_THROWS_AS(ingest_ocr(R"({"texts": [{"bbox": [1, 2, 10, 8]}]})"), IngestError);
  CHECK_THROWS_AS(ingest_ocr(R"({})"), IngestError);
}

TEST_CASE("bind_text nearest designator and value") {
  std::vector<Component> comps = {resistor(0, {100, 100, 40, 16})};
  std::vector<TextBox> texts = {tb(0, "R1", {110, 81, 20, 14}), tb(1, "10k", {110, 120, 30, 14})};
  auto r = bind_text(comps, texts);
  REQUIRE(r.bindings.size() == 1);
  CHECK(r.bindings[0].designator_text == 0);
  CHECK(r.bindings[0].value_text == 1);
  REQUIRE(r.bindings[0].parsed);
  CHECK(r.bindings[0].parsed->index == 1);
  CHECK(r.flags.empty());
}

TEST_CASE("bind_text breaks distance ties by component id") {
  std::vector<Component> comps = {resistor(0, {0, 0, 40, 16}), resistor(1, {100, 0, 40, 16})};
  std::vector<TextBox> texts = {tb(0, "R1", {60, 1, 20, 14})};
  auto r = bind_text(comps, texts);
  CHECK(r.bindings[0].designator_text == 0);
  CHECK_FALSE(r.bindings[1].designator_text);
}

TEST_CASE("bind_text flags a second designator and leftovers") {
  std::vector<Component> comps = {resistor(0, {100, 100, 40, 16})};
  std::vector<TextBox> texts = {tb(0, "R1", {110, 82, 20, 14}), tb(1, "R2", {110, 120, 20, 14}),
                                tb(2, "far", {400, 400, 30, 14})};
  auto r = bind_text(comps, texts);
  CHECK(r.bindings[0].designator_text == 0);
  auto has = [&](FlagKind k, const std::string& subject, const std::string& key) {
    return std::any_of(r.flags.begin(), r.flags.end(),
                       [&](const Flag& f) { return f.kind == k && f.subject == subject && f.key == key; });
  };
  CHECK(has(FlagKind::PrefixConflict, "c0", "t1"));
  CHECK(has(FlagKind::UnboundText, "t2", ""));
}

TEST_CASE("bind_text is invariant to text order") {
  auto g = synthesize(11, 13);
  auto base = bind_text(g.detections, g.texts);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    auto shuffled = g.texts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto r = bind_text(g.detections, shuffled);
    REQUIRE(r.bindings.size() == base.bindings.size());
    for (std::size_t k = 0; k < r.bindings.size(); ++k) {
      CHECK(r.bindings[k].designator_text == base.bindings[k].designator_text);
      CHECK(r.bindings[k].value_text == base.bindings[k].value_text);
    }
    std::vector<int> used;
    for (auto& b : r.bindings) {
      if (b.designator_text) used.push_back(*b.designator_text);
      if (b.value_text) used.push_back(*b.value_text);
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
  }
}

TEST_CASE("bind_text reproduces golden designators on the corpus") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = synthesize(seed, corpus_components(seed));
    auto r = bind_text(g.detections, g.texts);
    std::vector<std::string> got;
    for (auto& b : r.bindings)
      if (b.designator_text) got.push_back(g.texts[*b.designator_text].text);
    auto want = g.designators;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    CHECK(r.flags.empty());
  }
}
