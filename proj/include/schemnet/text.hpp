#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schemnet/raster.hpp"
#include "schemnet/types.hpp"
#include "schemnet/value.hpp"

namespace schemnet {

struct TextBox {
  int id = 0;
  std::string text;  // UTF-8
  BBox bbox;
  double confidence = 1.0;
  friend bool operator==(const TextBox&, const TextBox&) = default;
};

/// Either a reference designator (prefix + index) or a bare value.
struct ParsedDesignator {
  char prefix = '\0';  // one of R C L D V I Q M, or '\0' for a value-only label
  int index = -1;
  std::optional<Value> value;

  bool is_designator() const { return prefix != '\0'; }
  friend bool operator==(const ParsedDesignator&, const ParsedDesignator&) = default;
};

struct DesignatorParse {
  std::optional<ParsedDesignator> parsed;
  bool ambiguous = false;  // e.g. bare "M" multiplier
};

DesignatorParse parse_designator(std::string_view s);
std::string format_designator(const ParsedDesignator& d);

struct GlyphOptions {
  int scale = 2;
  // Glyphs whose cell gap is at most this many glyph widths join one word.
  double merge_gap_glyphs = 1.0;
};

/// Exact bitmap-font recognizer. Ink inside any `mask` box is ignored.
std::vector<TextBox> recognize_glyphs(const BinaryImage& img, const std::vector<BBox>& mask,
                                      const GlyphOptions& opts = {});

std::vector<TextBox> ingest_ocr(std::string_view json_text, std::vector<std::string>* warnings = nullptr);
std::string serialize_ocr(const std::vector<TextBox>& texts);

struct LabelBinding {
  int component_id = 0;
  std::optional<int> designator_text;
  std::optional<int> value_text;
  std::optional<ParsedDesignator> parsed;  // parsed designator, if bound
};

struct BindOptions {
  // max distance = factor * max(w, h) of the candidate component's box
  double max_distance_factor = 1.5;
};

struct BindResult {
  std::vector<LabelBinding> bindings;  // one per non-ground component, in component order
  std::vector<Flag> flags;
};

// Euclidean distance from the text box center to the nearest point on the component box perimeter.
double text_to_component_distance(const BBox& text, const BBox& comp);

BindResult bind_text(const std::vector<Component>& comps, const std::vector<TextBox>& texts,
                     const BindOptions& opts = {});

}  // namespace schemnet
