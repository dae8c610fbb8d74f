#include "schemnet/detect.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "json.hpp"

namespace schemnet {

using nlohmann::json;

namespace {

constexpr TerminalRole kTwo[] = {TerminalRole::T1, TerminalRole::T2};
constexpr TerminalRole kBjt[] = {TerminalRole::Collector, TerminalRole::Base, TerminalRole::Emitter};
constexpr TerminalRole kMos[] = {TerminalRole::Drain, TerminalRole::Gate, TerminalRole::Source};
constexpr TerminalRole kGnd[] = {TerminalRole::Gnd};

constexpr std::string_view kTypeNames[] = {"resistor", "capacitor",      "inductor", "diode",
                                           "voltage_source", "current_source", "npn", "pnp",
                                           "nmos",     "pmos",           "ground"};
constexpr std::string_view kRoleNames[] = {"t1", "t2", "collector", "base", "emitter",
                                           "drain", "gate", "source", "gnd"};
constexpr std::string_view kFlagNames[] = {"type_count_mismatch", "terminal_count_mismatch", "unbound_text",
                                           "prefix_conflict", "dangling_terminal", "missing_value"};

}  // namespace

std::string_view type_name(ComponentType t) { return kTypeNames[static_cast<int>(t)]; }

std::optional<ComponentType> parse_type(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kTypeNames); ++i)
    if (kTypeNames[i] == s) return static_cast<ComponentType>(i);
  return std::nullopt;
}

std::string_view role_name(TerminalRole r) { return kRoleNames[static_cast<int>(r)]; }

std::optional<TerminalRole> parse_role(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kRoleNames); ++i)
    if (kRoleNames[i] == s) return static_cast<TerminalRole>(i);
  return std::nullopt;
}

std::string_view flag_kind_name(FlagKind k) { return kFlagNames[static_cast<int>(k)]; }

std::optional<FlagKind> parse_flag_kind(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kFlagNames); ++i)
    if (kFlagNames[i] == s) return static_cast<FlagKind>(i);
  return std::nullopt;
}

std::span<const TerminalRole> canonical_roles(ComponentType t) {
  switch (t) {
    case ComponentType::Npn:
    case ComponentType::Pnp:
      return kBjt;
    case ComponentType::Nmos:
    case ComponentType::Pmos:
      return kMos;
    case ComponentType::Ground:
      return kGnd;
    default:
      return kTwo;
  }
}

char designator_prefix(ComponentType t) {
  switch (t) {
    case ComponentType::Resistor: return 'R';
    case ComponentType::Capacitor: return 'C';
    case ComponentType::Inductor: return 'L';
    case ComponentType::Diode: return 'D';
    case ComponentType::VoltageSource: return 'V';
    case ComponentType::CurrentSource: return 'I';
    case ComponentType::Npn:
    case ComponentType::Pnp: return 'Q';
    case ComponentType::Nmos:
    case ComponentType::Pmos: return 'M';
    case ComponentType::Ground: return '\0';
  }
  return '\0';
}

std::string Flag::id() const {
  std::string s(flag_kind_name(kind));
  s += ":" + subject;
  if (!key.empty()) s += ":" + key;
  return s;
}

void add_flag(std::vector<Flag>& flags, Flag f) {
  std::string id = f.id();
  for (const auto& g : flags)
    if (g.id() == id) return;
  flags.push_back(std::move(f));
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw IngestError(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) throw IngestError(path + "/" + key, "missing required field");
  return *it;
}

int require_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw IngestError(path, "expected integer");
  return v.get<int>();
}

}  // namespace

std::vector<Component> ingest_detections(std::string_view json_text, ImageDims dims,
                                         std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IngestError("", std::string("malformed JSON: ") + e.what());
  }
  const json& image = require(doc, "image", "");
  int w = require_int(require(image, "width", "/image"), "/image/width");
  int h = require_int(require(image, "height", "/image/height"), "/image/height");
  if (dims.width > 0 && (w != dims.width || h != dims.height))
    throw IngestError("/image", "declared size " + std::to_string(w) + "x" + std::to_string(h) +
                                    " does not match image " + std::to_string(dims.width) + "x" +
                                    std::to_string(dims.height));
  const json& list = require(doc, "components", "");
  if (!list.is_array()) throw IngestError("/components", "expected array");

  std::vector<Component> comps;
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = "/components/" + std::to_string(i);
    const json& e = list[i];
    const json& type = require(e, "type", path);
    if (!type.is_string()) throw IngestError(path + "/type", "expected string");
    auto ct = parse_type(type.get<std::string>());
    if (!ct) throw IngestError(path + "/type", "unknown component type \"" + type.get<std::string>() + "\"");
    const json& bb = require(e, "bbox", path);
    if (!bb.is_array() || bb.size() != 4) throw IngestError(path + "/bbox", "expected [x, y, w, h]");
    BBox box{require_int(bb[0], path + "/bbox/0"), require_int(bb[1], path + "/bbox/1"),
             require_int(bb[2], path + "/bbox/2"), require_int(bb[3], path + "/bbox/3")};
    if (box.w < 1 || box.h < 1) throw IngestError(path + "/bbox", "width and height must be >= 1");
    BBox clamped = intersection(box, {0, 0, w, h});
    if (clamped.w == 0 || clamped.h == 0) throw IngestError(path + "/bbox", "box lies outside the image");
    if (!(clamped == box) && warnings) warnings->push_back(path + "/bbox: clamped to image bounds");

    Component c;
    c.id = static_cast<int>(i);
    c.ctype = *ct;
    c.bbox = clamped;
    if (auto it = e.find("confidence"); it != e.end()) {
      if (!it->is_number()) throw IngestError(path + "/confidence", "expected number");
      c.confidence = it->get<double>();
      if (c.confidence < 0 || c.confidence > 1) throw IngestError(path + "/confidence", "must lie in [0, 1]");
    }
    if (auto it = e.find("terminals"); it != e.end()) {
      if (!it->is_array()) throw IngestError(path + "/terminals", "expected array");
      auto roles = canonical_roles(*ct);
      for (std::size_t j = 0; j < it->size(); ++j) {
        std::string tp = path + "/terminals/" + std::to_string(j);
        const json& t = (*it)[j];
        const json& role = require(t, "role", tp);
        auto r = role.is_string() ? parse_role(role.get<std::string>()) : std::nullopt;
        if (!r || std::find(roles.begin(), roles.end(), *r) == roles.end())
          throw IngestError(tp + "/role", "invalid terminal role for " + std::string(type_name(*ct)));
        const json& xy = require(t, "xy", tp);
        if (!xy.is_array() || xy.size() != 2) throw IngestError(tp + "/xy", "expected [x, y]");
        c.terminals.push_back({*r, {require_int(xy[0], tp + "/xy/0"), require_int(xy[1], tp + "/xy/1")}});
      }
    }
    comps.push_back(std::move(c));
  }
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return std::tie(a.bbox.y, a.bbox.x, a.id) < std::tie(b.bbox.y, b.bbox.x, b.id);
  });
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].id = static_cast<int>(i);
  return comps;
}

std::string serialize_detections(const std::vector<Component>& comps, ImageDims dims) {
  json list = json::array();
  for (const auto& c : comps) {
    json e;
    e["type"] = type_name(c.ctype);
    e["bbox"] = {c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h};
    e["confidence"] = c.confidence;
    if (!c.terminals.empty()) {
      json ts = json::array();
      for (const auto& t : c.terminals) ts.push_back({{"role", role_name(t.role)}, {"xy", {t.anchor.x, t.anchor.y}}});
      e["terminals"] = ts;
    }
    list.push_back(e);
  }
  json doc{{"image", {{"width", dims.width}, {"height", dims.height}}}, {"components", list}};
  return doc.dump(2) + "\n";
}

ConcordanceReport verify_counts(const std::vector<TypeCount>& counts) {
  ConcordanceReport rep;
  long num = 0, den = 0;
  for (const auto& tc : counts) {
    if (tc.count_a == 0 && tc.count_b == 0) continue;
    rep.per_type.push_back(tc);
    num += std::min(tc.count_a, tc.count_b);
    den += std::max(tc.count_a, tc.count_b);
    if (tc.count_a != tc.count_b) {
      rep.flags.push_back({FlagKind::TypeCountMismatch, std::string(type_name(tc.ctype)), "",
                           std::to_string(tc.count_a) + " vs " + std::to_string(tc.count_b) + " " +
                               std::string(type_name(tc.ctype)),
                           std::nullopt});
    }
  }
  rep.score = den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  return rep;
}

ConcordanceReport verify_concordance(const std::vector<Component>& a, const std::vector<Component>& b) {
  std::vector<TypeCount> counts;
  for (auto t : kAllTypes) counts.push_back({t, 0, 0});
  for (const auto& c : a) ++counts[static_cast<int>(c.ctype)].count_a;
  for (const auto& c : b) ++counts[static_cast<int>(c.ctype)].count_b;
  return verify_counts(counts);
}

}  // namespace schemnet
