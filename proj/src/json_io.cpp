#include "schemnet/json_io.hpp"

#include <map>

namespace schemnet {

using nlohmann::json;

json flag_json(const Flag& f) {
  json j = {{"id", f.id()},
            {"kind", flag_kind_name(f.kind)},
            {"subject", f.subject},
            {"key", f.key},
            {"detail", f.detail},
            {"resolution", nullptr}};
  if (f.resolution) j["resolution"] = *f.resolution;
  return j;
}

json flags_json(const std::vector<Flag>& flags) {
  json a = json::array();
  for (const auto& f : flags) a.push_back(flag_json(f));
  return a;
}

std::vector<Flag> parse_flags(std::string_view text) {
  json doc = json::parse(text);
  const json& list = doc.is_object() ? doc.at("flags") : doc;
  std::vector<Flag> out;
  std::size_t i = 0;
  for (const auto& j : list) {
    std::string path = "$.flags[" + std::to_string(i++) + "]";
    auto kind = parse_flag_kind(j.value("kind", ""));
    if (!kind) throw IngestError(path + ".kind", "unknown flag kind");
    Flag f{*kind, j.value("subject", ""), j.value("key", ""), j.value("detail", ""), std::nullopt};
    if (j.contains("resolution") && j["resolution"].is_string()) f.resolution = j["resolution"].get<std::string>();
    out.push_back(std::move(f));
  }
  return out;
}

json netlist_json(const Netlist& n) {
  json cards = json::array();
  for (const auto& c : n.cards) {
    json j = {{"designator", c.designator}, {"type", type_name(c.ctype)}, {"nodes", c.nodes}};
    if (c.value) j["value"] = format_value(*c.value);
    if (c.model) j["model"] = *c.model;
    cards.push_back(j);
  }
  json models = json::object();
  for (const auto& [name, kind] : n.models) models[name] = kind;
  return {{"title", n.title}, {"cards", cards}, {"models", models}};
}

json override_json(const Override& o) {
  json j = {{"target", o.target}, {"action", override_action_name(o.action)}};
  if (o.action == OverrideAction::BindTerminal) {
    j["payload"] = {{"role", o.role ? std::string(role_name(*o.role)) : ""}, {"node", o.value}};
  } else if (o.action != OverrideAction::Accept) {
    j["payload"] = o.value;
  }
  return j;
}

Override parse_override(const json& j, const std::string& path) {
  if (!j.is_object()) throw IngestError(path, "expected an object");
  Override o;
  if (j.contains("target") && j["target"].is_string()) o.target = j["target"].get<std::string>();
  else if (j.contains("flag") && j["flag"].is_string()) o.target = j["flag"].get<std::string>();
  else if (j.contains("component") && j["component"].is_number_integer())
    o.target = component_subject(j["component"].get<int>());
  else if (j.contains("component") && j["component"].is_string()) o.target = j["component"].get<std::string>();
  else throw IngestError(path, "needs one of target, flag or component");
  if (!j.contains("action") || !j["action"].is_string()) throw IngestError(path + ".action", "expected a string");
  auto action = parse_override_action(j["action"].get<std::string>());
  if (!action) throw IngestError(path + ".action", "unknown action \"" + j["action"].get<std::string>() + "\"");
  o.action = *action;
  const json* payload = j.contains("payload") ? &j["payload"] : nullptr;
  switch (o.action) {
    case OverrideAction::Accept: break;
    case OverrideAction::BindTerminal: {
      if (!payload || !payload->is_object()) throw IngestError(path + ".payload", "expected {role, node}");
      auto role = parse_role(payload->value("role", ""));
      if (!role) throw IngestError(path + ".payload.role", "unknown terminal role");
      if (!payload->contains("node") || !(*payload)["node"].is_string())
        throw IngestError(path + ".payload.node", "expected a string");
      o.role = role;
      o.value = (*payload)["node"].get<std::string>();
      break;
    }
    default:
      if (!payload || !payload->is_string()) throw IngestError(path + ".payload", "expected a string");
      o.value = payload->get<std::string>();
  }
  return o;
}

std::vector<Override> parse_overrides(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError("$", std::string("invalid JSON: ") + e.what());
  }
  const json* list = &doc;
  std::string base = "$";
  if (doc.is_object() && doc.contains("overrides")) {
    list = &doc["overrides"];
    base = "$.overrides";
  }
  if (!list->is_array()) throw IngestError(base, "expected an array");
  std::vector<Override> out;
  for (std::size_t i = 0; i < list->size(); ++i)
    out.push_back(parse_override((*list)[i], base + "[" + std::to_string(i) + "]"));
  return out;
}

std::string serialize_overrides(const std::vector<Override>& list) {
  json a = json::array();
  for (const auto& o : list) a.push_back(override_json(o));
  return json{{"overrides", a}}.dump(2) + "\n";
}

std::vector<Override> compact_overrides(const std::vector<Override>& log) {
  std::map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < log.size(); ++i) last[log[i].slot()] = i;
  std::vector<Override> out;
  for (std::size_t i = 0; i < log.size(); ++i)
    if (last[log[i].slot()] == i) out.push_back(log[i]);
  return out;
}

std::string flags_report(const ConvertResult& r) {
  json j = {{"unresolved", r.unresolved()}, {"flags", flags_json(r.flags)}, {"warnings", r.warnings}};
  if (!r.emission_error.empty()) j["emission_error"] = r.emission_error;
  return j.dump(2) + "\n";
}

std::vector<std::string> stage_names() { return {"binary", "detections", "texts", "labels", "nets", "bindings", "netlist"}; }

std::string stage_dump(const ConvertResult& r, std::string_view stage) {
  if (stage == "detections") return serialize_detections(r.components, r.dims);
  if (stage == "texts") return serialize_ocr(r.texts);
  if (stage == "nets") return serialize_nets(r.nodemap);
  if (stage == "bindings") {
    json a = json::array();
    for (const auto& b : r.bindings) {
      json j = {{"component", b.component_id}, {"designator_text", nullptr}, {"value_text", nullptr}};
      if (b.designator_text) j["designator_text"] = *b.designator_text;
      if (b.value_text) j["value_text"] = *b.value_text;
      a.push_back(j);
    }
    json asg = json::array();
    for (const auto& x : r.assignments) {
      json j = {{"component", x.component_id}, {"designator", x.designator()}};
      if (x.value) j["value"] = format_value(*x.value);
      if (x.model) j["model"] = *x.model;
      asg.push_back(j);
    }
    return json{{"bindings", a}, {"assignments", asg}}.dump(2) + "\n";
  }
  if (stage == "netlist") return (r.netlist ? netlist_json(*r.netlist) : json(nullptr)).dump(2) + "\n";
  throw std::invalid_argument("unknown stage " + std::string(stage));
}

}  // namespace schemnet
