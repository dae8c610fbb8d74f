#include "schemnet/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "json.hpp"
#include "schemnet/assist.hpp"
#include "schemnet/font.hpp"
#include "schemnet/symbols.hpp"

namespace schemnet {

using nlohmann::json;

std::string_view override_action_name(OverrideAction a) {
  switch (a) {
    case OverrideAction::SetType: return "set_type";
    case OverrideAction::SetDesignator: return "set_designator";
    case OverrideAction::SetValue: return "set_value";
    case OverrideAction::BindTerminal: return "bind_terminal";
    case OverrideAction::Accept: return "accept";
  }
  return "";
}

std::optional<OverrideAction> parse_override_action(std::string_view s) {
  for (auto a : {OverrideAction::SetType, OverrideAction::SetDesignator, OverrideAction::SetValue,
                 OverrideAction::BindTerminal, OverrideAction::Accept})
    if (override_action_name(a) == s) return a;
  return std::nullopt;
}

std::string Override::slot() const {
  std::string s = target + "|" + std::string(override_action_name(action));
  if (role) s += "|" + std::string(role_name(*role));
  return s;
}

std::optional<int> target_component(std::string_view target) {
  std::string_view subject = target;
  if (auto p = target.find(':'); p != std::string_view::npos) {
    subject = target.substr(p + 1);
    if (auto q = subject.find(':'); q != std::string_view::npos) subject = subject.substr(0, q);
  }
  if (subject.size() < 2 || subject.size() > 8 || subject[0] != 'c') return std::nullopt;
  int id = 0;
  for (char ch : subject.substr(1)) {
    if (ch < '0' || ch > '9') return std::nullopt;
    id = id * 10 + (ch - '0');
  }
  return id;
}

int ConvertResult::unresolved() const {
  return static_cast<int>(std::count_if(flags.begin(), flags.end(), [](const Flag& f) { return !f.resolved(); }));
}

int ConvertResult::exit_code() const { return netlist && unresolved() == 0 ? 0 : 2; }

namespace {

std::size_t glyph_count(const std::vector<TextBox>& texts) {
  std::size_t n = 0;
  for (const auto& t : texts) n += font::decode_utf8(t.text).size();
  return n;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool model_name_ok(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// Checks a value or model word for a type; fills `a` when given.
std::string check_value(ComponentType t, const std::string& text, Assignment* a) {
  if (carries_model(t)) {
    if (!model_name_ok(text)) return "\"" + text + "\" is not a model name";
    if (a) a->model = upper(text);
    return "";
  }
  ValueParse p = parse_value(text, ValueDialect::Label);
  if (!p.value) return "\"" + text + "\" is not a value";
  if (a) a->value = p.value;
  return "";
}

std::string check_designator(ComponentType t, const std::string& text, std::optional<ParsedDesignator>* out) {
  DesignatorParse p = parse_designator(text);
  if (!p.parsed || !p.parsed->is_designator()) return "\"" + text + "\" is not a designator";
  if (p.parsed->prefix != designator_prefix(t))
    return "prefix of \"" + text + "\" does not fit " + std::string(type_name(t));
  if (out) *out = p.parsed;
  return "";
}

Assignment* find_assignment(std::vector<Assignment>& list, int id) {
  for (auto& a : list)
    if (a.component_id == id) return &a;
  return nullptr;
}

const Component* find_component(const std::vector<Component>& comps, int id) {
  for (const auto& c : comps)
    if (c.id == id) return &c;
  return nullptr;
}

// Gives `a` the designator d; whoever held it moves to the smallest free index.
void take_designator(std::vector<Assignment>& list, Assignment& a, const ParsedDesignator& d) {
  a.prefix = d.prefix;
  a.index = d.index;
  for (auto& other : list) {
    if (&other == &a || other.prefix != d.prefix || other.index != d.index) continue;
    std::set<int> used;
    for (const auto& x : list)
      if (x.prefix == d.prefix && &x != &other) used.insert(x.index);
    int idx = 1;
    while (used.count(idx)) ++idx;
    other.index = idx;
  }
}

void resolve(std::vector<Flag>& flags, FlagKind kind, const std::string& subject, const std::string& key,
             const std::string& how) {
  for (auto& f : flags)
    if (f.kind == kind && f.subject == subject && (key.empty() || f.key == key) && !f.resolved()) f.resolution = how;
}

void run_assist_assign(const Config& cfg, const ConvertInput& in, ConvertResult& r) {
  std::set<int> flagged;
  for (const auto& f : r.flags)
    if (!f.resolved() && (f.kind == FlagKind::MissingValue || f.kind == FlagKind::PrefixConflict))
      if (auto id = target_component(f.subject)) flagged.insert(*id);
  if (flagged.empty()) return;
  json ctx = {{"components", json::parse(serialize_detections(r.components, r.dims))},
              {"texts", json::parse(serialize_ocr(r.texts))},
              {"flags", json::array()}};
  for (const auto& f : r.flags) ctx["flags"].push_back(f.id());
  auto png = encode_png(to_gray(r.binary));
  auto resp = remote_call({cfg.assist_url, in.assist_api_key, cfg.assist_timeout_s}, AssistKind::DesignatorAssign, png,
                          ctx.dump(), r.assist_log);
  if (!resp) return;
  for (const auto& s : resp->suggestions) {
    std::string who = component_subject(s.component_id);
    const Component* c = find_component(r.components, s.component_id);
    Assignment* a = find_assignment(r.assignments, s.component_id);
    if (!c || !a) {
      r.assist_log.push_back("dropped suggestion for unknown component " + who);
      continue;
    }
    if (!flagged.count(s.component_id)) {
      r.assist_log.push_back("ignored suggestion for unflagged " + who);
      continue;
    }
    if (!s.designator.empty()) {
      std::optional<ParsedDesignator> d;
      std::string err = check_designator(c->ctype, s.designator, &d);
      if (err.empty()) {
        take_designator(r.assignments, *a, *d);
        resolve(r.flags, FlagKind::PrefixConflict, who, "", "assist");
        r.assist_log.push_back("applied designator " + s.designator + " to " + who);
      } else {
        r.assist_log.push_back("dropped designator for " + who + ": " + err);
      }
    }
    if (!s.value.empty()) {
      bool missing = std::any_of(r.flags.begin(), r.flags.end(), [&](const Flag& f) {
        return f.kind == FlagKind::MissingValue && f.subject == who && !f.resolved();
      });
      if (!missing) {
        r.assist_log.push_back("ignored value for " + who + ": value not flagged");
        continue;
      }
      std::string err = check_value(c->ctype, s.value, a);
      if (err.empty()) {
        resolve(r.flags, FlagKind::MissingValue, who, "", "assist");
        r.assist_log.push_back("applied value " + s.value + " to " + who);
      } else {
        r.assist_log.push_back("dropped value for " + who + ": " + err);
      }
    }
  }
}

void set_binding(NodeMap& nm, const Component& c, TerminalRole role, const std::string& node) {
  auto& list = nm.bindings[c.id];
  std::map<TerminalRole, std::string> by_role(list.begin(), list.end());
  by_role[role] = node;
  list.clear();
  for (TerminalRole r : canonical_roles(c.ctype))
    if (by_role.count(r)) list.emplace_back(r, by_role[r]);
}

}  // namespace

std::string validate_override(const Override& o, const ConvertResult& current) {
  if (o.action == OverrideAction::Accept) {
    for (const auto& f : current.flags)
      if (f.id() == o.target) return "";
    return "no flag " + o.target;
  }
  auto id = target_component(o.target);
  if (!id) return "target \"" + o.target + "\" names no component";
  const Component* c = find_component(current.components, *id);
  if (!c) return "no component c" + std::to_string(*id);
  switch (o.action) {
    case OverrideAction::SetType:
      return parse_type(o.value) ? "" : "unknown component type \"" + o.value + "\"";
    case OverrideAction::SetDesignator:
      if (!emits_card(c->ctype)) return "ground symbols carry no designator";
      return check_designator(c->ctype, o.value, nullptr);
    case OverrideAction::SetValue:
      if (!emits_card(c->ctype)) return "ground symbols carry no value";
      return check_value(c->ctype, o.value, nullptr);
    case OverrideAction::BindTerminal: {
      if (!o.role) return "bind_terminal needs a role";
      auto roles = canonical_roles(c->ctype);
      if (std::find(roles.begin(), roles.end(), *o.role) == roles.end())
        return std::string(type_name(c->ctype)) + " has no terminal " + std::string(role_name(*o.role));
      if (o.value == "0") return "";
      for (const auto& [net, name] : current.nodemap.names)
        if (name == o.value) return "";
      return "no node " + o.value;
    }
    case OverrideAction::Accept: break;
  }
  return "";
}

ConvertResult convert(const ConvertInput& in, const Config& cfg) {
  ConvertResult r;
  BinaryImage bin = binarize(in.image);
  if (!in.detections_json && !in.ocr_json && cfg.normalize) {
    int k = detect_block_scale(bin);
    if (k > 1) {
      bin = downscale(bin, k);
      r.scale = k;
    }
    BinaryImage mirrored = flip_horizontal(bin);
    if (glyph_count(recognize_glyphs(mirrored, {}, cfg.glyph)) > glyph_count(recognize_glyphs(bin, {}, cfg.glyph))) {
      bin = std::move(mirrored);
      r.flipped = true;
    }
  }
  r.dims = {bin.width, bin.height};

  std::vector<Component> comps = in.detections_json ? ingest_detections(*in.detections_json, r.dims, &r.warnings)
                                                     : detect_template(bin, SymbolLibrary::standard(), cfg.templates);
  std::map<int, std::string> type_overrides;
  for (const auto& o : in.overrides)
    if (o.action == OverrideAction::SetType)
      if (auto id = target_component(o.target)) type_overrides[*id] = o.value;
  for (auto& c : comps) {
    auto it = type_overrides.find(c.id);
    if (it == type_overrides.end()) continue;
    auto t = parse_type(it->second);
    if (!t || *t == c.ctype) continue;
    auto roles = canonical_roles(*t);
    bool fits = c.terminals.size() == roles.size() &&
                std::all_of(c.terminals.begin(), c.terminals.end(), [&](const Terminal& term) {
                  return std::find(roles.begin(), roles.end(), term.role) != roles.end();
                });
    if (!fits) c.terminals.clear();
    c.ctype = *t;
  }

  r.texts = in.ocr_json ? ingest_ocr(*in.ocr_json, &r.warnings) : [&] {
    std::vector<BBox> mask;
    for (const auto& c : comps) mask.push_back(c.bbox);
    return recognize_glyphs(bin, mask, cfg.glyph);
  }();

  std::vector<Flag> flags;
  if (!cfg.assist_url.empty()) {
    auto png = encode_png(to_gray(bin));
    auto resp = remote_call({cfg.assist_url, in.assist_api_key, cfg.assist_timeout_s}, AssistKind::DetectVerify, png,
                            serialize_detections(comps, r.dims), r.assist_log);
    if (resp) {
      auto counts = resp->counts;
      for (const auto& c : comps) ++counts[static_cast<int>(c.ctype)].count_a;
      ConcordanceReport rep = verify_counts(counts);
      r.concordance = rep.score;
      for (auto& f : rep.flags) add_flag(flags, std::move(f));
    }
  } else if (in.detections_json) {
    ConcordanceReport rep = verify_concordance(comps, detect_template(bin, SymbolLibrary::standard(), cfg.templates));
    r.concordance = rep.score;
    for (auto& f : rep.flags) add_flag(flags, std::move(f));
  }

  ConnectResult cr = infer_connectivity(bin, comps, cfg.connect);
  r.components = std::move(cr.components);
  r.nodemap = std::move(cr.nodemap);
  for (auto& f : cr.flags) add_flag(flags, std::move(f));

  BindResult br = bind_text(r.components, r.texts, cfg.bind);
  r.bindings = std::move(br.bindings);
  for (auto& f : br.flags) add_flag(flags, std::move(f));

  AssignResult ar = assign_designators(r.components, r.bindings, r.texts);
  r.assignments = std::move(ar.assignments);
  for (auto& f : ar.flags) add_flag(flags, std::move(f));
  r.flags = std::move(flags);
  r.binary = std::move(bin);

  if (!cfg.assist_url.empty()) run_assist_assign(cfg, in, r);

  for (const auto& o : in.overrides) {
    std::string how = "override:" + std::string(override_action_name(o.action));
    if (o.action == OverrideAction::Accept) {
      for (auto& f : r.flags)
        if (f.id() == o.target && !f.resolved()) f.resolution = "accepted";
      continue;
    }
    auto id = target_component(o.target);
    const Component* c = id ? find_component(r.components, *id) : nullptr;
    if (!c) {
      r.warnings.push_back("override " + o.slot() + " skipped: no such component");
      continue;
    }
    std::string who = component_subject(c->id);
    Assignment* a = find_assignment(r.assignments, c->id);
    std::string err;
    switch (o.action) {
      case OverrideAction::SetType:
        resolve(r.flags, FlagKind::PrefixConflict, who, "", how);
        resolve(r.flags, FlagKind::TerminalCountMismatch, who, "", how);
        break;
      case OverrideAction::SetDesignator: {
        std::optional<ParsedDesignator> d;
        err = a ? check_designator(c->ctype, o.value, &d) : "no designator slot";
        if (err.empty()) {
          take_designator(r.assignments, *a, *d);
          resolve(r.flags, FlagKind::PrefixConflict, who, "", how);
        }
        break;
      }
      case OverrideAction::SetValue:
        err = a ? check_value(c->ctype, o.value, a) : "no value slot";
        if (err.empty()) resolve(r.flags, FlagKind::MissingValue, who, "", how);
        break;
      case OverrideAction::BindTerminal:
        err = o.role ? "" : "missing role";
        if (err.empty()) {
          set_binding(r.nodemap, *c, *o.role, o.value);
          resolve(r.flags, FlagKind::DanglingTerminal, who, std::string(role_name(*o.role)), how);
        }
        break;
      case OverrideAction::Accept: break;
    }
    if (!err.empty()) {
      r.warnings.push_back("override " + o.slot() + " skipped: " + err);
      continue;
    }
    // A set_* aimed at a flag id resolves that flag too.
    if (o.target.find(':') != std::string::npos)
      for (auto& f : r.flags)
        if (f.id() == o.target && !f.resolved()) f.resolution = how;
  }

  try {
    r.netlist = build_netlist(r.components, r.nodemap, r.assignments, r.flags, {in.force});
  } catch (const EmissionError& e) {
    r.emission_error = e.what();
  }
  return r;
}

}  // namespace schemnet
