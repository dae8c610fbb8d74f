#include "schemnet/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <tuple>

namespace schemnet {

std::string_view model_kind(ComponentType t) {
  switch (t) {
    case ComponentType::Diode: return "D";
    case ComponentType::Npn: return "NPN";
    case ComponentType::Pnp: return "PNP";
    case ComponentType::Nmos: return "NMOS";
    case ComponentType::Pmos: return "PMOS";
    default: return "";
  }
}

bool carries_model(ComponentType t) { return !model_kind(t).empty(); }

Value default_value(ComponentType t) {
  switch (t) {
    case ComponentType::Resistor: return {1, Multiplier::Kilo};
    case ComponentType::Capacitor: return {1, Multiplier::Micro};
    case ComponentType::Inductor: return {1, Multiplier::Milli};
    case ComponentType::VoltageSource: return {1, Multiplier::One};
    case ComponentType::CurrentSource: return {1, Multiplier::Milli};
    default: return {};
  }
}

std::string default_model(ComponentType t) {
  switch (t) {
    case ComponentType::Diode: return "DDEF";
    case ComponentType::Npn: return "QNPN";
    case ComponentType::Pnp: return "QPNP";
    case ComponentType::Nmos: return "MNMOS";
    case ComponentType::Pmos: return "MPMOS";
    default: return "";
  }
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_model_name(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::optional<ComponentType> card_type_for(char prefix) {
  switch (prefix) {
    case 'R': return ComponentType::Resistor;
    case 'C': return ComponentType::Capacitor;
    case 'L': return ComponentType::Inductor;
    case 'D': return ComponentType::Diode;
    case 'V': return ComponentType::VoltageSource;
    case 'I': return ComponentType::CurrentSource;
    default: return std::nullopt;
  }
}

}  // namespace

AssignResult assign_designators(const std::vector<Component>& comps, const std::vector<LabelBinding>& bindings,
                                const std::vector<TextBox>& texts) {
  std::map<int, const LabelBinding*> binding_of;
  for (const auto& b : bindings) binding_of[b.component_id] = &b;
  std::map<int, const TextBox*> text_of;
  for (const auto& t : texts) text_of[t.id] = &t;

  std::vector<const Component*> order;
  for (const auto& c : comps)
    if (emits_card(c.ctype)) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const Component* a, const Component* b) {
    return std::tie(a->bbox.y, a->bbox.x, a->id) < std::tie(b->bbox.y, b->bbox.x, b->id);
  });

  AssignResult res;
  std::map<int, Assignment> out;
  std::map<char, std::set<int>> used;

  // Bound designators; lower component id wins duplicates.
  std::vector<const Component*> by_id = order;
  std::sort(by_id.begin(), by_id.end(), [](const Component* a, const Component* b) { return a->id < b->id; });
  std::set<int> kept;
  for (const Component* c : by_id) {
    auto it = binding_of.find(c->id);
    if (it == binding_of.end() || !it->second->parsed || !it->second->parsed->is_designator()) continue;
    const LabelBinding& b = *it->second;
    const ParsedDesignator& d = *b.parsed;
    std::string key = b.designator_text ? text_subject(*b.designator_text) : "";
    char want = designator_prefix(c->ctype);
    if (d.prefix != want) {
      add_flag(res.flags, {FlagKind::PrefixConflict, component_subject(c->id), key,
                           std::string(type_name(c->ctype)) + " labeled " + format_designator(d), std::nullopt});
      continue;
    }
    if (used[want].count(d.index)) {
      add_flag(res.flags, {FlagKind::PrefixConflict, component_subject(c->id), key,
                           "designator " + format_designator(d) + " already taken", std::nullopt});
      continue;
    }
    used[want].insert(d.index);
    out[c->id] = Assignment{c->id, want, d.index, {}, {}};
    kept.insert(c->id);
  }

  for (const Component* c : order) {
    if (kept.count(c->id)) continue;
    char p = designator_prefix(c->ctype);
    int idx = 1;
    while (used[p].count(idx)) ++idx;
    used[p].insert(idx);
    out[c->id] = Assignment{c->id, p, idx, {}, {}};
  }

  for (const Component* c : order) {
    Assignment& a = out[c->id];
    const TextBox* vt = nullptr;
    auto it = binding_of.find(c->id);
    if (it != binding_of.end() && it->second->value_text) {
      auto t = text_of.find(*it->second->value_text);
      if (t != text_of.end()) vt = t->second;
    }
    std::string reason;
    if (carries_model(c->ctype)) {
      if (vt && is_model_name(vt->text)) {
        a.model = upper(vt->text);
      } else {
        a.model = default_model(c->ctype);
        reason = vt ? "unreadable model \"" + vt->text + "\"" : "no model label";
      }
    } else {
      std::optional<Value> v;
      bool ambiguous = false;
      if (vt) {
        ValueParse p = parse_value(vt->text, ValueDialect::Label);
        v = p.value;
        ambiguous = p.ambiguous;
      }
      if (v) {
        a.value = v;
      } else {
        a.value = default_value(c->ctype);
        reason = ambiguous ? "ambiguous value \"" + vt->text + "\"" : vt ? "unreadable value \"" + vt->text + "\"" : "no value label";
      }
    }
    if (!reason.empty()) {
      std::string fill = a.model ? *a.model : format_value(*a.value);
      add_flag(res.flags, {FlagKind::MissingValue, component_subject(c->id), "",
                           reason + "; defaulted " + a.designator() + " to " + fill, std::nullopt});
    }
  }

  for (const auto& c : comps)
    if (emits_card(c.ctype)) res.assignments.push_back(out[c.id]);
  return res;
}

void sort_cards(std::vector<Card>& cards) {
  auto key = [](const Card& c) {
    char p = c.designator.empty() ? '\0' : c.designator[0];
    long idx = 0;
    bool numeric = c.designator.size() > 1 &&
                   std::all_of(c.designator.begin() + 1, c.designator.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
    if (numeric && c.designator.size() < 12) idx = std::stol(c.designator.substr(1));
    return std::make_tuple(p, numeric ? 0 : 1, idx, c.designator);
  };
  std::stable_sort(cards.begin(), cards.end(), [&](const Card& a, const Card& b) { return key(a) < key(b); });
}

Netlist build_netlist(const std::vector<Component>& comps, const NodeMap& nodemap,
                      const std::vector<Assignment>& assignments, const std::vector<Flag>& flags,
                      const EmitOptions& opts) {
  std::vector<std::string> blocking;
  for (const auto& f : flags)
    if (f.kind == FlagKind::DanglingTerminal && !f.resolved()) blocking.push_back(f.id());
  if (!blocking.empty() && !opts.force) {
    std::string msg = "unresolved dangling terminals:";
    for (const auto& id : blocking) msg += " " + id;
    throw EmissionError(msg, blocking);
  }

  std::map<int, const Assignment*> assign_of;
  for (const auto& a : assignments) assign_of[a.component_id] = &a;

  Netlist n;
  int nc = 0;
  for (const auto& c : comps) {
    if (!emits_card(c.ctype)) continue;
    auto ai = assign_of.find(c.id);
    if (ai == assign_of.end()) throw EmissionError("component c" + std::to_string(c.id) + " has no designator", {});
    const Assignment& a = *ai->second;
    Card card;
    card.designator = a.designator();
    card.ctype = c.ctype;
    card.value = a.value;
    card.model = a.model;
    const auto* bound = nodemap.bindings.count(c.id) ? &nodemap.bindings.at(c.id) : nullptr;
    for (TerminalRole role : canonical_roles(c.ctype)) {
      std::string node;
      if (bound)
        for (const auto& [r, name] : *bound)
          if (r == role) node = name;
      if (node.empty()) node = "NC" + std::to_string(++nc);
      card.nodes.push_back(node);
    }
    if (c.ctype == ComponentType::Nmos || c.ctype == ComponentType::Pmos) card.nodes.push_back(card.nodes[2]);
    if (card.model) n.models[*card.model] = std::string(model_kind(c.ctype));
    n.cards.push_back(std::move(card));
  }
  sort_cards(n.cards);
  return n;
}

std::string to_spice(const Netlist& n) {
  std::ostringstream os;
  os << "* " << n.title << "\n";
  for (const auto& c : n.cards) {
    os << c.designator;
    for (const auto& node : c.nodes) os << ' ' << node;
    if (c.model) os << ' ' << *c.model;
    else if (c.value) os << ' ' << format_value(*c.value);
    os << "\n";
  }
  for (const auto& [name, kind] : n.models) os << ".model " << name << ' ' << kind << "\n";
  os << ".end\n";
  return os.str();
}

Netlist parse_netlist(std::string_view text) {
  Netlist n;
  n.title.clear();
  struct Pending {
    std::size_t card;
    int line;
  };
  std::vector<Pending> needs_model;
  std::set<std::string> designators;
  std::map<std::string, int> model_line;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (ended) throw ParseError(lineno, "content after .end");
    if (tok[0][0] == '*') {
      if (lineno == 1) {
        std::string_view rest = std::string_view(line).substr(1);
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        n.title = std::string(rest);
      }
      continue;
    }
    std::string head = upper(tok[0]);
    if (head[0] == '.') {
      if (head == ".END") {
        ended = true;
        continue;
      }
      if (head == ".MODEL") {
        if (tok.size() < 3) throw ParseError(lineno, "malformed .model");
        std::string name = upper(tok[1]);
        std::string kind = upper(tok[2]);
        if (auto p = kind.find('('); p != std::string::npos) kind = kind.substr(0, p);
        if (kind != "D" && kind != "NPN" && kind != "PNP" && kind != "NMOS" && kind != "PMOS")
          throw ParseError(lineno, "unsupported model kind " + kind);
        n.models[name] = kind;
        model_line[name] = lineno;
        continue;
      }
      throw ParseError(lineno, "unsupported directive " + tok[0]);
    }
    char letter = head[0];
    Card card;
    card.designator = head;
    std::size_t want_nodes = 0;
    bool model = false;
    switch (letter) {
      case 'R': case 'C': case 'L': case 'V': case 'I': want_nodes = 2; break;
      case 'D': want_nodes = 2; model = true; break;
      case 'Q': want_nodes = 3; model = true; break;
      case 'M': want_nodes = 4; model = true; break;
      default: throw ParseError(lineno, std::string("unsupported card ") + letter);
    }
    std::vector<std::string> rest(tok.begin() + 1, tok.end());
    if ((letter == 'V' || letter == 'I') && rest.size() == 4 && upper(rest[2]) == "DC") rest.erase(rest.begin() + 2);
    if (rest.size() != want_nodes + 1) throw ParseError(lineno, "wrong node count for " + head);
    for (std::size_t i = 0; i < want_nodes; ++i) card.nodes.push_back(upper(rest[i]));
    if (model) {
      card.model = upper(rest.back());
      if (!is_model_name(*card.model)) throw ParseError(lineno, "malformed model name " + rest.back());
      if (letter == 'D') card.ctype = ComponentType::Diode;
      else needs_model.push_back({n.cards.size(), lineno});
    } else {
      card.ctype = *card_type_for(letter);
      ValueParse v = parse_value(rest.back(), ValueDialect::Spice);
      if (!v.value) throw ParseError(lineno, "malformed value " + rest.back());
      card.value = v.value;
    }
    if (!designators.insert(head).second) throw ParseError(lineno, "duplicate designator " + head);
    n.cards.push_back(std::move(card));
  }
  for (const auto& p : needs_model) {
    Card& c = n.cards[p.card];
    auto it = n.models.find(*c.model);
    if (it == n.models.end()) throw ParseError(p.line, "undeclared model " + *c.model);
    const std::string& kind = it->second;
    char letter = c.designator[0];
    if (letter == 'Q' && kind == "NPN") c.ctype = ComponentType::Npn;
    else if (letter == 'Q' && kind == "PNP") c.ctype = ComponentType::Pnp;
    else if (letter == 'M' && kind == "NMOS") c.ctype = ComponentType::Nmos;
    else if (letter == 'M' && kind == "PMOS") c.ctype = ComponentType::Pmos;
    else throw ParseError(p.line, "model " + *c.model + " of kind " + kind + " does not fit " + c.designator);
  }
  for (const auto& c : n.cards)
    if (c.ctype == ComponentType::Diode) {
      auto it = n.models.find(*c.model);
      if (it != n.models.end() && it->second != "D")
        throw ParseError(model_line[*c.model], "model " + *c.model + " is not a diode model");
    }
  return n;
}

}  // namespace schemnet
