#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "schemnet/netlist.hpp"
#include "schemnet/synth.hpp"

using namespace schemnet;

namespace {

Component comp(int id, ComponentType t, int x, int y) {
  Component c;
  c.id = id;
  c.ctype = t;
  c.bbox = {x, y, 20, 10};
  return c;
}

LabelBinding binding(int comp, std::optional<int> des, std::optional<int> val, const std::vector<TextBox>& texts) {
  LabelBinding b;
  b.component_id = comp;
  b.designator_text = des;
  b.value_text = val;
  if (des) b.parsed = parse_designator(texts[*des].text).parsed;
  return b;
}

TextBox text(int id, std::string s) { return TextBox{id, std::move(s), {0, 0, 10, 10}, 1.0}; }

bool has_flag(const std::vector<Flag>& flags, FlagKind k, const std::string& subject) {
  return std::any_of(flags.begin(), flags.end(), [&](const Flag& f) { return f.kind == k && f.subject == subject; });
}

NodeMap nodes(std::map<int, std::vector<std::pair<TerminalRole, std::string>>> b) {
  NodeMap nm;
  nm.bindings = std::move(b);
  return nm;
}

}  // namespace

TEST_CASE("bound designator and value pass through") {
  std::vector<TextBox> texts = {text(0, "R7"), text(1, "10k")};
  std::vector<Component> comps = {comp(0, ComponentType::Resistor, 0, 0)};
  auto r = assign_designators(comps, {binding(0, 0, 1, texts)}, texts);
  REQUIRE(r.assignments.size() == 1);
  CHECK(r.assignments[0].designator() == "R7");
  CHECK(format_value(*r.assignments[0].value) == "10k");
  CHECK(r.flags.empty());
}

TEST_CASE("unlabeled components take the smallest unused index in reading order") {
  std::vector<TextBox> texts = {text(0, "R1")};
  std::vector<Component> comps = {comp(0, ComponentType::Resistor, 50, 10), comp(1, ComponentType::Resistor, 90, 40),
                                  comp(2, ComponentType::Resistor, 10, 40)};
  auto r = assign_designators(comps, {binding(0, 0, std::nullopt, texts), binding(1, std::nullopt, std::nullopt, texts),
                                      binding(2, std::nullopt, std::nullopt, texts)},
                              texts);
  CHECK(r.assignments[0].designator() == "R1");
  CHECK(r.assignments[2].designator() == "R2");
  CHECK(r.assignments[1].designator() == "R3");
}

TEST_CASE("wrong prefix and duplicates raise prefix_conflict") {
  std::vector<TextBox> texts = {text(0, "R5"), text(1, "C2"), text(2, "C2")};
  std::vector<Component> comps = {comp(0, ComponentType::Capacitor, 0, 0), comp(1, ComponentType::Capacitor, 40, 0),
                                  comp(2, ComponentType::Capacitor, 80, 0)};
  auto r = assign_designators(comps, {binding(0, 0, std::nullopt, texts), binding(1, 1, std::nullopt, texts),
                                      binding(2, 2, std::nullopt, texts)},
                              texts);
  CHECK(has_flag(r.flags, FlagKind::PrefixConflict, "c0"));
  CHECK(has_flag(r.flags, FlagKind::PrefixConflict, "c2"));
  CHECK(r.assignments[0].designator() == "C1");
  CHECK(r.assignments[1].designator() == "C2");
  CHECK(r.assignments[2].designator() == "C3");
}

TEST_CASE("missing values fall back to type defaults") {
  CHECK(format_value(default_value(ComponentType::Resistor)) == "1k");
  CHECK(format_value(default_value(ComponentType::Capacitor)) == "1u");
  CHECK(format_value(default_value(ComponentType::Inductor)) == "1m");
  CHECK(format_value(default_value(ComponentType::VoltageSource)) == "1");
  CHECK(format_value(default_value(ComponentType::CurrentSource)) == "1m");
  CHECK(default_model(ComponentType::Diode) == "DDEF");
  CHECK(default_model(ComponentType::Npn) == "QNPN");
  CHECK(default_model(ComponentType::Pnp) == "QPNP");
  CHECK(default_model(ComponentType::Nmos) == "MNMOS");
  CHECK(default_model(ComponentType::Pmos) == "MPMOS");

  std::vector<TextBox> texts = {text(0, "R1")};
  std::vector<Component> comps = {comp(0, ComponentType::Resistor, 0, 0), comp(1, ComponentType::Npn, 40, 0)};
  auto r = assign_designators(comps, {binding(0, 0, std::nullopt, texts), binding(1, std::nullopt, std::nullopt, texts)},
                              texts);
  CHECK(has_flag(r.flags, FlagKind::MissingValue, "c0"));
  CHECK(has_flag(r.flags, FlagKind::MissingValue, "c1"));
  CHECK(r.assignments[1].model == "QNPN");
}

TEST_CASE("assignment is invariant to component order") {
  auto g = synthesize(12, 14);
  auto binds = bind_text(g.detections, g.texts);
  auto base = assign_designators(g.detections, binds.bindings, g.texts);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    auto comps = g.detections;
    auto b = binds.bindings;
    std::shuffle(comps.begin(), comps.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    auto r = assign_designators(comps, b, g.texts);
    std::map<int, std::string> got, want;
    for (auto& a : r.assignments) got[a.component_id] = a.designator();
    for (auto& a : base.assignments) want[a.component_id] = a.designator();
    CHECK(got == want);
    std::set<std::string> unique;
    for (auto& [id, d] : got) unique.insert(d);
    CHECK(unique.size() == got.size());
  }
}

TEST_CASE("emission formats") {
  std::vector<Component> comps = {comp(0, ComponentType::Resistor, 0, 0)};
  std::vector<Assignment> as = {{0, 'R', 1, default_value(ComponentType::Resistor), std::nullopt}};
  auto n = build_netlist(comps, nodes({{0, {{TerminalRole::T1, "N1"}, {TerminalRole::T2, "0"}}}}), as, {});
  CHECK(to_spice(n) == "* generated netlist\nR1 N1 0 1k\n.end\n");

  std::vector<Component> q = {comp(0, ComponentType::Npn, 0, 0), comp(1, ComponentType::Nmos, 40, 0)};
  std::vector<Assignment> qa = {{0, 'Q', 1, std::nullopt, "QNPN"}, {1, 'M', 1, std::nullopt, "MNMOS"}};
  auto qn = build_netlist(
      q,
      nodes({{0, {{TerminalRole::Collector, "N2"}, {TerminalRole::Base, "N1"}, {TerminalRole::Emitter, "0"}}},
             {1, {{TerminalRole::Drain, "N2"}, {TerminalRole::Gate, "N1"}, {TerminalRole::Source, "0"}}}}),
      qa, {});
  CHECK(to_spice(qn) ==
        "* generated netlist\nM1 N2 N1 0 0 MNMOS\nQ1 N2 N1 0 QNPN\n.model MNMOS NMOS\n.model QNPN NPN\n.end\n");
}

TEST_CASE("unresolved dangling terminal blocks emission unless forced") {
  std::vector<Component> comps = {comp(0, ComponentType::Resistor, 0, 0)};
  std::vector<Assignment> as = {{0, 'R', 1, Value{1, Multiplier::Kilo}, std::nullopt}};
  Flag f{FlagKind::DanglingTerminal, "c0", "t2", "", std::nullopt};
  auto nm = nodes({{0, {{TerminalRole::T1, "N1"}}}});
  try {
    build_netlist(comps, nm, as, {f});
    FAIL("expected EmissionError");
  } catch (const EmissionError& e) {
    CHECK(e.flag_ids() == std::vector<std::string>{"dangling_terminal:c0:t2"});
  }
  auto forced = build_netlist(comps, nm, as, {f}, {true});
  REQUIRE(forced.cards.size() == 1);
  CHECK(forced.cards[0].nodes[1].rfind("NC", 0) == 0);
  f.resolution = "accepted";
  CHECK_NOTHROW(build_netlist(comps, nm, as, {f}));
}

TEST_CASE("parse_netlist") {
  auto r = parse_netlist("* t\nR1 1 2 10k\n.end\n");
  REQUIRE(r.cards.size() == 1);
  CHECK(r.cards[0].value->base() == doctest::Approx(10000));
  CHECK(r.title == "t");

  auto lower = parse_netlist("r1 a b 1meg\nc1 a 0 2.2u\nv1 a 0 dc 5\n.end");
  CHECK(lower.cards[1].ctype == ComponentType::Capacitor);
  CHECK(lower.cards[0].value->base() == doctest::Approx(1e6));
  CHECK(lower.cards[2].value->base() == doctest::Approx(5));

  auto models = parse_netlist("Q1 c b e QX\nM1 d g s s MX\n.model QX PNP\n.model MX PMOS\n.end\n");
  CHECK(models.cards[0].ctype == ComponentType::Pnp);
  CHECK(models.cards[1].ctype == ComponentType::Pmos);

  auto line_of = [](const char* text) {
    try {
      parse_netlist(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("* t\nR1 1 2 1k\nX1 1 2 SUB\n.end") == 3);
  CHECK(line_of("R1 1 1k\n.end") == 1);
  CHECK(line_of("R1 1 2 k10\n.end") == 1);
  CHECK(line_of("R1 1 2 1.5.2\n.end") == 1);
  CHECK(line_of("R1 1 2 1k\nR1 2 3 1k\n.end") == 2);
  CHECK(line_of("Q1 1 2 3 QN\n.end") == 1);
  CHECK(line_of("R1 1 2 1k\n.end\nR2 1 2 1k") == 3);
  CHECK(line_of("R1 1 2 1k\n.tran 1n 1u\n.end") == 2);
  try {
    parse_netlist("X1 1 2 SUB");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()) == "unsupported card X at line 1");
  }
}

TEST_CASE("emitted corpus netlists round-trip") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto g = synthesize(seed, corpus_components(seed));
    auto text = to_spice(g.netlist);
    auto back = parse_netlist(text);
    CHECK(back == g.netlist);
    CHECK(to_spice(back) == text);
  }
  auto g3 = synthesize(3, 10);
  CHECK(netlists_equivalent(parse_netlist(to_spice(g3.netlist)), g3.netlist).equivalent);
}

TEST_CASE("cards sort by prefix then index") {
  std::vector<Card> cards;
  for (auto d : {"R10", "C2", "R2", "M1", "C10"}) cards.push_back(Card{d, ComponentType::Resistor, {"0", "N1"}, {}, {}});
  sort_cards(cards);
  std::vector<std::string> order;
  for (auto& c : cards) order.push_back(c.designator);
  CHECK(order == std::vector<std::string>{"C2", "C10", "M1", "R2", "R10"});
}
