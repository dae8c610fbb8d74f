#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "schemnet/connect.hpp"
#include "schemnet/netlist.hpp"
#include "schemnet/symbols.hpp"
#include "schemnet/synth.hpp"

using namespace schemnet;

namespace {

Component two_lead(int id, ComponentType t, BBox b) {
  Component c{id, t, b, 1.0, {}, 0};
  c.terminals = {{TerminalRole::T1, {b.x, b.y + b.h / 2}}, {TerminalRole::T2, {b.right() - 1, b.y + b.h / 2}}};
  return c;
}

Component ground(int id, BBox b) {
  Component c{id, ComponentType::Ground, b, 1.0, {}, 0};
  c.terminals = {{TerminalRole::Gnd, {b.x + b.w / 2, b.y}}};
  return c;
}

void path(BinaryImage& img, std::initializer_list<Point> pts) {
  auto it = pts.begin();
  for (auto prev = *it++; it != pts.end(); prev = *it++) draw_stroke(img, prev, *it, 1);
}

NetExtraction extract(const BinaryImage& img, const std::vector<Component>& comps, const ConnectOptions& o = {}) {
  auto masked = mask_components(img, comps, o.mask_dilation);
  return extract_nets(label_components(masked, o.connectivity), comps, o.min_area, o.band);
}

bool has_flag(const std::vector<Flag>& flags, FlagKind k, const std::string& subject) {
  return std::any_of(flags.begin(), flags.end(), [&](const Flag& f) { return f.kind == k && f.subject == subject; });
}

std::string bound(const NodeMap& nm, int comp, TerminalRole role) {
  auto it = nm.bindings.find(comp);
  if (it == nm.bindings.end()) return {};
  for (auto& [r, n] : it->second)
    if (r == role) return n;
  return {};
}

// R and C joined on top; each returns to its own ground symbol.
struct TwoGround {
  BinaryImage img{160, 80};
  std::vector<Component> comps;
  TwoGround() {
    comps = {two_lead(0, ComponentType::Resistor, {20, 20, 30, 10}),
             two_lead(1, ComponentType::Capacitor, {100, 20, 30, 10}), ground(2, {55, 60, 11, 8}),
             ground(3, {135, 60, 11, 8})};
    path(img, {{19, 25}, {10, 25}, {10, 5}, {90, 5}, {90, 25}, {99, 25}});
    path(img, {{50, 25}, {60, 25}, {60, 59}});
    path(img, {{130, 25}, {140, 25}, {140, 59}});
  }
};

}  // namespace

TEST_CASE("mask_components") {
  BinaryImage img(40, 20);
  path(img, {{0, 10}, {39, 10}});
  CHECK(mask_components(img, {}, 2) == img);
  CHECK(mask_components(img, {two_lead(0, ComponentType::Resistor, {0, 0, 40, 20})}, 0).popcount() == 0);

  auto split = mask_components(img, {two_lead(0, ComponentType::Resistor, {15, 5, 10, 10})}, 1);
  int n = 0;
  oracle::flood_labels(split, 8, &n);
  CHECK(n == 2);
  CHECK(label_components(split).region_count == 2);
  CHECK(split.width == img.width);
}

TEST_CASE("extract_nets keeps a wire between two components") {
  BinaryImage img(160, 60);
  std::vector<Component> comps = {two_lead(0, ComponentType::Resistor, {20, 20, 30, 10}),
                                  two_lead(1, ComponentType::Capacitor, {100, 20, 30, 10})};
  path(img, {{50, 25}, {99, 25}});
  img.set(5, 55), img.set(6, 55), img.set(7, 55);
  auto ex = extract(img, comps);
  REQUIRE(ex.nets.size() == 1);
  auto& net = ex.nets[0];
  REQUIRE(net.touchpoints.size() == 2);
  std::set<int> touched;
  for (auto& t : net.touchpoints) {
    touched.insert(t.component);
    CHECK(chebyshev_to_box(t.contact, comps[t.component].bbox) <= 3);
  }
  CHECK(touched == std::set<int>{0, 1});
  CHECK(ex.flags.empty());
}

TEST_CASE("broken wire raises dangling_terminal") {
  BinaryImage img(160, 60);
  std::vector<Component> comps = {two_lead(0, ComponentType::VoltageSource, {20, 20, 30, 10}),
                                  two_lead(1, ComponentType::Resistor, {100, 20, 30, 10})};
  path(img, {{50, 25}, {75, 25}});
  auto ex = extract(img, comps);
  CHECK(ex.nets.empty());
  REQUIRE(ex.flags.size() == 1);
  CHECK(ex.flags[0].kind == FlagKind::DanglingTerminal);
  CHECK(ex.flags[0].subject == "c0");
  CHECK(ex.flags[0].key == "t2");
}

TEST_CASE("ground nets merge into node 0") {
  TwoGround f;
  auto ex = extract(f.img, f.comps);
  CHECK(ex.nets.size() == 3);
  auto merged = merge_equipotential(ex.nets, ex.components);
  REQUIRE(merged.size() == 2);
  int grounds = 0;
  for (auto& n : merged) {
    if (!n.ground) continue;
    ++grounds;
    for (auto& t : n.touchpoints) CHECK(f.comps[t.component].ctype != ComponentType::Ground);
  }
  CHECK(grounds == 1);

  auto again = merge_equipotential(merged, ex.components);
  REQUIRE(again.size() == merged.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].anchor == merged[i].anchor);
    CHECK(again[i].touchpoints == merged[i].touchpoints);
  }

  auto tm = map_terminals(merged, ex.components, 3);
  CHECK(bound(tm.nodemap, 0, TerminalRole::T1) == "N1");
  CHECK(bound(tm.nodemap, 1, TerminalRole::T1) == "N1");
  CHECK(bound(tm.nodemap, 0, TerminalRole::T2) == "0");
  CHECK(bound(tm.nodemap, 1, TerminalRole::T2) == "0");
  CHECK(tm.flags.empty());
  for (auto& [id, list] : tm.nodemap.bindings)
    for (auto& [role, name] : list) {
      bool named = std::any_of(tm.nodemap.names.begin(), tm.nodemap.names.end(),
                               [&](auto& kv) { return kv.second == name; });
      CHECK(named);
    }
}

TEST_CASE("merge without ground only renumbers") {
  BinaryImage img(160, 60);
  std::vector<Component> comps = {two_lead(0, ComponentType::Resistor, {20, 20, 30, 10}),
                                  two_lead(1, ComponentType::Capacitor, {100, 20, 30, 10})};
  path(img, {{50, 25}, {99, 25}});
  path(img, {{19, 25}, {10, 25}, {10, 5}, {140, 5}, {140, 25}, {130, 25}});
  auto ex = extract(img, comps);
  auto merged = merge_equipotential(ex.nets, comps);
  CHECK(merged.size() == ex.nets.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i].net_id == static_cast<int>(i));
    CHECK_FALSE(merged[i].ground);
  }
  auto tm = map_terminals(merged, ex.components, 3);
  CHECK(bound(tm.nodemap, 0, TerminalRole::T1) == "N1");
  CHECK(bound(tm.nodemap, 0, TerminalRole::T2) == "N2");
}

TEST_CASE("shorted capacitor binds both leads to one node") {
  BinaryImage img(160, 80);
  std::vector<Component> comps = {two_lead(0, ComponentType::Capacitor, {100, 20, 30, 10}), ground(1, {85, 60, 11, 8})};
  path(img, {{99, 25}, {90, 25}, {90, 5}, {140, 5}, {140, 25}, {130, 25}});
  path(img, {{90, 25}, {90, 59}});
  auto r = infer_connectivity(img, comps);
  CHECK(bound(r.nodemap, 0, TerminalRole::T1) == "0");
  CHECK(bound(r.nodemap, 0, TerminalRole::T2) == "0");
  CHECK(r.flags.empty());
}

TEST_CASE("seed 3 connectivity matches the golden netlist") {
  auto g = synthesize(3, 10);
  auto r = infer_connectivity(g.ink, g.detections);
  CHECK(r.flags.empty());
  auto binds = bind_text(r.components, g.texts);
  auto a = assign_designators(r.components, binds.bindings, g.texts);
  auto n = build_netlist(r.components, r.nodemap, a.assignments, r.flags);
  CHECK(netlists_equivalent(n, g.netlist).equivalent);
  CHECK(serialize_nets(r.nodemap) == serialize_nets(infer_connectivity(g.ink, g.detections).nodemap));
}

TEST_CASE("synthesized terminals without anchors") {
  BinaryImage img(160, 60);
  std::vector<Component> comps = {two_lead(0, ComponentType::Resistor, {20, 20, 30, 10}),
                                  two_lead(1, ComponentType::Capacitor, {100, 20, 30, 10})};
  path(img, {{50, 25}, {99, 25}});
  path(img, {{19, 25}, {10, 25}, {10, 5}, {140, 5}, {140, 25}, {130, 25}});
  for (auto& c : comps) c.terminals.clear();
  auto r = infer_connectivity(img, comps);
  CHECK(r.flags.empty());
  for (auto& c : r.components) CHECK(c.terminals.size() == 2);
  CHECK(bound(r.nodemap, 0, TerminalRole::T1) != bound(r.nodemap, 0, TerminalRole::T2));
  CHECK(bound(r.nodemap, 0, TerminalRole::T2) == bound(r.nodemap, 1, TerminalRole::T1));
}

TEST_CASE("closed loop connectivity over corpus seeds") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto g = synthesize(seed, corpus_components(seed));
    auto r = infer_connectivity(g.ink, g.detections);
    CHECK(r.flags.empty());
    auto binds = bind_text(r.components, g.texts);
    auto a = assign_designators(r.components, binds.bindings, g.texts);
    auto n = build_netlist(r.components, r.nodemap, a.assignments, r.flags);
    CHECK_MESSAGE(netlists_equivalent(n, g.netlist).equivalent, "seed " << seed);
  }
}
