#include "schemnet/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <map>
#include <stdexcept>

#include "schemnet/detect.hpp"
#include "schemnet/font.hpp"
#include "schemnet/prng.hpp"

namespace schemnet {

namespace {

constexpr std::array<const char*, 9> kMantissas = {"1", "2.2", "4.7", "10", "22", "47", "100", "220", "470"};

bool is_transistor(ComponentType t) {
  return t == ComponentType::Npn || t == ComponentType::Pnp || t == ComponentType::Nmos || t == ComponentType::Pmos;
}

bool is_polarized(ComponentType t) {
  return t == ComponentType::Diode || t == ComponentType::VoltageSource || t == ComponentType::CurrentSource;
}

void draw_value(SplitMix64& rng, CircuitElement& e) {
  auto set = [&](std::string mant, Multiplier m, std::string unit) {
    e.value = Value{std::strtod(mant.c_str(), nullptr), m};
    e.label = mant + std::string(multiplier_suffix(m)) + unit;
  };
  auto pick_model = [&](const char* a, const char* b) {
    e.model = rng.below(2) ? b : a;
    e.label = *e.model;
  };
  switch (e.ctype) {
    case ComponentType::Resistor:
      if (rng.chance(5)) {
        set("1", Multiplier::Mega, "");
      } else {
        std::string m = kMantissas[rng.below(kMantissas.size())];
        set(m, rng.below(2) ? Multiplier::Kilo : Multiplier::One, "");
      }
      break;
    case ComponentType::Capacitor: {
      std::string m = kMantissas[rng.below(kMantissas.size())];
      constexpr std::array<Multiplier, 3> mults = {Multiplier::Pico, Multiplier::Nano, Multiplier::Micro};
      set(m, mults[rng.below(3)], "");
      break;
    }
    case ComponentType::Inductor: {
      std::string m = kMantissas[rng.below(kMantissas.size())];
      set(m, rng.below(2) ? Multiplier::Milli : Multiplier::Micro, "");
      break;
    }
    case ComponentType::VoltageSource: {
      constexpr std::array<const char*, 6> volts = {"1", "2", "3", "5", "9", "12"};
      set(volts[rng.below(volts.size())], Multiplier::One, "V");
      break;
    }
    case ComponentType::CurrentSource: {
      constexpr std::array<const char*, 4> amps = {"1", "2", "5", "10"};
      std::string m = amps[rng.below(amps.size())];
      set(m, rng.below(2) ? Multiplier::Micro : Multiplier::Milli, "A");
      break;
    }
    case ComponentType::Diode: pick_model("DX", "DZ"); break;
    case ComponentType::Npn: pick_model("QN1", "QN2"); break;
    case ComponentType::Pnp: pick_model("QP1", "QP2"); break;
    case ComponentType::Nmos: pick_model("NM1", "NM2"); break;
    case ComponentType::Pmos: pick_model("PM1", "PM2"); break;
    case ComponentType::Ground: break;
  }
}

}  // namespace

Circuit generate_circuit(std::uint64_t seed, int n) {
  if (n < kMinComponents || n > kMaxComponents)
    throw std::invalid_argument("component count must be in [2, 20], got " + std::to_string(n));
  SplitMix64 rng(seed);
  Circuit c;
  c.seed = seed;
  c.node_count = 2;
  c.parent = {-1, -1};
  std::vector<int> deg = {1, 1};

  CircuitElement v1;
  v1.ctype = ComponentType::VoltageSource;
  v1.nodes = {1, 0};
  v1.creator = 1;
  draw_value(rng, v1);
  c.elements.push_back(v1);

  // Pending nodes plus one if ground still has a single element.
  auto deficit = [&](const std::vector<int>& d) {
    int k = d[0] < 2 ? 1 : 0;
    for (std::size_t i = 1; i < d.size(); ++i) k += d[i] < 2;
    return k;
  };
  auto adjacent = [&](int u) {
    std::vector<int> out;
    if (c.parent[u] > 0) out.push_back(c.parent[u]);
    for (int v = 1; v < c.node_count; ++v)
      if (c.parent[v] == u) out.push_back(v);
    return out;
  };

  while (static_cast<int>(c.elements.size()) < n) {
    const int remaining = n - static_cast<int>(c.elements.size()) - 1;
    std::vector<int> pending;
    for (int v = 1; v < c.node_count; ++v)
      if (deg[v] < 2) pending.push_back(v);
    int u = pending.empty() ? rng.range(1, c.node_count - 1) : pending[rng.below(pending.size())];

    CircuitElement e;
    e.ctype = kCardTypes[rng.below(kCardTypes.size())];
    e.creator = u;

    if (is_transistor(e.ctype)) {
      bool upper_new = rng.below(2) == 0;
      bool lower_new = rng.below(2) == 0;
      auto trial = deg;
      trial[u] += 1;
      for (bool fresh : {upper_new, lower_new}) {
        if (fresh) trial.push_back(1);
        else trial[0] += 1;
      }
      if (deficit(trial) > remaining) upper_new = lower_new = false;
      auto end = [&](bool fresh) {
        if (!fresh) {
          deg[0] += 1;
          return 0;
        }
        c.parent.push_back(u);
        deg.push_back(1);
        return c.node_count++;
      };
      int upper = end(upper_new);
      int lower = end(lower_new);
      deg[u] += 1;
      e.nodes = {upper, u, lower};
    } else {
      std::vector<int> adj = adjacent(u);
      enum Option { Ground, Fresh, Parallel };
      std::vector<Option> options;
      {
        auto trial = deg;
        trial[u] += 1;
        trial[0] += 1;
        options.push_back(Ground);
        trial = deg;
        trial[u] += 1;
        trial.push_back(1);
        if (deficit(trial) <= remaining) options.push_back(Fresh);
        bool any_parallel = false;
        for (int w : adj) {
          trial = deg;
          trial[u] += 1;
          trial[w] += 1;
          any_parallel = any_parallel || deficit(trial) <= remaining;
        }
        if (any_parallel) options.push_back(Parallel);
      }
      Option opt = options[rng.below(options.size())];
      int left = u, right = 0;
      if (opt == Ground) {
        deg[0] += 1;
      } else if (opt == Fresh) {
        c.parent.push_back(u);
        deg.push_back(1);
        right = c.node_count++;
      } else {
        std::vector<int> ok;
        for (int w : adj) {
          auto trial = deg;
          trial[u] += 1;
          trial[w] += 1;
          if (deficit(trial) <= remaining) ok.push_back(w);
        }
        int w = ok[rng.below(ok.size())];
        deg[w] += 1;
        if (w == c.parent[u]) left = w, right = u;
        else right = w;
      }
      deg[u] += 1;
      e.orientation = is_polarized(e.ctype) ? static_cast<int>(rng.below(2)) * 2 : 0;
      e.nodes = e.orientation == 0 ? std::vector<int>{left, right} : std::vector<int>{right, left};
      e.creator = left;
    }
    draw_value(rng, e);
    c.elements.push_back(std::move(e));
  }
  return c;
}

namespace {

constexpr int kMargin = 32;
constexpr int kBand = 192;
constexpr int kRow = 64;
constexpr int kSymbolOffset = 56;
constexpr int kGroundReach = 24;
constexpr int kLabelGap = 20;
constexpr int kLabelLift = 8;
constexpr int kLabelScale = 2;

int row_y(int r) { return kMargin + r * kRow + kRow / 2; }

struct Layout {
  const Circuit& c;
  std::vector<int> depth;
  std::vector<std::vector<int>> out_items;  // node -> element indices placed in its band
  std::vector<int> incoming;
  std::vector<int> height;
  std::vector<int> block_start;
  std::vector<int> row_of;       // element -> row (two-terminal) or upper row (transistor)
  std::vector<int> creator_row;  // node -> row of the creating connection

  explicit Layout(const Circuit& circuit) : c(circuit) {
    const int nodes = c.node_count;
    depth.assign(nodes, 0);
    for (int v = 2; v < nodes; ++v) depth[v] = depth[c.parent[v]] + 1;
    out_items.assign(nodes, {});
    incoming.assign(nodes, 0);
    for (std::size_t i = 0; i < c.elements.size(); ++i) {
      const auto& e = c.elements[i];
      if (is_transistor(e.ctype)) {
        out_items[e.creator].push_back(static_cast<int>(i));
        for (int v : {e.nodes[0], e.nodes[2]})
          if (v) ++incoming[v];
        continue;
      }
      int right = other_end(e);
      if (right) ++incoming[right];
      if (!is_parallel(static_cast<int>(i))) out_items[e.creator].push_back(static_cast<int>(i));
    }
    height.assign(nodes, 0);
    for (int v = nodes - 1; v >= 1; --v) height[v] = compute_height(v);
    block_start.assign(nodes, 0);
    creator_row.assign(nodes, 0);
    row_of.assign(c.elements.size(), -1);
    place(1, 0);
    for (int v = 2; v < nodes; ++v) place_parallels(v);
  }

  int other_end(const CircuitElement& e) const {
    return e.nodes[0] == e.creator ? e.nodes[1] : e.nodes[0];
  }

  // Parallel: the element does not create its right-hand node.
  bool is_parallel(int i) const {
    const auto& e = c.elements[i];
    if (is_transistor(e.ctype)) return false;
    int right = other_end(e);
    if (right == 0) return false;
    for (int j = 0; j < i; ++j) {
      const auto& f = c.elements[j];
      for (int v : f.nodes)
        if (v == right) return true;
    }
    return false;
  }

  int compute_height(int v) const {
    int sum = 0;
    for (int i : out_items[v]) {
      const auto& e = c.elements[i];
      if (is_transistor(e.ctype)) {
        sum += e.nodes[0] ? height[e.nodes[0]] : 1;
        sum += e.nodes[2] ? height[e.nodes[2]] : 1;
      } else {
        int right = other_end(e);
        sum += right ? height[right] : 1;
      }
    }
    return std::max(sum, incoming[v]);
  }

  void place(int v, int start) {
    block_start[v] = start;
    int cursor = start;
    for (int i : out_items[v]) {
      const auto& e = c.elements[i];
      if (is_transistor(e.ctype)) {
        int upper = e.nodes[0], lower = e.nodes[2];
        int k;
        if (upper) {
          place(upper, cursor);
          k = cursor + height[upper] - 1;
          creator_row[upper] = k;
          cursor += height[upper];
        } else {
          k = cursor++;
        }
        row_of[i] = k;
        if (lower) {
          place(lower, cursor);
          creator_row[lower] = cursor;
          cursor += height[lower];
        } else {
          ++cursor;
        }
      } else {
        int right = other_end(e);
        row_of[i] = cursor;
        if (right) {
          place(right, cursor);
          creator_row[right] = cursor;
          cursor += height[right];
        } else {
          ++cursor;
        }
      }
    }
  }

  void place_parallels(int v) {
    int next = block_start[v];
    for (std::size_t i = 0; i < c.elements.size(); ++i) {
      if (!is_parallel(static_cast<int>(i))) continue;
      const auto& e = c.elements[i];
      if (other_end(e) != v) continue;
      if (next == creator_row[v]) ++next;
      row_of[i] = next++;
      if (next == creator_row[v]) ++next;
    }
  }

  int rail_x(int v) const { return kMargin + depth[v] * kBand; }
};

struct Canvas {
  BinaryImage ink;
  std::vector<Segment> wires;
  std::vector<Component> comps;
  std::vector<TextBox> texts;

  void wire(Point a, Point b) {
    draw_stroke(ink, a, b);
    wires.push_back({a, b});
  }

  BBox stamp(const SymbolTemplate& t, Point origin) {
    for (Point p : t.ink) ink.set(origin.x + p.x, origin.y + p.y, true);
    Component comp;
    comp.ctype = t.ctype;
    comp.orientation = t.orientation;
    comp.bbox = {origin.x, origin.y, t.mask.width, t.mask.height};
    for (const auto& term : t.terminals)
      comp.terminals.push_back({term.role, {origin.x + term.anchor.x, origin.y + term.anchor.y}});
    comps.push_back(comp);
    return comp.bbox;
  }

  void ground_at(Point stub_start) {
    int xg = stub_start.x + kGroundReach;
    wire(stub_start, {xg, stub_start.y});
    wire({xg, stub_start.y}, {xg, stub_start.y + 4});
    const auto& g = SymbolLibrary::standard().get(ComponentType::Ground, 0);
    stamp(g, {xg - g.terminals[0].anchor.x, stub_start.y + 4});
  }

  void label(const BBox& box, const std::string& designator, const std::string& value) {
    std::u32string d = font::decode_utf8(designator), v = font::decode_utf8(value);
    int wd = font::word_width(d, kLabelScale), wv = font::word_width(v, kLabelScale);
    int total = wd + kLabelGap + wv;
    int x = box.x + box.w / 2 - total / 2;
    int y = box.y - kLabelLift - font::kGlyphH * kLabelScale;
    int id = static_cast<int>(texts.size());
    texts.push_back({id, designator, font::draw_word(ink, x, y, d, kLabelScale), 1.0});
    texts.push_back({id + 1, value, font::draw_word(ink, x + wd + kLabelGap, y, v, kLabelScale), 1.0});
  }
};

}  // namespace

GoldenSchematic render(const Circuit& circuit) {
  Layout lay(circuit);
  const auto& lib = SymbolLibrary::standard();
  int max_depth = *std::max_element(lay.depth.begin(), lay.depth.end());
  int rows = lay.height[1];
  int width = 2 * kMargin + (max_depth + 1) * kBand;
  int height = 2 * kMargin + (rows + 1) * kRow;

  GoldenSchematic g;
  g.seed = circuit.seed;
  g.circuit = circuit;
  Canvas cv{BinaryImage(width, height), {}, {}, {}};

  std::map<char, int> counters;
  for (const auto& e : circuit.elements) {
    char p = designator_prefix(e.ctype);
    g.designators.push_back(std::string(1, p) + std::to_string(++counters[p]));
  }

  // Connection heights on each rail.
  std::vector<std::vector<int>> taps(circuit.node_count);
  for (std::size_t i = 0; i < circuit.elements.size(); ++i) {
    const auto& e = circuit.elements[i];
    int r = lay.row_of[i];
    int xl = lay.rail_x(e.creator);
    int x0 = xl + kSymbolOffset;
    BBox box;
    if (is_transistor(e.ctype)) {
      int yk = row_y(r);
      const auto& t = lib.get(e.ctype, 0);
      box = cv.stamp(t, {x0, yk - 1});
      taps[e.creator].push_back(yk + kRow / 2);
      cv.wire({xl, yk + kRow / 2}, {x0 - 1, yk + kRow / 2});
      int right = x0 + t.mask.width;
      for (auto [node, y] : {std::pair{e.nodes[0], yk}, std::pair{e.nodes[2], yk + kRow}}) {
        if (node) {
          cv.wire({right, y}, {lay.rail_x(node), y});
          taps[node].push_back(y);
        } else {
          cv.ground_at({right, y});
        }
      }
    } else {
      int y = row_y(r);
      const auto& t = lib.get(e.ctype, e.orientation);
      const Terminal* left_term = nullptr;
      for (const auto& term : t.terminals)
        if (term.anchor.x == 0) left_term = &term;
      box = cv.stamp(t, {x0, y - left_term->anchor.y});
      int right = lay.other_end(e);
      taps[e.creator].push_back(y);
      cv.wire({xl, y}, {x0 - 1, y});
      int xr = x0 + t.mask.width;
      if (right) {
        cv.wire({xr, y}, {lay.rail_x(right), y});
        taps[right].push_back(y);
      } else {
        cv.ground_at({xr, y});
      }
    }
    cv.label(box, g.designators[i], e.label);
  }
  for (int v = 1; v < circuit.node_count; ++v) {
    auto [lo, hi] = std::minmax_element(taps[v].begin(), taps[v].end());
    if (*hi > *lo) cv.wire({lay.rail_x(v), *lo}, {lay.rail_x(v), *hi});
  }

  // Stable ids in (y, x) order, as ingest would assign them.
  std::stable_sort(cv.comps.begin(), cv.comps.end(), [](const Component& a, const Component& b) {
    return std::tie(a.bbox.y, a.bbox.x) < std::tie(b.bbox.y, b.bbox.x);
  });
  for (std::size_t i = 0; i < cv.comps.size(); ++i) cv.comps[i].id = static_cast<int>(i);

  for (std::size_t i = 0; i < circuit.elements.size(); ++i) {
    const auto& e = circuit.elements[i];
    Card card;
    card.designator = g.designators[i];
    card.ctype = e.ctype;
    for (int v : e.nodes) card.nodes.push_back(v == 0 ? "0" : "N" + std::to_string(v));
    if (e.ctype == ComponentType::Nmos || e.ctype == ComponentType::Pmos) card.nodes.push_back(card.nodes[2]);
    card.value = e.value;
    card.model = e.model;
    if (card.model) g.netlist.models[*card.model] = std::string(model_kind(e.ctype));
    g.netlist.cards.push_back(std::move(card));
  }
  sort_cards(g.netlist.cards);

  g.ink = std::move(cv.ink);
  g.image = to_gray(g.ink);
  g.detections = std::move(cv.comps);
  g.texts = std::move(cv.texts);
  g.wires = std::move(cv.wires);
  return g;
}

DegradeOptions corpus_degradation(std::uint64_t seed) {
  DegradeOptions d;
  d.gaps = 3;
  d.brightness = seed % 2 ? 32 : -32;
  d.flip = true;
  d.scale = 2;
  return d;
}

GrayImage degrade(const GoldenSchematic& g, const DegradeOptions& opts) {
  BinaryImage ink = g.ink;
  SplitMix64 rng(g.seed ^ 0x5DEECE66DULL);
  auto erase = [&](BBox b) {
    b = intersection(b, {0, 0, ink.width, ink.height});
    for (int y = b.y; y < b.bottom(); ++y)
      for (int x = b.x; x < b.right(); ++x) ink.set(x, y, false);
  };
  // Only horizontal leads carry notches: they have no junctions along their length.
  std::vector<const Segment*> leads;
  for (const auto& w : g.wires)
    if (w.a.y == w.b.y && std::abs(w.b.x - w.a.x) >= 9) leads.push_back(&w);
  for (int k = 0; k < opts.gaps && !leads.empty(); ++k) {
    const Segment& w = *leads[rng.below(leads.size())];
    int x0 = std::min(w.a.x, w.b.x) + 4, x1 = std::max(w.a.x, w.b.x) - 4;
    int x = rng.range(x0, x1);
    erase({x, w.a.y - 1, 1, 3});
  }
  if (opts.cut_wire) {
    if (*opts.cut_wire < 0 || *opts.cut_wire >= static_cast<int>(g.wires.size()))
      throw std::out_of_range("cut_wire index out of range");
    const Segment& w = g.wires[*opts.cut_wire];
    int cx = (w.a.x + w.b.x) / 2, cy = (w.a.y + w.b.y) / 2;
    if (w.a.y == w.b.y) erase({cx - 5, cy - 1, 10, 3});
    else erase({cx - 1, cy - 5, 3, 10});
  }
  if (opts.drop_value_of) {
    auto it = std::find(g.designators.begin(), g.designators.end(), *opts.drop_value_of);
    if (it == g.designators.end()) throw std::out_of_range("no component " + *opts.drop_value_of);
    for (std::size_t i = 0; i + 1 < g.texts.size(); ++i)
      if (g.texts[i].text == *opts.drop_value_of) erase(g.texts[i + 1].bbox);
  }
  GrayImage img = to_gray(ink);
  if (opts.flip) img = flip_horizontal(img);
  if (opts.scale > 1) img = upscale(img, opts.scale);
  if (opts.brightness)
    for (auto& p : img.data) p = static_cast<std::uint8_t>(std::clamp(static_cast<int>(p) + opts.brightness, 0, 255));
  return img;
}

GoldenSchematic synthesize(std::uint64_t seed, int n_components, const DegradeOptions& opts) {
  GoldenSchematic g = render(generate_circuit(seed, n_components));
  bool degraded = opts.gaps || opts.cut_wire || opts.drop_value_of || opts.brightness || opts.flip || opts.scale > 1;
  if (degraded) g.image = degrade(g, opts);
  return g;
}

void write_golden(const std::filesystem::path& dir, const GoldenSchematic& g) {
  std::filesystem::create_directories(dir);
  write_file(dir / "image.pgm", encode_pgm(g.image));
  std::string det = serialize_detections(g.detections, {g.ink.width, g.ink.height});
  write_file(dir / "detections.json", std::span(reinterpret_cast<const std::uint8_t*>(det.data()), det.size()));
  std::string txt = serialize_ocr(g.texts);
  write_file(dir / "texts.json", std::span(reinterpret_cast<const std::uint8_t*>(txt.data()), txt.size()));
  std::string cir = to_spice(g.netlist);
  write_file(dir / "golden.cir", std::span(reinterpret_cast<const std::uint8_t*>(cir.data()), cir.size()));
}

}  // namespace schemnet
