#include "schemnet/symbols.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace schemnet {

void draw_stroke(BinaryImage& img, Point a, Point b, int hw) {
  int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
  int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  int x = a.x, y = a.y;
  for (;;) {
    for (int oy = -hw; oy <= hw; ++oy)
      for (int ox = -hw; ox <= hw; ++ox)
        if (img.in_bounds(x + ox, y + oy)) img.set(x + ox, y + oy);
    if (x == b.x && y == b.y) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

namespace {

struct Shape {
  std::vector<Segment> strokes;
  std::vector<Terminal> terminals;  // ink-boundary points
};

void polyline(Shape& s, std::initializer_list<Point> pts) {
  const Point* prev = nullptr;
  for (const Point& p : pts) {
    if (prev) s.strokes.push_back({*prev, p});
    prev = &p;
  }
}

void arrowhead(Shape& s, Point tip, Point from, double len) {
  double vx = from.x - tip.x, vy = from.y - tip.y;
  double n = std::hypot(vx, vy);
  vx /= n;
  vy /= n;
  for (double ang : {0.5, -0.5}) {
    double rx = vx * std::cos(ang) - vy * std::sin(ang);
    double ry = vx * std::sin(ang) + vy * std::cos(ang);
    s.strokes.push_back({tip, {static_cast<int>(std::lround(tip.x + rx * len)),
                               static_cast<int>(std::lround(tip.y + ry * len))}});
  }
}

void circle(Shape& s, Point c, int r) {
  constexpr int kSides = 16;
  Point first{}, prev{};
  for (int i = 0; i <= kSides; ++i) {
    double a = 2 * M_PI * i / kSides;
    Point p{c.x + static_cast<int>(std::lround(r * std::cos(a))), c.y + static_cast<int>(std::lround(r * std::sin(a)))};
    if (i == 0) first = p;
    else s.strokes.push_back({prev, i == kSides ? first : p});
    prev = p;
  }
}

// Two-terminal symbols: centerline leads end at x=1 and x=46, y=12.
void two_leads(Shape& s, int left_end, int right_start) {
  polyline(s, {{1, 12}, {left_end, 12}});
  polyline(s, {{right_start, 12}, {46, 12}});
  s.terminals = {{TerminalRole::T1, {0, 12}}, {TerminalRole::T2, {47, 12}}};
}

// Three-terminal symbols: control lead at left (y=33), upper and lower leads exit right at y=1 and y=65.
void three_leads(Shape& s, TerminalRole upper, TerminalRole control, TerminalRole lower, int control_end) {
  polyline(s, {{1, 33}, {control_end, 33}});
  s.terminals = {{upper, {47, 1}}, {control, {0, 33}}, {lower, {47, 65}}};
}

Shape base_shape(ComponentType t) {
  Shape s;
  switch (t) {
    case ComponentType::Resistor:
      two_leads(s, 10, 37);
      polyline(s, {{10, 12}, {13, 5}, {18, 19}, {23, 5}, {28, 19}, {33, 5}, {37, 12}});
      break;
    case ComponentType::Capacitor:
      two_leads(s, 20, 27);
      polyline(s, {{20, 2}, {20, 22}});
      polyline(s, {{27, 2}, {27, 22}});
      break;
    case ComponentType::Inductor:
      two_leads(s, 8, 40);
      for (int a = 8; a < 40; a += 8) polyline(s, {{a, 12}, {a + 1, 7}, {a + 3, 5}, {a + 5, 5}, {a + 7, 7}, {a + 8, 12}});
      break;
    case ComponentType::Diode:
      two_leads(s, 16, 30);
      polyline(s, {{16, 3}, {16, 21}, {30, 12}, {16, 3}});
      polyline(s, {{30, 3}, {30, 21}});
      break;
    case ComponentType::VoltageSource:
      two_leads(s, 12, 36);
      circle(s, {24, 12}, 12);
      polyline(s, {{16, 12}, {20, 12}});
      polyline(s, {{18, 10}, {18, 14}});
      polyline(s, {{27, 12}, {31, 12}});
      break;
    case ComponentType::CurrentSource:
      two_leads(s, 12, 36);
      circle(s, {24, 12}, 12);
      polyline(s, {{16, 12}, {31, 12}});
      arrowhead(s, {31, 12}, {16, 12}, 6);
      break;
    case ComponentType::Npn:
    case ComponentType::Pnp:
      three_leads(s, TerminalRole::Collector, TerminalRole::Base, TerminalRole::Emitter, 16);
      polyline(s, {{16, 21}, {16, 45}});
      polyline(s, {{16, 27}, {30, 17}, {30, 1}, {46, 1}});
      polyline(s, {{16, 39}, {30, 49}, {30, 65}, {46, 65}});
      if (t == ComponentType::Npn) arrowhead(s, {29, 48}, {16, 39}, 7);
      else arrowhead(s, {18, 40}, {30, 49}, 7);
      break;
    case ComponentType::Nmos:
    case ComponentType::Pmos:
      three_leads(s, TerminalRole::Drain, TerminalRole::Gate, TerminalRole::Source, 13);
      polyline(s, {{13, 19}, {13, 47}});
      polyline(s, {{20, 17}, {20, 49}});
      polyline(s, {{20, 23}, {30, 23}, {30, 1}, {46, 1}});
      polyline(s, {{20, 43}, {30, 43}, {30, 65}, {46, 65}});
      if (t == ComponentType::Nmos) arrowhead(s, {29, 43}, {20, 43}, 5);
      else arrowhead(s, {22, 43}, {30, 43}, 5);
      break;
    case ComponentType::Ground:
      polyline(s, {{12, 1}, {12, 8}});
      polyline(s, {{1, 8}, {23, 8}});
      polyline(s, {{5, 13}, {19, 13}});
      polyline(s, {{9, 18}, {15, 18}});
      s.terminals = {{TerminalRole::Gnd, {12, 0}}};
      break;
  }
  return s;
}

Point rotate_cw(Point p, int quarter_turns) {
  for (int i = 0; i < quarter_turns; ++i) p = {-p.y, p.x};
  return p;
}

SymbolTemplate build(ComponentType t, int orientation) {
  Shape s = base_shape(t);
  SymbolTemplate tpl;
  tpl.ctype = t;
  tpl.orientation = orientation;
  int minx = 1 << 20, miny = 1 << 20, maxx = -(1 << 20), maxy = -(1 << 20);
  for (auto& seg : s.strokes) {
    seg = {rotate_cw(seg.a, orientation), rotate_cw(seg.b, orientation)};
    for (Point p : {seg.a, seg.b}) {
      minx = std::min(minx, p.x - 1);
      miny = std::min(miny, p.y - 1);
      maxx = std::max(maxx, p.x + 1);
      maxy = std::max(maxy, p.y + 1);
    }
  }
  for (auto& seg : s.strokes) {
    seg.a = {seg.a.x - minx, seg.a.y - miny};
    seg.b = {seg.b.x - minx, seg.b.y - miny};
  }
  for (auto& term : s.terminals) {
    Point p = rotate_cw(term.anchor, orientation);
    term.anchor = {p.x - minx, p.y - miny};
  }
  tpl.strokes = s.strokes;
  tpl.terminals = s.terminals;
  tpl.mask = BinaryImage(maxx - minx + 1, maxy - miny + 1);
  for (const auto& seg : tpl.strokes) draw_stroke(tpl.mask, seg.a, seg.b);
  for (int y = 0; y < tpl.mask.height; ++y)
    for (int x = 0; x < tpl.mask.width; ++x)
      if (tpl.mask.get(x, y)) tpl.ink.push_back({x, y});
  return tpl;
}

}  // namespace

SymbolLibrary::SymbolLibrary() {
  for (auto t : kAllTypes) {
    std::vector<SymbolTemplate> kept;
    for (int o = 0; o < 4; ++o) {
      SymbolTemplate tpl = build(t, o);
      bool dup = false;
      for (const auto& k : kept) dup = dup || k.mask == tpl.mask;
      if (!dup) kept.push_back(std::move(tpl));
    }
    for (auto& k : kept) templates_.push_back(std::move(k));
  }
}

const SymbolLibrary& SymbolLibrary::standard() {
  static const SymbolLibrary lib;
  return lib;
}

const SymbolTemplate& SymbolLibrary::get(ComponentType t, int orientation) const {
  const SymbolTemplate* fallback = nullptr;
  for (const auto& tpl : templates_) {
    if (tpl.ctype != t) continue;
    if (tpl.orientation == orientation) return tpl;
    // Dropped duplicates render identically to the 180° partner.
    if (tpl.orientation == (orientation + 2) % 4) fallback = &tpl;
  }
  if (fallback) return *fallback;
  throw std::out_of_range("no symbol template for orientation");
}

std::vector<int> SymbolLibrary::orientations(ComponentType t) const {
  std::vector<int> out;
  for (const auto& tpl : templates_)
    if (tpl.ctype == t) out.push_back(tpl.orientation);
  return out;
}

}  // namespace schemnet
