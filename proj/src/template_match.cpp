#include <algorithm>
#include <cmath>
#include <cstdint>

#include "schemnet/detect.hpp"
#include "schemnet/symbols.hpp"

namespace schemnet {

namespace {

struct Candidate {
  double score;
  const SymbolTemplate* tpl;
  Point pos;
};

class IntegralImage {
 public:
  explicit IntegralImage(const BinaryImage& img) : w_(img.width + 1), sums_(static_cast<std::size_t>(w_) * (img.height + 1), 0) {
    for (int y = 0; y < img.height; ++y) {
      std::int32_t row = 0;
      for (int x = 0; x < img.width; ++x) {
        row += img.get(x, y);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }
  std::int32_t sum(int x, int y, int w, int h) const {
    return at(x + w, y + h) - at(x, y + h) - at(x + w, y) + at(x, y);
  }

 private:
  std::int32_t& at(int x, int y) { return sums_[static_cast<std::size_t>(y) * w_ + x]; }
  std::int32_t at(int x, int y) const { return sums_[static_cast<std::size_t>(y) * w_ + x]; }
  int w_;
  std::vector<std::int32_t> sums_;
};

// Visits ink in a strided order so early exit sees pixels spread across the symbol.
std::vector<Point> probe_order(const std::vector<Point>& ink) {
  std::vector<Point> out;
  out.reserve(ink.size());
  constexpr std::size_t kStride = 7;
  for (std::size_t start = 0; start < kStride; ++start)
    for (std::size_t i = start; i < ink.size(); i += kStride) out.push_back(ink[i]);
  return out;
}

}  // namespace

std::vector<Component> detect_template(const BinaryImage& img, const SymbolLibrary& library,
                                       const TemplateOptions& opts) {
  std::vector<Candidate> cands;
  IntegralImage integral(img);
  std::vector<Point> fg;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.get(x, y)) fg.push_back({x, y});

  std::vector<std::uint8_t> visited(img.bits.size());
  for (const auto& tpl : library.templates()) {
    const int n = static_cast<int>(tpl.ink.size());
    const int allowed = static_cast<int>(n - std::ceil(opts.min_ink_fraction * n - 1e-9));
    const int tw = tpl.mask.width, th = tpl.mask.height;
    if (tw > img.width || th > img.height) continue;
    auto probes = probe_order(tpl.ink);
    std::fill(visited.begin(), visited.end(), 0);
    for (Point anchor : {tpl.ink.front(), tpl.ink.back()}) {
      for (Point p : fg) {
        int px = p.x - anchor.x, py = p.y - anchor.y;
        if (px < 0 || py < 0 || px + tw > img.width || py + th > img.height) continue;
        auto& seen = visited[static_cast<std::size_t>(py) * img.width + px];
        if (seen) continue;
        seen = 1;
        if (integral.sum(px, py, tw, th) < n - allowed) continue;
        int misses = 0;
        for (Point q : probes) {
          if (!img.get(px + q.x, py + q.y) && ++misses > allowed) break;
        }
        if (misses > allowed) continue;
        cands.push_back({static_cast<double>(n - misses) / n, &tpl, {px, py}});
      }
    }
  }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tpl->ink.size() != b.tpl->ink.size()) return a.tpl->ink.size() > b.tpl->ink.size();
    return std::tie(a.pos.y, a.pos.x) < std::tie(b.pos.y, b.pos.x);
  });
  std::vector<Component> out;
  for (const auto& c : cands) {
    BBox box{c.pos.x, c.pos.y, c.tpl->mask.width, c.tpl->mask.height};
    bool blocked = std::any_of(out.begin(), out.end(), [&](const Component& k) { return k.bbox.intersects(box); });
    if (blocked) continue;
    Component comp;
    comp.ctype = c.tpl->ctype;
    comp.bbox = box;
    comp.confidence = c.score;
    comp.orientation = c.tpl->orientation;
    for (const auto& t : c.tpl->terminals) comp.terminals.push_back({t.role, {c.pos.x + t.anchor.x, c.pos.y + t.anchor.y}});
    out.push_back(std::move(comp));
  }
  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    return std::tie(a.bbox.y, a.bbox.x) < std::tie(b.bbox.y, b.bbox.x);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

}  // namespace schemnet
