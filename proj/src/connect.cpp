#include "schemnet/connect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

namespace schemnet {

BinaryImage mask_components(const BinaryImage& img, const std::vector<Component>& comps, int dilation) {
  BinaryImage out = img;
  for (const auto& c : comps) {
    BBox b = intersection(c.bbox.expanded(std::max(dilation, 0)), {0, 0, img.width, img.height});
    for (int y = b.y; y < b.bottom(); ++y)
      for (int x = b.x; x < b.right(); ++x) out.set(x, y, false);
  }
  return out;
}

namespace {

long dist2(Point a, Point b) {
  long dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

bool yx_less(Point a, Point b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); }

// Clockwise perimeter coordinate starting at the top-left corner.
double perimeter_position(const BBox& b, Point p) {
  double x0 = b.x, y0 = b.y, x1 = b.right() - 1, y1 = b.bottom() - 1;
  double px = std::clamp<double>(p.x, x0, x1), py = std::clamp<double>(p.y, y0, y1);
  double d_top = std::abs(p.y - y0), d_right = std::abs(p.x - x1), d_bottom = std::abs(p.y - y1), d_left = std::abs(p.x - x0);
  double w = x1 - x0, h = y1 - y0;
  double m = std::min({d_top, d_right, d_bottom, d_left});
  if (m == d_top) return px - x0;
  if (m == d_right) return w + (py - y0);
  if (m == d_bottom) return w + h + (x1 - px);
  return 2 * w + h + (y1 - py);
}

Point clamp_to_perimeter(const BBox& b, Point p) {
  int x0 = b.x, y0 = b.y, x1 = b.right() - 1, y1 = b.bottom() - 1;
  int px = std::clamp(p.x, x0, x1), py = std::clamp(p.y, y0, y1);
  int dl = px - x0, dr = x1 - px, dt = py - y0, db = y1 - py;
  int m = std::min({dl, dr, dt, db});
  if (m == dt) py = y0;
  else if (m == dr) px = x1;
  else if (m == db) py = y1;
  else px = x0;
  return {px, py};
}

struct Contact {
  int label;
  int comp_idx;
  std::vector<Point> pixels;
};

}  // namespace

NetExtraction extract_nets(const LabelMap& labels, const std::vector<Component>& comps, int min_area, int band) {
  NetExtraction out;
  out.components = comps;
  const BBox frame{0, 0, labels.width, labels.height};

  // Ring pixels per (region, component).
  std::map<std::pair<int, int>, std::vector<Point>> ring;
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    BBox zone = intersection(comps[ci].bbox.expanded(band), frame);
    for (int y = zone.y; y < zone.bottom(); ++y)
      for (int x = zone.x; x < zone.right(); ++x) {
        int l = labels.at(x, y);
        if (l) ring[{l, static_cast<int>(ci)}].push_back({x, y});
      }
  }

  // Touchpoints per region.
  std::map<int, std::vector<Touchpoint>> region_tps;
  std::map<int, std::vector<std::pair<int, Point>>> unanchored;  // comp_idx -> (label, contact)
  for (auto& [key, pixels] : ring) {
    auto [label, ci] = key;
    if (labels.stats(label).area < min_area) continue;
    const Component& c = comps[ci];
    bool has_terms = !c.terminals.empty() && static_cast<int>(c.terminals.size()) == expected_terminals(c.ctype);
    if (has_terms) {
      std::map<int, Point> best;  // terminal index -> contact
      for (Point p : pixels) {
        int ti = 0;
        for (std::size_t k = 1; k < c.terminals.size(); ++k)
          if (dist2(p, c.terminals[k].anchor) < dist2(p, c.terminals[ti].anchor)) ti = static_cast<int>(k);
        auto it = best.find(ti);
        Point a = c.terminals[ti].anchor;
        if (it == best.end() || dist2(p, a) < dist2(it->second, a) ||
            (dist2(p, a) == dist2(it->second, a) && yx_less(p, it->second)))
          best[ti] = p;
      }
      for (auto [ti, p] : best) region_tps[label].push_back({c.id, c.terminals[ti].role, p});
    } else {
      double sx = 0, sy = 0;
      for (Point p : pixels) sx += p.x, sy += p.y;
      sx /= pixels.size();
      sy /= pixels.size();
      Point contact = pixels.front();
      double bd = std::numeric_limits<double>::max();
      for (Point p : pixels) {
        double d = std::hypot(p.x - sx, p.y - sy);
        if (d < bd) bd = d, contact = p;
      }
      unanchored[ci].push_back({label, contact});
    }
  }

  // Terminal synthesis for components without usable anchors.
  for (auto& [ci, list] : unanchored) {
    Component& c = out.components[ci];
    std::sort(list.begin(), list.end(), [&](const auto& a, const auto& b) {
      double pa = perimeter_position(c.bbox, a.second), pb = perimeter_position(c.bbox, b.second);
      if (pa != pb) return pa < pb;
      return a.first < b.first;
    });
    auto roles = canonical_roles(c.ctype);
    if (list.size() != roles.size() || (!c.terminals.empty() && c.terminals.size() != roles.size())) {
      add_flag(out.flags, {FlagKind::TerminalCountMismatch, component_subject(c.id), "",
                           std::string(type_name(c.ctype)) + " expects " + std::to_string(roles.size()) +
                               " terminals, found " + std::to_string(list.size()) + " wire contacts",
                           std::nullopt});
    }
    c.terminals.clear();
    for (std::size_t k = 0; k < list.size() && k < roles.size(); ++k) {
      Point anchor = clamp_to_perimeter(c.bbox, list[k].second);
      c.terminals.push_back({roles[k], anchor});
      region_tps[list[k].first].push_back({c.id, roles[k], list[k].second});
    }
  }
  std::vector<int> is_ground(comps.size() + 1, 0);
  std::map<int, int> idx_of;
  for (std::size_t ci = 0; ci < comps.size(); ++ci) idx_of[comps[ci].id] = static_cast<int>(ci);

  for (int label = 1; label <= labels.region_count; ++label) {
    const auto& st = labels.stats(label);
    if (st.area < min_area) continue;
    auto& tps = region_tps[label];
    std::sort(tps.begin(), tps.end(), [](const Touchpoint& a, const Touchpoint& b) {
      return std::tie(a.component, a.role) < std::tie(b.component, b.role);
    });
    std::set<int> touched;
    bool ground = false;
    for (const auto& tp : tps) {
      touched.insert(tp.component);
      ground = ground || comps[idx_of[tp.component]].ctype == ComponentType::Ground;
    }
    if (touched.size() < 2 && !ground) {
      if (touched.size() == 1) {
        for (const auto& tp : tps)
          add_flag(out.flags, {FlagKind::DanglingTerminal, component_subject(tp.component), std::string(role_name(tp.role)),
                               "wire at terminal " + std::string(role_name(tp.role)) + " reaches no other component",
                               std::nullopt});
      }
      continue;
    }
    WireNet net;
    net.region_labels = {label};
    net.pixel_bbox = st.bbox;
    net.area = st.area;
    net.touchpoints = tps;
    net.anchor = st.representative;
    out.nets.push_back(std::move(net));
  }
  std::sort(out.nets.begin(), out.nets.end(), [](const WireNet& a, const WireNet& b) { return yx_less(a.anchor, b.anchor); });
  for (std::size_t i = 0; i < out.nets.size(); ++i) out.nets[i].net_id = static_cast<int>(i);
  return out;
}

std::vector<WireNet> merge_equipotential(const std::vector<WireNet>& nets, const std::vector<Component>& comps) {
  std::set<int> grounds;
  for (const auto& c : comps)
    if (c.ctype == ComponentType::Ground) grounds.insert(c.id);
  std::vector<WireNet> out;
  WireNet merged;
  bool any = false;
  for (const auto& n : nets) {
    bool touches = n.ground || std::any_of(n.touchpoints.begin(), n.touchpoints.end(),
                                           [&](const Touchpoint& t) { return grounds.count(t.component) > 0; });
    if (!touches) {
      out.push_back(n);
      continue;
    }
    if (!any) {
      merged = n;
      merged.touchpoints.clear();
      merged.ground = true;
      any = true;
    } else {
      merged.region_labels.insert(merged.region_labels.end(), n.region_labels.begin(), n.region_labels.end());
      merged.pixel_bbox = bbox_union(merged.pixel_bbox, n.pixel_bbox);
      merged.area += n.area;
      if (yx_less(n.anchor, merged.anchor)) merged.anchor = n.anchor;
    }
    for (const auto& t : n.touchpoints)
      if (!grounds.count(t.component)) merged.touchpoints.push_back(t);
  }
  if (any) {
    std::sort(merged.region_labels.begin(), merged.region_labels.end());
    std::sort(merged.touchpoints.begin(), merged.touchpoints.end(), [](const Touchpoint& a, const Touchpoint& b) {
      return std::tie(a.component, a.role, a.contact.y, a.contact.x) < std::tie(b.component, b.role, b.contact.y, b.contact.x);
    });
    out.push_back(std::move(merged));
  }
  std::sort(out.begin(), out.end(), [](const WireNet& a, const WireNet& b) { return yx_less(a.anchor, b.anchor); });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].net_id = static_cast<int>(i);
  return out;
}

TerminalMapping map_terminals(const std::vector<WireNet>& nets, const std::vector<Component>& comps, int band) {
  TerminalMapping res;
  NodeMap& nm = res.nodemap;
  nm.nets = nets;
  int next = 1;
  for (const auto& n : nets) nm.names[n.net_id] = n.ground ? "0" : "N" + std::to_string(next++);

  for (const auto& c : comps) {
    if (!emits_card(c.ctype)) continue;
    auto& binding = nm.bindings[c.id];
    for (TerminalRole role : canonical_roles(c.ctype)) {
      const Terminal* term = nullptr;
      for (const auto& t : c.terminals)
        if (t.role == role) term = &t;
      const WireNet* best_net = nullptr;
      long best_d = std::numeric_limits<long>::max();
      for (const auto& n : nets)
        for (const auto& tp : n.touchpoints) {
          if (tp.component != c.id || tp.role != role) continue;
          long d = term ? dist2(tp.contact, term->anchor) : 0;
          if (d < best_d) best_d = d, best_net = &n;
        }
      long limit = 4L * band * band;
      if (best_net && (!term || best_d <= limit)) {
        binding.emplace_back(role, nm.names[best_net->net_id]);
      } else {
        add_flag(res.flags, {FlagKind::DanglingTerminal, component_subject(c.id), std::string(role_name(role)),
                             "terminal " + std::string(role_name(role)) + " is not connected to any net", std::nullopt});
      }
    }
  }
  return res;
}

ConnectResult infer_connectivity(const BinaryImage& img, const std::vector<Component>& comps, const ConnectOptions& opts) {
  ConnectResult res;
  BinaryImage closed = close_gaps(img, opts.gap_radius);
  BinaryImage wiring = mask_components(closed, comps, opts.mask_dilation);
  res.labels = label_components(wiring, opts.connectivity);
  NetExtraction ex = extract_nets(res.labels, comps, opts.min_area, opts.band);
  res.components = ex.components;
  res.flags = ex.flags;
  auto merged = merge_equipotential(ex.nets, res.components);
  TerminalMapping tm = map_terminals(merged, res.components, opts.band);
  res.nodemap = std::move(tm.nodemap);
  for (auto& f : tm.flags) add_flag(res.flags, std::move(f));
  return res;
}

std::string serialize_nets(const NodeMap& nm) {
  using nlohmann::json;
  json nets = json::array();
  for (const auto& n : nm.nets) {
    json tps = json::array();
    for (const auto& t : n.touchpoints)
      tps.push_back({{"component", t.component}, {"role", role_name(t.role)}, {"xy", {t.contact.x, t.contact.y}}});
    nets.push_back({{"net_id", n.net_id},
                    {"name", nm.names.at(n.net_id)},
                    {"area", n.area},
                    {"bbox", {n.pixel_bbox.x, n.pixel_bbox.y, n.pixel_bbox.w, n.pixel_bbox.h}},
                    {"anchor", {n.anchor.x, n.anchor.y}},
                    {"touchpoints", tps}});
  }
  json bindings = json::object();
  for (const auto& [id, list] : nm.bindings) {
    json b = json::array();
    for (const auto& [role, name] : list) b.push_back({{"role", role_name(role)}, {"node", name}});
    bindings[std::to_string(id)] = b;
  }
  return json{{"nets", nets}, {"bindings", bindings}}.dump(2) + "\n";
}

}  // namespace schemnet
