#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "schemnet/raster.hpp"
#include "schemnet/types.hpp"

namespace schemnet {

struct Touchpoint {
  int component = 0;
  TerminalRole role = TerminalRole::T1;
  Point contact;
  friend bool operator==(const Touchpoint&, const Touchpoint&) = default;
};

struct WireNet {
  int net_id = 0;
  std::vector<int> region_labels;
  BBox pixel_bbox;
  long area = 0;
  std::vector<Touchpoint> touchpoints;
  Point anchor;         // lexicographically smallest (y, x) pixel
  bool ground = false;  // merged equipotential ground net
};

struct NodeMap {
  std::vector<WireNet> nets;
  std::map<int, std::string> names;  // net_id -> node name
  std::map<int, std::vector<std::pair<TerminalRole, std::string>>> bindings;  // component id -> canonical order
};

struct ConnectOptions {
  Connectivity connectivity = Connectivity::Eight;
  int gap_radius = 1;
  int mask_dilation = 2;
  int min_area = 15;
  int band = 3;
};

/// Clears every component box grown by `dilation` on each side.
BinaryImage mask_components(const BinaryImage& img, const std::vector<Component>& comps, int dilation);

struct NetExtraction {
  std::vector<WireNet> nets;
  std::vector<Component> components;  // input with synthesized terminals filled in
  std::vector<Flag> flags;
};

NetExtraction extract_nets(const LabelMap& labels, const std::vector<Component>& comps, int min_area, int band);
std::vector<WireNet> merge_equipotential(const std::vector<WireNet>& nets, const std::vector<Component>& comps);

struct TerminalMapping {
  NodeMap nodemap;
  std::vector<Flag> flags;
};

TerminalMapping map_terminals(const std::vector<WireNet>& nets, const std::vector<Component>& comps, int band);

struct ConnectResult {
  NodeMap nodemap;
  std::vector<Component> components;
  std::vector<Flag> flags;
  LabelMap labels;  // kept for debug dumps
};

/// Full wiring stage: close gaps, mask, label, extract, merge, map.
ConnectResult infer_connectivity(const BinaryImage& img, const std::vector<Component>& comps,
                                 const ConnectOptions& opts = {});

std::string serialize_nets(const NodeMap& nm);

}  // namespace schemnet
