#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "schemnet/netlist.hpp"
#include "schemnet/raster.hpp"
#include "schemnet/symbols.hpp"
#include "schemnet/text.hpp"

namespace schemnet {

inline constexpr int kMinComponents = 2;
inline constexpr int kMaxComponents = 20;

// Corpus convention: seed s carries 2 + s % 19 components.
inline int corpus_components(std::uint64_t seed) { return kMinComponents + static_cast<int>(seed % 19); }

struct CircuitElement {
  ComponentType ctype = ComponentType::Resistor;
  std::vector<int> nodes;  // canonical role order; 0 is ground, k > 0 is N<k>
  std::string label;       // value or model word as drawn
  std::optional<Value> value;
  std::optional<std::string> model;
  int orientation = 0;  // 0 or 2; 2 puts t1 on the right
  int creator = 0;      // node the element was attached from
};

struct Circuit {
  std::uint64_t seed = 0;
  int node_count = 1;         // including ground
  std::vector<int> parent;    // per node; -1 for ground and N1
  std::vector<CircuitElement> elements;
};

/// Deterministic random circuit: V1 from N1 to ground, then components attached
/// to pending nodes until every node has at least two elements.
Circuit generate_circuit(std::uint64_t seed, int n_components);

struct GoldenSchematic {
  std::uint64_t seed = 0;
  Circuit circuit;
  BinaryImage ink;
  GrayImage image;
  std::vector<Component> detections;
  std::vector<TextBox> texts;
  Netlist netlist;
  std::vector<Segment> wires;  // centerlines; wires[0] is the lead into V1 from its rail
  std::vector<std::string> designators;  // per circuit element
};

GoldenSchematic render(const Circuit& circuit);

struct DegradeOptions {
  int gaps = 0;                     // 1-px notches across random wires
  std::optional<int> cut_wire;      // erase the middle 10 px of this wire
  std::optional<std::string> drop_value_of;  // designator whose value label is erased
  int brightness = 0;
  bool flip = false;
  int scale = 1;
};

// Mix used for the degraded corpus.
DegradeOptions corpus_degradation(std::uint64_t seed);

GrayImage degrade(const GoldenSchematic& g, const DegradeOptions& opts);

GoldenSchematic synthesize(std::uint64_t seed, int n_components, const DegradeOptions& opts = {});

/// Writes image.pgm, detections.json, texts.json and golden.cir under `dir`.
void write_golden(const std::filesystem::path& dir, const GoldenSchematic& g);

}  // namespace schemnet
