#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schemnet/config.hpp"
#include "schemnet/connect.hpp"
#include "schemnet/detect.hpp"
#include "schemnet/netlist.hpp"
#include "schemnet/raster.hpp"
#include "schemnet/text.hpp"

namespace schemnet {

enum class OverrideAction { SetType, SetDesignator, SetValue, BindTerminal, Accept };

std::string_view override_action_name(OverrideAction a);
std::optional<OverrideAction> parse_override_action(std::string_view s);

/// A reviewer decision. `target` is a component subject ("c3") or a flag id.
struct Override {
  std::string target;
  OverrideAction action = OverrideAction::Accept;
  std::string value;                  // type name, designator, value or node name
  std::optional<TerminalRole> role;   // bind_terminal only

  // Key for last-writer-wins replay.
  std::string slot() const;
};

// Component id named by a target ("c3" or "kind:c3[:key]"), if any.
std::optional<int> target_component(std::string_view target);

struct ConvertInput {
  GrayImage image;
  std::optional<std::string> detections_json;
  std::optional<std::string> ocr_json;
  std::vector<Override> overrides;
  bool force = false;
  std::string assist_api_key;
};

struct ConvertResult {
  ImageDims dims;  // working image after normalization
  int scale = 1;
  bool flipped = false;
  BinaryImage binary;
  std::vector<Component> components;
  std::vector<TextBox> texts;
  NodeMap nodemap;
  std::vector<LabelBinding> bindings;
  std::vector<Assignment> assignments;
  std::vector<Flag> flags;
  std::optional<Netlist> netlist;
  std::string emission_error;
  std::optional<double> concordance;
  std::vector<std::string> warnings;
  std::vector<std::string> assist_log;

  int unresolved() const;
  // 0 when a netlist was emitted and every flag is resolved, else 2.
  int exit_code() const;
};

/// Runs every stage: binarize, normalize, detect, read text, connect, bind,
/// assign, optional assist, overrides, emit.
ConvertResult convert(const ConvertInput& in, const Config& cfg);

/// Empty when the override can apply to `current`, else the reason.
std::string validate_override(const Override& o, const ConvertResult& current);

}  // namespace schemnet
