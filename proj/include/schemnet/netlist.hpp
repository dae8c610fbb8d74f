#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "schemnet/connect.hpp"
#include "schemnet/text.hpp"
#include "schemnet/types.hpp"
#include "schemnet/value.hpp"

namespace schemnet {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error(msg + " at line " + std::to_string(line)), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmissionError : public std::runtime_error {
 public:
  EmissionError(const std::string& msg, std::vector<std::string> flag_ids)
      : std::runtime_error(msg), flag_ids_(std::move(flag_ids)) {}
  const std::vector<std::string>& flag_ids() const { return flag_ids_; }

 private:
  std::vector<std::string> flag_ids_;
};

struct Card {
  std::string designator;
  ComponentType ctype = ComponentType::Resistor;
  std::vector<std::string> nodes;  // canonical terminal order; MOS bulk appended
  std::optional<Value> value;
  std::optional<std::string> model;

  friend bool operator==(const Card&, const Card&) = default;
};

struct Netlist {
  std::string title = "generated netlist";
  std::vector<Card> cards;
  std::map<std::string, std::string> models;  // name -> SPICE model kind (D, NPN, PNP, NMOS, PMOS)

  friend bool operator==(const Netlist&, const Netlist&) = default;
};

// "D" "NPN" "PNP" "NMOS" "PMOS" for model-carrying types, empty otherwise.
std::string_view model_kind(ComponentType t);
bool carries_model(ComponentType t);

struct Assignment {
  int component_id = 0;
  char prefix = 'R';
  int index = 0;
  std::optional<Value> value;        // R C L V I
  std::optional<std::string> model;  // D Q M

  std::string designator() const { return std::string(1, prefix) + std::to_string(index); }
};

struct AssignResult {
  std::vector<Assignment> assignments;  // in component order
  std::vector<Flag> flags;
};

/// Rule engine: keeps bound designators whose prefix fits, numbers the rest,
/// and fills type defaults for missing values.
AssignResult assign_designators(const std::vector<Component>& comps, const std::vector<LabelBinding>& bindings,
                                const std::vector<TextBox>& texts);

Value default_value(ComponentType t);
std::string default_model(ComponentType t);

struct EmitOptions {
  bool force = false;  // dangling terminals get unique NC nodes
};

/// Builds the netlist. Throws EmissionError on unresolved dangling terminals unless forced.
Netlist build_netlist(const std::vector<Component>& comps, const NodeMap& nodemap,
                      const std::vector<Assignment>& assignments, const std::vector<Flag>& flags,
                      const EmitOptions& opts = {});

void sort_cards(std::vector<Card>& cards);
std::string to_spice(const Netlist& n);
Netlist parse_netlist(std::string_view text);

struct EquivalenceOptions {
  bool compare_values = true;        // values and model names
  bool compare_designators = false;  // designator strings must match too
};

struct EquivalenceResult {
  bool equivalent = false;
  std::optional<std::map<std::string, std::string>> node_mapping;
  std::optional<std::string> mismatch_reason;
};

inline constexpr int kMaxNodes = 64;

EquivalenceResult netlists_equivalent(const Netlist& a, const Netlist& b, const EquivalenceOptions& opts = {});

struct CommonSubset {
  int matched = 0;
  bool exact = true;  // false when the search hit its step cap
};

/// Largest number of cards of `a` reproduced in `b` under one injective node mapping.
CommonSubset max_common_cards(const Netlist& a, const Netlist& b, const EquivalenceOptions& opts = {},
                              long step_cap = 2'000'000);

}  // namespace schemnet
