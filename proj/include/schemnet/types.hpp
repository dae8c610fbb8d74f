#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemnet/geometry.hpp"

namespace schemnet {

enum class ComponentType {
  Resistor,
  Capacitor,
  Inductor,
  Diode,
  VoltageSource,
  CurrentSource,
  Npn,
  Pnp,
  Nmos,
  Pmos,
  Ground,
};

inline constexpr std::array<ComponentType, 11> kAllTypes = {
    ComponentType::Resistor, ComponentType::Capacitor,     ComponentType::Inductor, ComponentType::Diode,
    ComponentType::VoltageSource, ComponentType::CurrentSource, ComponentType::Npn, ComponentType::Pnp,
    ComponentType::Nmos,     ComponentType::Pmos,          ComponentType::Ground};

// The ten types that produce netlist cards.
inline constexpr std::array<ComponentType, 10> kCardTypes = {
    ComponentType::Resistor, ComponentType::Capacitor,     ComponentType::Inductor, ComponentType::Diode,
    ComponentType::VoltageSource, ComponentType::CurrentSource, ComponentType::Npn, ComponentType::Pnp,
    ComponentType::Nmos,     ComponentType::Pmos};

enum class TerminalRole { T1, T2, Collector, Base, Emitter, Drain, Gate, Source, Gnd };

std::string_view type_name(ComponentType t);
std::optional<ComponentType> parse_type(std::string_view s);
std::string_view role_name(TerminalRole r);
std::optional<TerminalRole> parse_role(std::string_view s);

/// Canonical terminal order: t1,t2 / collector,base,emitter / drain,gate,source / gnd.
std::span<const TerminalRole> canonical_roles(ComponentType t);
inline int expected_terminals(ComponentType t) { return static_cast<int>(canonical_roles(t).size()); }
inline bool emits_card(ComponentType t) { return t != ComponentType::Ground; }
// Designator prefix letter: R C L D V I Q M ('\0' for ground).
char designator_prefix(ComponentType t);
// Whether a card's two nodes may be swapped without changing the circuit.
inline bool is_unpolarized(ComponentType t) {
  return t == ComponentType::Resistor || t == ComponentType::Capacitor || t == ComponentType::Inductor;
}

struct Terminal {
  TerminalRole role;
  Point anchor;
  friend bool operator==(const Terminal&, const Terminal&) = default;
};

struct Component {
  int id = 0;
  ComponentType ctype = ComponentType::Resistor;
  BBox bbox;
  double confidence = 1.0;
  std::vector<Terminal> terminals;  // empty until known
  int orientation = 0;              // quarter turns clockwise; template backend only

  friend bool operator==(const Component&, const Component&) = default;
};

enum class FlagKind {
  TypeCountMismatch,
  TerminalCountMismatch,
  UnboundText,
  PrefixConflict,
  DanglingTerminal,
  MissingValue,
};

std::string_view flag_kind_name(FlagKind k);
std::optional<FlagKind> parse_flag_kind(std::string_view s);

struct Flag {
  FlagKind kind;
  std::string subject;  // "c<id>", "n<id>", "t<id>" or a type name
  std::string key;      // disambiguates several flags on one subject (e.g. terminal role)
  std::string detail;
  std::optional<std::string> resolution;

  std::string id() const;
  bool resolved() const { return resolution.has_value(); }
};

inline std::string component_subject(int id) { return "c" + std::to_string(id); }
inline std::string text_subject(int id) { return "t" + std::to_string(id); }

// Appends `f` unless a flag with the same id is already present.
void add_flag(std::vector<Flag>& flags, Flag f);

}  // namespace schemnet
