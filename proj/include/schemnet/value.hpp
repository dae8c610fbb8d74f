#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace schemnet {

enum class Multiplier { Pico, Nano, Micro, Milli, One, Kilo, Mega, Giga };

double multiplier_factor(Multiplier m);
std::string_view multiplier_suffix(Multiplier m);  // "p" "n" "u" "m" "" "k" "Meg" "G"

struct Value {
  double magnitude = 0;
  Multiplier mult = Multiplier::One;

  double base() const { return magnitude * multiplier_factor(mult); }
  friend bool operator==(const Value&, const Value&) = default;
};

std::string format_value(const Value& v);

enum class ValueDialect {
  // Schematic labels: "M" alone is ambiguous, unit words allowed.
  Label,
  // SPICE cards: m/M = milli, MEG = mega, case-insensitive.
  Spice,
};

struct ValueParse {
  std::optional<Value> value;
  bool ambiguous = false;  // bare "M" in label dialect
};

ValueParse parse_value(std::string_view s, ValueDialect dialect);

// Relative comparison used by netlist equivalence.
bool values_close(double a, double b, double rel = 1e-9);

}  // namespace schemnet
