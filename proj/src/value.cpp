#include "schemnet/value.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace schemnet {

double multiplier_factor(Multiplier m) {
  switch (m) {
    case Multiplier::Pico: return 1e-12;
    case Multiplier::Nano: return 1e-9;
    case Multiplier::Micro: return 1e-6;
    case Multiplier::Milli: return 1e-3;
    case Multiplier::One: return 1.0;
    case Multiplier::Kilo: return 1e3;
    case Multiplier::Mega: return 1e6;
    case Multiplier::Giga: return 1e9;
  }
  return 1.0;
}

std::string_view multiplier_suffix(Multiplier m) {
  switch (m) {
    case Multiplier::Pico: return "p";
    case Multiplier::Nano: return "n";
    case Multiplier::Micro: return "u";
    case Multiplier::Milli: return "m";
    case Multiplier::One: return "";
    case Multiplier::Kilo: return "k";
    case Multiplier::Mega: return "Meg";
    case Multiplier::Giga: return "G";
  }
  return "";
}

std::string format_value(const Value& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v.magnitude);
  return std::string(buf) + std::string(multiplier_suffix(v.mult));
}

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) return false;
  return true;
}

bool is_unit_word(std::string_view s) {
  static constexpr std::string_view kUnits[] = {"\xCE\xA9", "Ohm", "ohm", "OHM", "F", "H", "V", "A"};
  for (auto u : kUnits)
    if (s == u) return true;
  return false;
}

}  // namespace

ValueParse parse_value(std::string_view s, ValueDialect dialect) {
  ValueParse out;
  std::size_t i = 0;
  bool digits = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, digits = true;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, digits = true;
  }
  if (!digits) return out;
  // Optional exponent only in SPICE text.
  if (dialect == ValueDialect::Spice && i < s.size() && (s[i] == 'e' || s[i] == 'E') && i + 1 < s.size() &&
      (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '-' || s[i + 1] == '+')) {
    std::size_t j = i + 1;
    if (s[j] == '-' || s[j] == '+') ++j;
    if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      i = j;
    }
  }
  std::string number(s.substr(0, i));
  double magnitude = std::strtod(number.c_str(), nullptr);
  std::string_view rest = s.substr(i);

  Multiplier mult = Multiplier::One;
  if (starts_with_ci(rest, "meg")) {
    mult = Multiplier::Mega;
    rest.remove_prefix(3);
  } else if (!rest.empty()) {
    std::string_view micro = "\xC2\xB5";  // µ
    char c = rest[0];
    std::size_t used = 1;
    if (rest.substr(0, 2) == micro) {
      mult = Multiplier::Micro;
      used = 2;
    } else if (c == 'p' || c == 'P') {
      mult = Multiplier::Pico;
    } else if (c == 'n' || c == 'N') {
      mult = Multiplier::Nano;
    } else if (c == 'u' || c == 'U') {
      mult = Multiplier::Micro;
    } else if (c == 'k' || c == 'K') {
      mult = Multiplier::Kilo;
    } else if (c == 'g' || c == 'G') {
      mult = Multiplier::Giga;
    } else if (c == 'm') {
      mult = Multiplier::Milli;
    } else if (c == 'M') {
      if (dialect == ValueDialect::Label) {
        out.ambiguous = true;
        return out;
      }
      mult = Multiplier::Milli;
    } else {
      used = 0;
    }
    rest.remove_prefix(used);
  }
  if (!rest.empty()) {
    if (dialect == ValueDialect::Label) {
      if (!is_unit_word(rest)) return out;
    } else {
      // SPICE ignores trailing unit letters.
      for (char c : rest)
        if (!std::isalpha(static_cast<unsigned char>(c))) return out;
    }
  }
  if (!(magnitude > 0)) return out;
  out.value = Value{magnitude, mult};
  return out;
}

bool values_close(double a, double b, double rel) {
  double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= rel * scale;
}

}  // namespace schemnet
