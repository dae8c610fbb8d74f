#include "schemnet/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace schemnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int to_int(std::string_view key, std::string_view v, int lo, int hi) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || out < lo || out > hi)
    throw ConfigError(std::string(key) + ": expected integer in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "], got \"" + std::string(v) + "\"");
  return out;
}

double to_double(std::string_view key, std::string_view v, double lo, double hi) {
  std::string s(v);
  char* end = nullptr;
  double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !(out >= lo && out <= hi))
    throw ConfigError(std::string(key) + ": expected number in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "], got \"" + s + "\"");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got \"" + std::string(v) + "\"");
}

std::string num(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", d);
  return buf;
}

}  // namespace

std::vector<std::string> Config::keys() {
  return {"connectivity", "gap_radius", "mask_dilation", "min_area", "band", "max_bind_distance", "glyph_scale",
          "merge_gap", "min_ink_fraction", "iou_threshold", "normalize", "assist_url", "assist_timeout"};
}

void Config::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "connectivity") {
    int c = to_int(key, value, 4, 8);
    if (c != 4 && c != 8) throw ConfigError("connectivity: expected 4 or 8");
    connect.connectivity = c == 4 ? Connectivity::Four : Connectivity::Eight;
  } else if (key == "gap_radius") {
    connect.gap_radius = to_int(key, value, 0, 8);
  } else if (key == "mask_dilation") {
    connect.mask_dilation = to_int(key, value, 0, 16);
  } else if (key == "min_area") {
    connect.min_area = to_int(key, value, 1, 1 << 20);
  } else if (key == "band") {
    connect.band = to_int(key, value, 1, 32);
  } else if (key == "max_bind_distance") {
    bind.max_distance_factor = to_double(key, value, 0, 100);
  } else if (key == "glyph_scale") {
    glyph.scale = to_int(key, value, 1, 8);
  } else if (key == "merge_gap") {
    glyph.merge_gap_glyphs = to_double(key, value, 0, 10);
  } else if (key == "min_ink_fraction") {
    templates.min_ink_fraction = to_double(key, value, 0.5, 1);
  } else if (key == "iou_threshold") {
    iou_threshold = to_double(key, value, 1e-9, 1);
  } else if (key == "normalize") {
    normalize = to_bool(key, value);
  } else if (key == "assist_url") {
    assist_url = std::string(value);
  } else if (key == "assist_timeout") {
    assist_timeout_s = to_int(key, value, 1, 3600);
  } else {
    throw ConfigError("unknown config key \"" + std::string(key) + "\"");
  }
}

void Config::apply_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    auto eq = l.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    try {
      set(trim(l.substr(0, eq)), l.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string Config::to_text() const {
  std::ostringstream os;
  os << "connectivity=" << static_cast<int>(connect.connectivity) << "\n"
     << "gap_radius=" << connect.gap_radius << "\n"
     << "mask_dilation=" << connect.mask_dilation << "\n"
     << "min_area=" << connect.min_area << "\n"
     << "band=" << connect.band << "\n"
     << "max_bind_distance=" << num(bind.max_distance_factor) << "\n"
     << "glyph_scale=" << glyph.scale << "\n"
     << "merge_gap=" << num(glyph.merge_gap_glyphs) << "\n"
     << "min_ink_fraction=" << num(templates.min_ink_fraction) << "\n"
     << "iou_threshold=" << num(iou_threshold) << "\n"
     << "normalize=" << (normalize ? "true" : "false") << "\n"
     << "assist_url=" << assist_url << "\n"
     << "assist_timeout=" << assist_timeout_s << "\n";
  return os.str();
}

Config load_config_file(const std::string& path, Config base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  base.apply_text(ss.str());
  return base;
}

}  // namespace schemnet
