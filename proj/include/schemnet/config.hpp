#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "schemnet/connect.hpp"
#include "schemnet/detect.hpp"
#include "schemnet/text.hpp"

namespace schemnet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  ConnectOptions connect;
  BindOptions bind;
  GlyphOptions glyph;
  TemplateOptions templates;
  double iou_threshold = 0.5;
  bool normalize = true;
  std::string assist_url;
  int assist_timeout_s = 30;

  // Sets one key; throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  // Applies a flat key=value text ('#' starts a comment).
  void apply_text(std::string_view text);
  // Effective configuration as key=value lines in a fixed key order.
  std::string to_text() const;
  static std::vector<std::string> keys();
};

Config load_config_file(const std::string& path, Config base = {});

}  // namespace schemnet
