#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "schemnet/pipeline.hpp"

namespace schemnet {

nlohmann::json flag_json(const Flag& f);
nlohmann::json flags_json(const std::vector<Flag>& flags);
std::vector<Flag> parse_flags(std::string_view text);

nlohmann::json netlist_json(const Netlist& n);

nlohmann::json override_json(const Override& o);
// Throws IngestError with the JSON path of the first problem.
Override parse_override(const nlohmann::json& j, const std::string& path = "$");
std::vector<Override> parse_overrides(std::string_view text);
std::string serialize_overrides(const std::vector<Override>& list);

// Last writer wins per (target, action, role).
std::vector<Override> compact_overrides(const std::vector<Override>& log);

/// `<out>.flags.json` content: flags plus ingest warnings.
std::string flags_report(const ConvertResult& r);

/// Stage dumps for --dump-stage.
std::string stage_dump(const ConvertResult& r, std::string_view stage);
std::vector<std::string> stage_names();

}  // namespace schemnet
