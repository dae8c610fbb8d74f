#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "schemnet/config.hpp"
#include "schemnet/detect.hpp"
#include "schemnet/json_io.hpp"
#include "schemnet/pipeline.hpp"

using namespace schemnet;

TEST_CASE("config defaults and setters") {
  Config c;
  CHECK(c.connect.connectivity == Connectivity::Eight);
  CHECK(c.connect.gap_radius == 1);
  CHECK(c.iou_threshold == 0.5);
  c.set("connectivity", "4");
  c.set("band", " 5 ");
  c.set("normalize", "false");
  CHECK(c.connect.connectivity == Connectivity::Four);
  CHECK(c.connect.band == 5);
  CHECK_FALSE(c.normalize);
  CHECK_THROWS_AS(c.set("bogus", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("connectivity", "6"), ConfigError);
  CHECK_THROWS_AS(c.set("band", "x"), ConfigError);
  CHECK_THROWS_AS(c.set("iou_threshold", "2"), ConfigError);
}

TEST_CASE("config text round trip") {
  Config c;
  c.apply_text("# comment\ngap_radius = 2\n\nmin_area=20\n");
  CHECK(c.connect.gap_radius == 2);
  CHECK(c.connect.min_area == 20);
  Config d;
  d.apply_text(c.to_text());
  CHECK(d.to_text() == c.to_text());
  for (auto& k : Config::keys()) CHECK(c.to_text().find(k + "=") != std::string::npos);
  CHECK_THROWS_AS(c.apply_text("nonsense line"), ConfigError);
  CHECK_THROWS_AS(c.apply_text("color=blue"), ConfigError);
}

TEST_CASE("config file layering") {
  auto path = std::filesystem::temp_directory_path() / "schemnet_cfg_test.conf";
  std::ofstream(path) << "band=4\n";
  Config base;
  base.set("min_area", "30");
  auto c = load_config_file(path.string(), base);
  CHECK(c.connect.band == 4);
  CHECK(c.connect.min_area == 30);
  std::filesystem::remove(path);
  CHECK_THROWS(load_config_file("/nonexistent/schemnet.conf"));
}

TEST_CASE("flag json round trip") {
  std::vector<Flag> flags = {{FlagKind::DanglingTerminal, "c2", "t1", "wire ends", std::nullopt},
                             {FlagKind::TypeCountMismatch, "resistor", "", "3 vs 2", std::string("accepted")}};
  auto j = flags_json(flags);
  CHECK(j[0]["id"] == "dangling_terminal:c2:t1");
  CHECK(j[1]["id"] == "type_count_mismatch:resistor");
  CHECK(j[0]["resolution"].is_null());
  auto back = parse_flags(j.dump());
  REQUIRE(back.size() == 2);
  CHECK(back[0].id() == flags[0].id());
  CHECK(back[1].resolution == "accepted");
}

TEST_CASE("override parsing") {
  auto list = parse_overrides(R"([
    {"target": "c3", "action": "set_type", "payload": "resistor"},
    {"flag": "dangling_terminal:c1:t2", "action": "accept"},
    {"component": 4, "action": "bind_terminal", "payload": {"role": "t1", "node": "N2"}},
    {"target": "c0", "action": "set_value", "payload": "4.7k"}
  ])");
  REQUIRE(list.size() == 4);
  CHECK(list[0].action == OverrideAction::SetType);
  CHECK(list[1].target == "dangling_terminal:c1:t2");
  CHECK(list[2].target == "c4");
  CHECK(list[2].role == TerminalRole::T1);
  CHECK(list[2].value == "N2");
  CHECK(parse_overrides(serialize_overrides(list)).size() == 4);
  CHECK(parse_overrides(R"({"overrides": []})").empty());

  CHECK_THROWS_AS(parse_overrides(R"([{"target": "c1", "action": "explode"}])"), IngestError);
  CHECK_THROWS_AS(parse_overrides(R"([{"action": "accept"}])"), IngestError);
  CHECK_THROWS_AS(parse_overrides(R"([{"target": "c1", "action": "set_value"}])"), IngestError);
  CHECK_THROWS_AS(parse_overrides("{"), IngestError);
}

TEST_CASE("override compaction keeps the last writer per slot") {
  std::vector<Override> log = {{"c1", OverrideAction::SetValue, "1k", {}},
                               {"c2", OverrideAction::SetValue, "2k", {}},
                               {"c1", OverrideAction::SetValue, "3k", {}},
                               {"c1", OverrideAction::SetDesignator, "R9", {}}};
  auto c = compact_overrides(log);
  REQUIRE(c.size() == 3);
  int value_c1 = 0;
  for (auto& o : c)
    if (o.target == "c1" && o.action == OverrideAction::SetValue) {
      ++value_c1;
      CHECK(o.value == "3k");
    }
  CHECK(value_c1 == 1);
  CHECK(target_component("c7") == 7);
  CHECK(target_component("prefix_conflict:c12:t3") == 12);
  CHECK_FALSE(target_component("type_count_mismatch:resistor"));
}
