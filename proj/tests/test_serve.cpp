#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "schemnet/config.hpp"
#include "schemnet/detect.hpp"
#include "schemnet/json_io.hpp"
#include "schemnet/pipeline.hpp"
#include "schemnet/serve.hpp"
#include "schemnet/synth.hpp"

using namespace schemnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

void write_image(const fs::path& dir, const GrayImage& img) {
  fs::create_directories(dir);
  write_file(dir / "image.pgm", encode_pgm(img));
}

std::string detections_with(const GoldenSchematic& g, const std::function<void(json&)>& edit) {
  auto j = json::parse(serialize_detections(g.detections, {g.image.width, g.image.height}));
  edit(j["components"]);
  return j.dump();
}

struct Fixture {
  fs::path root = fs::temp_directory_path() / "schemnet_serve_test";
  GoldenSchematic g3 = synthesize(3, 10);
  std::string mislabeled;

  Fixture() {
    fs::remove_all(root);
    write_image(root / "clean", synthesize(5, corpus_components(5)).image);
    DegradeOptions cut;
    cut.cut_wire = 0;
    write_image(root / "cut", synthesize(3, 10, cut).image);
    mislabeled = detections_with(g3, [](json& list) {
      for (auto& c : list)
        if (c["type"] == "resistor") {
          c["type"] = "capacitor";
          break;
        }
    });
    write_image(root / "mislabeled", g3.image);
    write(root / "mislabeled" / "ingest.detections.json", mislabeled);
    write_image(root / "extra_ground", g3.image);
    write(root / "extra_ground" / "ingest.detections.json", detections_with(g3, [](json& list) {
            list.push_back({{"type", "ground"}, {"bbox", {2, 2, 11, 8}}});
          }));
    fs::create_directories(root / "not_a_job");
  }
  ~Fixture() { fs::remove_all(root); }
};

struct Running {
  ReviewServer server;
  int port;
  httplib::Client client;
  explicit Running(const fs::path& root)
      : server(root, Config{}), port(server.bind("127.0.0.1", 0)), client("127.0.0.1", port) {
    server.start();
    client.set_read_timeout(60, 0);
  }
  ~Running() { server.stop(); }
  json get(const std::string& path, int expect = 200) {
    auto res = client.Get(path);
    REQUIRE(res);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }
  json post(const std::string& path, const std::string& body, int expect = 200) {
    auto res = client.Post(path, body, "application/json");
    REQUIRE(res);
    CHECK(res->status == expect);
    return json::parse(res->body);
  }
};

std::string flag_id(const json& detail, const std::string& kind) {
  for (auto& f : detail["flags"])
    if (f["kind"] == kind && f["resolution"].is_null()) return f["id"];
  return {};
}

}  // namespace

TEST_CASE("job listing and lookup") {
  Fixture f;
  Running s(f.root);
  auto list = s.get("/api/jobs");
  REQUIRE(list["jobs"].size() == 4);
  CHECK(list["jobs"][0]["id"] == "clean");

  auto clean = s.get("/api/jobs/clean");
  CHECK(clean["status"] == "complete");
  CHECK(clean["unresolved"] == 0);
  CHECK(clean["netlist"].is_string());
  CHECK(clean["components"][0].contains("id"));
  CHECK(clean["nets"]["nets"].is_array());

  auto cut = s.get("/api/jobs/cut");
  CHECK(cut["status"] == "flagged");
  CHECK_FALSE(flag_id(cut, "dangling_terminal").empty());
  CHECK(cut["netlist"].is_null());

  s.get("/api/jobs/nope", 404);
  s.post("/api/jobs/nope/overrides", "[]", 404);
  s.post("/api/jobs/nope/regenerate", "", 404);

  auto img = s.client.Get("/api/jobs/clean/image");
  REQUIRE(img);
  CHECK(img->status == 200);
  CHECK(img->get_header_value("Content-Type") == "image/png");
  CHECK(img->body.substr(1, 3) == "PNG");
}

TEST_CASE("invalid overrides are rejected with 422") {
  Fixture f;
  Running s(f.root);
  auto bad_value = s.post("/api/jobs/clean/overrides", R"([{"target": "c0", "action": "set_value", "payload": "10x"}])", 422);
  CHECK(bad_value["error"].get<std::string>().find("10x") != std::string::npos);
  s.post("/api/jobs/clean/overrides", R"([{"target": "c1", "action": "teleport"}])", 422);
  s.post("/api/jobs/clean/overrides", R"([{"flag": "dangling_terminal:c0:t1", "action": "accept"}])", 422);
  s.post("/api/jobs/clean/overrides", "not json", 422);
  CHECK(s.get("/api/jobs/clean")["overrides"].empty());
  CHECK_FALSE(fs::exists(f.root / "clean" / "overrides.json"));
}

TEST_CASE("set_type on a mislabeled detection then regenerate") {
  Fixture f;
  std::string fixed_netlist;
  {
    Running s(f.root);
    auto detail = s.get("/api/jobs/mislabeled");
    CHECK(detail["status"] == "flagged");
    std::string conflict = flag_id(detail, "prefix_conflict");
    REQUIRE_FALSE(conflict.empty());
    auto subject = conflict.substr(conflict.find(':') + 1);
    subject = subject.substr(0, subject.find(':'));

    json body = json::array({{{"target", subject}, {"action", "set_type"}, {"payload", "resistor"}}});
    auto accepted = s.post("/api/jobs/mislabeled/overrides", body.dump());
    CHECK(accepted["accepted"] == 1);
    CHECK(fs::exists(f.root / "mislabeled" / "overrides.json"));

    auto regen = s.post("/api/jobs/mislabeled/regenerate", "");
    CHECK(regen["status"] == "complete");
    CHECK(regen["flags"].empty());
    fixed_netlist = regen["netlist"];
    CHECK(netlists_equivalent(parse_netlist(fixed_netlist), f.g3.netlist, {true, true}).equivalent);

    ConvertInput in;
    in.image = f.g3.image;
    in.detections_json = f.mislabeled;
    in.overrides = parse_overrides(body.dump());
    auto fresh = convert(in, Config{});
    CHECK(to_spice(*fresh.netlist) == fixed_netlist);
  }
  Running again(f.root);
  auto detail = again.get("/api/jobs/mislabeled");
  CHECK(detail["overrides"].size() == 1);
  CHECK(detail["netlist"] == fixed_netlist);
  CHECK(detail["status"] == "complete");
}

TEST_CASE("accept resolves a flag without changing the netlist") {
  Fixture f;
  Running s(f.root);
  auto detail = s.get("/api/jobs/extra_ground");
  CHECK(detail["status"] == "flagged");
  std::string mismatch = flag_id(detail, "type_count_mismatch");
  REQUIRE_FALSE(mismatch.empty());
  auto before = detail["netlist"];
  REQUIRE(before.is_string());
  json body = json::array({{{"flag", mismatch}, {"action", "accept"}}});
  s.post("/api/jobs/extra_ground/overrides", body.dump());
  auto regen = s.post("/api/jobs/extra_ground/regenerate", "");
  CHECK(regen["status"] == "complete");
  CHECK(regen["netlist"] == before);
}

TEST_CASE("accepting a dangling terminal lets the netlist emit") {
  Fixture f;
  Running s(f.root);
  auto detail = s.get("/api/jobs/cut");
  std::string dangling = flag_id(detail, "dangling_terminal");
  json body = json::array({{{"flag", dangling}, {"action", "accept"}}});
  s.post("/api/jobs/cut/overrides", body.dump());
  auto regen = s.post("/api/jobs/cut/regenerate", "");
  CHECK(regen["status"] == "complete");
  CHECK(regen["netlist"].is_string());
}
