#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "schemnet/detect.hpp"
#include "schemnet/prng.hpp"
#include "schemnet/symbols.hpp"
#include "schemnet/synth.hpp"

using namespace schemnet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv64(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) h = (h ^ b) * 0x100000001b3ull;
  return h;
}

std::vector<int> node_degrees(const Circuit& c) {
  std::vector<int> deg(c.node_count, 0);
  for (auto& e : c.elements)
    for (int n : e.nodes) ++deg[n];
  return deg;
}

bool connected(const Circuit& c) {
  std::vector<int> parent(c.node_count);
  for (int i = 0; i < c.node_count; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto& e : c.elements)
    for (int n : e.nodes) parent[find(n)] = find(e.nodes[0]);
  for (int i = 0; i < c.node_count; ++i)
    if (find(i) != find(0)) return false;
  return true;
}

}  // namespace

TEST_CASE("SplitMix64 reference outputs") {
  SplitMix64 r(0);
  CHECK(r.next() == 0xe220a8397b1dcdafull);
  CHECK(r.next() == 0x6e789e6aa1b965f4ull);
  CHECK(r.next() == 0x06c45d188009454full);
}

TEST_CASE("smallest circuit is a source loop") {
  auto c = generate_circuit(0, 2);
  REQUIRE(c.elements.size() == 2);
  CHECK(c.elements[0].ctype == ComponentType::VoltageSource);
  CHECK(c.node_count == 2);
  CHECK_THROWS_AS(generate_circuit(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_circuit(0, 21), std::invalid_argument);
}

TEST_CASE("generated circuits are connected with no degree-1 nodes") {
  for (std::uint64_t seed = 0; seed < 300; ++seed)
    for (int n = kMinComponents; n <= kMaxComponents; n += 3) {
      auto c = generate_circuit(seed, n);
      REQUIRE(static_cast<int>(c.elements.size()) == n);
      CHECK(connected(c));
      for (int d : node_degrees(c)) CHECK(d >= 2);
      CHECK(c.node_count <= kMaxNodes);
    }
}

TEST_CASE("corpus palette covers all ten card types") {
  std::set<ComponentType> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    for (auto& e : generate_circuit(seed, corpus_components(seed)).elements) seen.insert(e.ctype);
  CHECK(seen.size() == kCardTypes.size());
}

TEST_CASE("seed 3 with ten components matches the committed golden files") {
  auto g = synthesize(3, 10);
  fs::path data = SCHEMNET_TEST_DATA;
  CHECK(to_spice(g.netlist) == slurp(data / "seed3_n10.golden.cir"));
  auto tmp = fs::temp_directory_path() / "schemnet_synth_golden";
  fs::remove_all(tmp);
  write_golden(tmp, g);
  CHECK(slurp(tmp / "detections.json") == slurp(data / "seed3_n10.detections.json"));
  CHECK(slurp(tmp / "texts.json") == slurp(data / "seed3_n10.texts.json"));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv64(encode_pgm(g.image))));
  auto want = slurp(data / "seed3_n10.image.fnv64");
  CHECK(std::string(hex) == want.substr(0, 16));
  fs::remove_all(tmp);
}

TEST_CASE("rendering is deterministic including degradation") {
  DegradeOptions d = corpus_degradation(17);
  auto a = synthesize(17, 9, d), b = synthesize(17, 9, d);
  CHECK(a.image == b.image);
  CHECK(to_spice(a.netlist) == to_spice(b.netlist));
  CHECK(a.texts == b.texts);
  CHECK(a.detections == b.detections);
}

TEST_CASE("golden annotations are consistent with the ink") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto g = synthesize(seed, corpus_components(seed));
    CHECK(g.image.width == g.ink.width);
    for (auto& c : g.detections) {
      CHECK(static_cast<int>(c.terminals.size()) == expected_terminals(c.ctype));
      CHECK(c.bbox.x >= 0);
      CHECK(c.bbox.right() <= g.ink.width);
      CHECK(c.bbox.bottom() <= g.ink.height);
    }
    // Wire centerlines end on the box edge but never cross the interior.
    for (auto& w : g.wires) {
      BBox seg{std::min(w.a.x, w.b.x), std::min(w.a.y, w.b.y), std::abs(w.a.x - w.b.x) + 1, std::abs(w.a.y - w.b.y) + 1};
      for (auto& c : g.detections) CHECK_FALSE(seg.intersects(c.bbox.expanded(-1)));
    }
    for (auto& t : g.texts) CHECK_FALSE(t.text.empty());
  }
}

TEST_CASE("symbol strokes reproduce each mask") {
  for (auto& t : SymbolLibrary::standard().templates()) {
    BinaryImage img(t.mask.width, t.mask.height);
    for (auto& s : t.strokes) draw_stroke(img, s.a, s.b);
    CHECK(img == t.mask);
  }
}

TEST_CASE("degradations") {
  auto g = synthesize(4, 6);
  DegradeOptions up;
  up.scale = 2;
  auto big = degrade(g, up);
  CHECK(big.width == 2 * g.image.width);
  DegradeOptions dark;
  dark.brightness = -32;
  auto d = degrade(g, dark);
  CHECK(d.at(0, 0) == 255 - 32);
  DegradeOptions cut;
  cut.cut_wire = 0;
  CHECK(binarize(degrade(g, cut)).popcount() < g.ink.popcount());
  DegradeOptions flip;
  flip.flip = true;
  CHECK(degrade(g, flip) == flip_horizontal(g.image));
  auto mix = corpus_degradation(5);
  CHECK(mix.scale == 2);
  CHECK(mix.gaps > 0);
  CHECK(std::abs(mix.brightness) == 32);
}
