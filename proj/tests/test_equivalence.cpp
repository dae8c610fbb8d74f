#include <doctest.h>

#include <random>

#include "netgen.hpp"
#include "oracles.hpp"
#include "schemnet/netlist.hpp"
#include "schemnet/synth.hpp"

using namespace schemnet;

TEST_CASE("relabeled netlist is equivalent with a valid mapping") {
  auto a = parse_netlist("R1 N1 N2 1k\nC1 N2 0 1u\nV1 N1 0 5\n.end");
  auto b = parse_netlist("R9 N2 N1 1000\nC4 N1 0 1e-6\nV1 N2 0 5\n.end");
  auto r = netlists_equivalent(a, b);
  REQUIRE(r.equivalent);
  REQUIRE(r.node_mapping);
  CHECK(r.node_mapping->at("N1") == "N2");
  CHECK(r.node_mapping->at("N2") == "N1");
  CHECK(r.node_mapping->at("0") == "0");

  auto fewer = parse_netlist("R1 N1 N2 1k\nV1 N1 0 5\n.end");
  auto miss = netlists_equivalent(a, fewer);
  CHECK_FALSE(miss.equivalent);
  CHECK(miss.mismatch_reason);
}

TEST_CASE("values, models and designators respect options") {
  auto a = parse_netlist("R1 N1 0 1k\nD1 N1 0 DA\n.model DA D\n.end");
  auto b = parse_netlist("R2 N1 0 2k\nD1 N1 0 DA\n.model DA D\n.end");
  CHECK_FALSE(netlists_equivalent(a, b).equivalent);
  CHECK(netlists_equivalent(a, b, {false, false}).equivalent);
  auto c = parse_netlist("R2 N1 0 1k\nD1 N1 0 DA\n.model DA D\n.end");
  CHECK(netlists_equivalent(a, c).equivalent);
  CHECK_FALSE(netlists_equivalent(a, c, {true, true}).equivalent);
  auto d = parse_netlist("R1 N1 0 1k\nD1 0 N1 DA\n.model DA D\n.end");
  CHECK_FALSE(netlists_equivalent(a, d).equivalent);
  auto near = parse_netlist("R1 N1 0 1.0000000000001k\nD1 N1 0 DA\n.model DA D\n.end");
  CHECK(netlists_equivalent(a, near).equivalent);
}

TEST_CASE("bridges with equal degree sequences agree with brute force") {
  auto bridge = parse_netlist("R1 A B 1k\nR2 A C 1k\nR3 B D 1k\nR4 C D 1k\nR5 B C 1k\n.end");
  auto ladder = parse_netlist("R1 A B 1k\nR2 A B 1k\nR3 B C 1k\nR4 C D 1k\nR5 C D 1k\n.end");
  CHECK(netlists_equivalent(bridge, ladder).equivalent == oracle::brute_equivalent(bridge, ladder));
  CHECK_FALSE(netlists_equivalent(bridge, ladder).equivalent);
  auto bridge2 = parse_netlist("R1 D C 1k\nR2 D B 1k\nR3 C A 1k\nR4 B A 1k\nR5 C B 1k\n.end");
  CHECK(netlists_equivalent(bridge, bridge2).equivalent);
  CHECK(oracle::brute_equivalent(bridge, bridge2));
}

TEST_CASE("equivalence agrees with factorial search on random pairs") {
  std::mt19937_64 rng(2024);
  int agree = 0;
  for (int i = 0; i < 200; ++i) {
    auto a = netgen::random_netlist(rng, 7);
    auto b = i % 2 ? netgen::relabel(rng, a) : netgen::mutate(rng, a);
    bool want = oracle::brute_equivalent(a, b);
    bool got = netlists_equivalent(a, b).equivalent;
    agree += want == got;
    if (i % 2) CHECK(got);
  }
  CHECK(agree == 200);
}

TEST_CASE("mapping reproduces the target card set") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    auto a = netgen::random_netlist(rng);
    auto b = netgen::relabel(rng, a);
    auto r = netlists_equivalent(a, b);
    REQUIRE(r.equivalent);
    std::map<std::string, std::string> id{{"0", "0"}};
    for (auto& n : oracle::node_names(b)) id[n] = n;
    CHECK(oracle::keys(a, *r.node_mapping, true) == oracle::keys(b, id, true));
  }
}

TEST_CASE("equivalence is reflexive, symmetric and transitive on samples") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    auto a = netgen::random_netlist(rng);
    auto b = netgen::relabel(rng, a);
    auto c = netgen::relabel(rng, b);
    auto m = netgen::mutate(rng, a);
    CHECK(netlists_equivalent(a, a).equivalent);
    CHECK(netlists_equivalent(b, a).equivalent == netlists_equivalent(a, b).equivalent);
    CHECK(netlists_equivalent(m, a).equivalent == netlists_equivalent(a, m).equivalent);
    CHECK(netlists_equivalent(a, c).equivalent);
  }
}

TEST_CASE("corpus netlists match relabeled copies") {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto g = synthesize(seed, corpus_components(seed));
    CHECK(netlists_equivalent(g.netlist, netgen::relabel(rng, g.netlist)).equivalent);
  }
}

TEST_CASE("more than 64 nodes is a capacity error") {
  Netlist big;
  for (int i = 0; i < 70; ++i)
    big.cards.push_back(Card{"R" + std::to_string(i + 1), ComponentType::Resistor,
                             {"N" + std::to_string(i), "N" + std::to_string(i + 1)}, Value{1, Multiplier::Kilo}, {}});
  CHECK_THROWS_AS(netlists_equivalent(big, big), CapacityError);
}

TEST_CASE("max_common_cards agrees with exhaustive search") {
  auto a = parse_netlist("R1 N1 N2 1k\nC1 N2 0 1u\nV1 N1 0 5\n.end");
  auto fewer = parse_netlist("R1 N1 N2 1k\nV1 N1 0 5\n.end");
  CHECK(max_common_cards(a, fewer).matched == 2);
  CHECK(max_common_cards(a, a).matched == 3);

  std::mt19937_64 rng(31);
  for (int i = 0; i < 150; ++i) {
    auto x = netgen::random_netlist(rng, 6);
    auto y = i % 3 ? netgen::mutate(rng, x) : netgen::random_netlist(rng, 6);
    auto got = max_common_cards(x, y);
    CHECK(got.exact);
    CHECK(got.matched == oracle::brute_common(x, y));
    CHECK(max_common_cards(x, y, {false, false}).matched == oracle::brute_common(x, y, false));
  }
}
