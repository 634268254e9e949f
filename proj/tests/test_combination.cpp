#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "evcalc/combination.hpp"
#include "evcalc/conditioning.hpp"
#include "evcalc/search.hpp"
#include "oracles.hpp"

using namespace evcalc;

namespace {

// The running two-source example: source 0 supports {1} or {1,2}, source 1
// supports {2} or {1,2}, all weights 1/2. Combining yields 1/3 on each of
// {1}, {2}, {1,2}.
MultiSourceStructure one_third_example() {
  Frame theta{1, 2};
  Frame omega = Frame::range(2);
  SourceStructure s1(theta, omega, PointProbability(omega, {Rat(1, 2), Rat(1, 2)}),
                     {{0, Subset{1}}, {1, Subset{1, 2}}}, {{0, "a"}, {1, "b"}});
  SourceStructure s2(theta, omega, PointProbability(omega, {Rat(1, 2), Rat(1, 2)}),
                     {{0, Subset{2}}, {1, Subset{1, 2}}}, {{0, "c"}, {1, "d"}});
  return MultiSourceStructure(theta, {{0, s1}, {1, s2}});
}

MassFunction make_mass(const Frame& theta, std::map<Subset, Rat> entries) {
  return MassFunction(theta, std::move(entries));
}

}  // namespace

TEST_CASE("multiple source structures validate their components", "[combination]") {
  Frame theta{1, 2};
  Frame other{1, 2, 3};
  Frame w1 = Frame::range(1);
  SourceStructure over_theta(theta, w1, PointProbability(w1, {Rat(1)}), {{0, Subset{1}}});
  SourceStructure over_other(other, w1, PointProbability(w1, {Rat(1)}), {{0, Subset{1}}});
  CHECK_THROWS_AS(MultiSourceStructure(theta, {{0, over_theta}, {1, over_other}}),
                  ValidationError);
  CHECK_THROWS_AS(MultiSourceStructure(theta, {}), ValidationError);

  Frame w2 = Frame::range(2);
  SourceStructure invalid(theta, w2, PointProbability(w2, {Rat(1, 2), Rat(1, 2)}),
                          {{0, Subset()}, {1, Subset{1}}});
  CHECK_THROWS_AS(MultiSourceStructure(theta, {{0, invalid}}), ValidationError);

  // index gaps are fine
  MultiSourceStructure gappy(theta, {{2, over_theta}, {5, over_theta}});
  CHECK(gappy.indices() == std::vector<SourceIndex>{2, 5});
}

TEST_CASE("product enumeration is lexicographic and complete", "[combination]") {
  auto tuples = enumerate_product(one_third_example());
  REQUIRE(tuples.size() == 4);
  CHECK(tuples[0].coords == std::vector<Element>{0, 0});
  CHECK(tuples[1].coords == std::vector<Element>{0, 1});
  CHECK(tuples[2].coords == std::vector<Element>{1, 0});
  CHECK(tuples[3].coords == std::vector<Element>{1, 1});

  // single source: tuples are its elements
  Frame theta{1};
  Frame w2 = Frame::range(2);
  SourceStructure s(theta, w2, PointProbability(w2, {Rat(1, 2), Rat(1, 2)}),
                    {{0, Subset{1}}, {1, Subset{1}}});
  auto single = enumerate_product(MultiSourceStructure(theta, {{0, s}}));
  REQUIRE(single.size() == 2);
  CHECK(single[0].coords == std::vector<Element>{0});

  // 2 x 1 x 3
  Frame w1 = Frame::range(1);
  Frame w3 = Frame::range(3);
  SourceStructure a(theta, w2, PointProbability(w2, {Rat(1, 2), Rat(1, 2)}),
                    {{0, Subset{1}}, {1, Subset{1}}});
  SourceStructure b(theta, w1, PointProbability(w1, {Rat(1)}), {{0, Subset{1}}});
  SourceStructure c(theta, w3, PointProbability(w3, {Rat(1, 3), Rat(1, 3), Rat(1, 3)}),
                    {{0, Subset{1}}, {1, Subset{1}}, {2, Subset{1}}});
  auto triple = enumerate_product(MultiSourceStructure(theta, {{0, a}, {1, b}, {2, c}}));
  REQUIRE(triple.size() == 6);
  CHECK(triple[0].coords == std::vector<Element>{0, 0, 0});
  CHECK(triple[1].coords == std::vector<Element>{0, 0, 1});
  CHECK(triple[5].coords == std::vector<Element>{1, 0, 2});
  CHECK(std::is_sorted(triple.begin(), triple.end()));
}

TEST_CASE("the product cap raises a size error naming the cardinality", "[combination]") {
  try {
    enumerate_product(one_third_example(), 3);
    FAIL("expected CapError");
  } catch (const CapError& e) {
    CHECK(std::string(e.what()).find("4") != std::string::npos);
  }
}

TEST_CASE("combined compatibility is the image intersection", "[combination]") {
  MultiSourceStructure s = one_third_example();
  CHECK(combined_compatibility(s, {{0, 0}}).empty());         // {1} and {2}
  CHECK(combined_compatibility(s, {{1, 1}}) == Subset{1, 2});  // {1,2} and {1,2}
  CHECK(combined_compatibility(s, {{0, 1}}) == Subset{1});     // {1} and {1,2}
  CHECK_THROWS_AS(combined_compatibility(s, {{0}}), ValidationError);
  CHECK_THROWS_AS(combined_compatibility(s, {{0, 9}}), ValidationError);
}

TEST_CASE("combinability needs a live non-contradictory tuple", "[combination]") {
  Frame theta{1, 2};
  MultiSourceStructure s = one_third_example();
  CHECK(is_combinable(s));

  MultiSourceStructure single(theta, {{0, certain_source(theta, Subset{1})}});
  CHECK(is_combinable(single));

  MultiSourceStructure conflicting(
      theta, {{0, certain_source(theta, Subset{1})}, {1, certain_source(theta, Subset{2})}});
  CHECK_FALSE(is_combinable(conflicting));
}

TEST_CASE("the Dempster C-rule on the running example", "[combination]") {
  ProductDistribution pi = apply_c_rule(CRuleId::dempster, one_third_example());
  CHECK(pi.weight_of({{0, 0}}) == 0);
  CHECK(pi.weight_of({{0, 1}}) == Rat(1, 3));
  CHECK(pi.weight_of({{1, 0}}) == Rat(1, 3));
  CHECK(pi.weight_of({{1, 1}}) == Rat(1, 3));
}

TEST_CASE("the uniform rule spreads mass over the support", "[combination]") {
  ProductDistribution pi = apply_c_rule(CRuleId::uniform, one_third_example());
  CHECK(pi.weight_of({{0, 0}}) == 0);
  CHECK(pi.weight_of({{0, 1}}) == Rat(1, 3));
  CHECK(pi.weight_of({{1, 0}}) == Rat(1, 3));
  CHECK(pi.weight_of({{1, 1}}) == Rat(1, 3));
}

TEST_CASE("a certain source is a fixed point for the rules", "[combination]") {
  Frame theta{1, 2};
  MultiSourceStructure s(theta, {{0, certain_source(theta, Subset{1})}});
  for (CRuleId rule : {CRuleId::dempster, CRuleId::uniform, CRuleId::squared})
    CHECK(apply_c_rule(rule, s).weight_of({{0}}) == 1);
}

TEST_CASE("rules reject non-combinable structures", "[combination]") {
  Frame theta{1, 2};
  MultiSourceStructure conflicting(
      theta, {{0, certain_source(theta, Subset{1})}, {1, certain_source(theta, Subset{2})}});
  for (CRuleId rule : {CRuleId::dempster, CRuleId::uniform, CRuleId::squared})
    CHECK_THROWS_AS(apply_c_rule(rule, conflicting), CombinabilityError);
  CHECK_THROWS_AS(dempster_combine(conflicting), CombinabilityError);
}

TEST_CASE("rule outputs are probability functions on the right support", "[combination]") {
  GeneratorConfig cfg;
  cfg.seed = 21;
  for (std::size_t trial = 0; trial < 150; ++trial) {
    MultiSourceStructure s = random_mss(cfg, trial);
    for (CRuleId rule : {CRuleId::dempster, CRuleId::uniform, CRuleId::squared}) {
      ProductDistribution pi = apply_c_rule(rule, s);
      Rat total = 0;
      const auto indices = s.indices();
      for (std::size_t t = 0; t < pi.space().size(); ++t) {
        total += pi.weights()[t];
        if (pi.weights()[t] == 0) continue;
        const auto& tuple = pi.space().tuples()[t];
        CHECK_FALSE(combined_compatibility(s, tuple).empty());
        for (std::size_t d = 0; d < indices.size(); ++d)
          CHECK(s.source(indices[d]).p().at(tuple.coords[d]) != 0);
      }
      CHECK(total == 1);
    }
  }
}

TEST_CASE("dempster agrees with the brute-force oracle", "[combination]") {
  GeneratorConfig cfg;
  cfg.seed = 22;
  for (std::size_t trial = 0; trial < 200; ++trial) {
    MultiSourceStructure s = random_mss(cfg, trial);
    CHECK(apply_c_rule(CRuleId::dempster, s).weights() == oracles::dempster_weights(s));
  }
}

TEST_CASE("dempster_combine produces the combined source", "[combination]") {
  MultiSourceStructure s = one_third_example();
  SourceStructure combined = dempster_combine(s);
  CHECK(combined.omega().size() == 4);
  CHECK(validate_source(combined).ok());
  CHECK(combined.label_of(0) == "(0:a,1:c)");

  MassFunction m = mass_of_source(combined);
  CHECK(m.mass_of(Subset{1}) == Rat(1, 3));
  CHECK(m.mass_of(Subset{2}) == Rat(1, 3));
  CHECK(m.mass_of(Subset{1, 2}) == Rat(1, 3));
}

TEST_CASE("combining a single source preserves its belief function", "[combination]") {
  Frame theta{1, 2};
  Frame omega = Frame::range(2);
  SourceStructure s(theta, omega, PointProbability(omega, {Rat(3, 5), Rat(2, 5)}),
                    {{0, Subset{1}}, {1, Subset{1, 2}}});
  SourceStructure combined = dempster_combine(MultiSourceStructure(theta, {{0, s}}));
  MassFunction before = mass_of_source(s);
  MassFunction after = mass_of_source(combined);
  for (const auto& x : all_subsets(theta))
    CHECK(belief_from_mass(before, x) == belief_from_mass(after, x));
}

TEST_CASE("a vacuous source is neutral for combination", "[combination]") {
  MultiSourceStructure s = one_third_example();
  auto sources = s.sources();
  sources.emplace(2, certain_source(s.theta(), Subset::full(s.theta())));
  MultiSourceStructure with_vacuous(s.theta(), std::move(sources));
  CHECK(mass_of_source(dempster_combine(with_vacuous)) == mass_of_source(dempster_combine(s)));
}

TEST_CASE("mass-level combination matches the spec examples", "[combination]") {
  Frame theta{1, 2};
  MassFunction m1 = make_mass(theta, {{Subset{1}, Rat(1, 2)}, {Subset{1, 2}, Rat(1, 2)}});
  MassFunction m2 = make_mass(theta, {{Subset{2}, Rat(1, 2)}, {Subset{1, 2}, Rat(1, 2)}});
  MassFunction combined = dempster_combine_masses({m1, m2});
  CHECK(combined.mass_of(Subset{1}) == Rat(1, 3));
  CHECK(combined.mass_of(Subset{2}) == Rat(1, 3));
  CHECK(combined.mass_of(Subset{1, 2}) == Rat(1, 3));

  // vacuous identity
  CHECK(dempster_combine_masses({m1, MassFunction::vacuous(theta)}) == m1);
  CHECK(dempster_combine_masses({MassFunction::vacuous(theta), m1}) == m1);

  // the classic high-conflict example: two nearly-certain, opposed sources
  Frame theta3{1, 2, 3};
  MassFunction h1 = make_mass(theta3, {{Subset{1}, Rat(99, 100)}, {Subset{3}, Rat(1, 100)}});
  MassFunction h2 = make_mass(theta3, {{Subset{2}, Rat(99, 100)}, {Subset{3}, Rat(1, 100)}});
  MassFunction high = dempster_combine_masses({h1, h2});
  CHECK(high.mass_of(Subset{3}) == 1);
  CHECK(high.entries().size() == 1);
}

TEST_CASE("mass combination agrees with the double-sum oracle", "[combination]") {
  GeneratorConfig cfg;
  cfg.seed = 23;
  for (std::size_t trial = 0; trial < 200; ++trial) {
    MultiSourceStructure s = random_mss(cfg, trial);
    std::vector<MassFunction> ms;
    for (const auto& [index, source] : s.sources()) ms.push_back(mass_of_source(source));
    CHECK(dempster_combine_masses(ms).entries() == oracles::combine_masses(ms, true));
    CHECK(unnormalized_combine_masses(ms).entries() == oracles::combine_masses(ms, false));
  }
}

TEST_CASE("total conflict is a combinability error", "[combination]") {
  Frame theta{1, 2};
  MassFunction m1 = make_mass(theta, {{Subset{1}, Rat(1)}});
  MassFunction m2 = make_mass(theta, {{Subset{2}, Rat(1)}});
  CHECK_THROWS_AS(dempster_combine_masses({m1, m2}), CombinabilityError);
  CHECK_THROWS_AS(dempster_combine_masses({}), ValidationError);
}

TEST_CASE("non-combinable structures and total conflict coincide", "[combination]") {
  GeneratorConfig cfg;
  cfg.seed = 24;
  for (std::size_t trial = 0; trial < 150; ++trial) {
    // force conflict onto some structures by adding two opposed certain sources
    MultiSourceStructure s = random_mss(cfg, trial);
    auto sources = s.sources();
    if (trial % 2 == 0 && s.theta().size() >= 2) {
      const Element first = s.theta().elements()[0];
      const Element second = s.theta().elements()[1];
      SourceIndex next = sources.rbegin()->first + 1;
      sources.emplace(next, certain_source(s.theta(), Subset{first}));
      sources.emplace(next + 1, certain_source(s.theta(), Subset{second}));
    }
    MultiSourceStructure candidate(s.theta(), std::move(sources));
    std::vector<MassFunction> ms;
    for (const auto& [index, source] : candidate.sources()) ms.push_back(mass_of_source(source));
    if (is_combinable(candidate)) {
      CHECK_NOTHROW(dempster_combine_masses(ms));
    } else {
      CHECK_THROWS_AS(dempster_combine_masses(ms), CombinabilityError);
      CHECK_THROWS_AS(apply_c_rule(CRuleId::dempster, candidate), CombinabilityError);
    }
  }
}

TEST_CASE("the unnormalized rule keeps conflict on the empty set", "[combination]") {
  Frame theta{1, 2};
  MassFunction m1 = make_mass(theta, {{Subset{1}, Rat(1, 2)}, {Subset{1, 2}, Rat(1, 2)}});
  MassFunction m2 = make_mass(theta, {{Subset{2}, Rat(1, 2)}, {Subset{1, 2}, Rat(1, 2)}});
  MassFunction open = unnormalized_combine_masses({m1, m2});
  CHECK(open.mass_of(Subset()) == Rat(1, 4));
  CHECK(open.mass_of(Subset{1}) == Rat(1, 4));
  CHECK(open.mass_of(Subset{2}) == Rat(1, 4));
  CHECK(open.mass_of(Subset{1, 2}) == Rat(1, 4));
  CHECK_FALSE(open.normalized());

  // totally conflicting certain inputs: everything lands on {}
  MassFunction c1 = make_mass(theta, {{Subset{1}, Rat(1)}});
  MassFunction c2 = make_mass(theta, {{Subset{2}, Rat(1)}});
  CHECK(unnormalized_combine_masses({c1, c2}).mass_of(Subset()) == 1);

  // conflict-free inputs agree with the normalized rule
  MassFunction f1 = make_mass(theta, {{Subset{1}, Rat(1, 3)}, {Subset{1, 2}, Rat(2, 3)}});
  MassFunction f2 = make_mass(theta, {{Subset{1, 2}, Rat(1)}});
  CHECK(unnormalized_combine_masses({f1, f2}) == dempster_combine_masses({f1, f2}));
}

TEST_CASE("mass combination is commutative and associative", "[combination]") {
  // Discounted inputs: theta stays focal everywhere, so no intermediate
  // combination can totally conflict and every parenthesization is defined.
  const Frame theta{1, 2, 3};
  const auto random_discounted_mass = [&](SplitMix64& rng) {
    const auto subsets = all_subsets(theta);
    std::map<Subset, Rat> entries;
    const std::uint64_t denom = rng.in(1, 12);
    std::uint64_t remaining = denom;
    const std::size_t focals = rng.in(1, 3);
    for (std::size_t j = 0; j + 1 < focals; ++j) {
      const std::uint64_t share = rng.in(0, remaining);
      entries[subsets[rng.in(1, subsets.size() - 1)]] += Rat(share, denom);
      remaining -= share;
    }
    entries[subsets[rng.in(1, subsets.size() - 1)]] += Rat(remaining, denom);
    return discount_mass(MassFunction(theta, std::move(entries)), Rat(1, 8));
  };

  for (std::size_t trial = 0; trial < 40; ++trial) {
    SplitMix64 rng(trial * 7919 + 3);
    std::vector<MassFunction> ms;
    while (ms.size() < 4) ms.push_back(random_discounted_mass(rng));

    const MassFunction reference = dempster_combine_masses(ms);
    const auto pair = [](const MassFunction& a, const MassFunction& b) {
      return dempster_combine_masses({a, b});
    };

    std::vector<std::size_t> perm{0, 1, 2, 3};
    do {
      const MassFunction &a = ms[perm[0]], &b = ms[perm[1]], &c = ms[perm[2]], &d = ms[perm[3]];
      CHECK(dempster_combine_masses({a, b, c, d}) == reference);
      CHECK(pair(pair(pair(a, b), c), d) == reference);
      CHECK(pair(pair(a, pair(b, c)), d) == reference);
      CHECK(pair(pair(a, b), pair(c, d)) == reference);
      CHECK(pair(a, pair(pair(b, c), d)) == reference);
      CHECK(pair(a, pair(b, pair(c, d))) == reference);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("mass-level and source-level combination coincide", "[combination]") {
  GeneratorConfig cfg;
  cfg.seed = 26;
  for (std::size_t trial = 0; trial < 300; ++trial) {
    MultiSourceStructure s = random_mss(cfg, trial);
    std::vector<MassFunction> ms;
    for (const auto& [index, source] : s.sources()) ms.push_back(mass_of_source(source));
    CHECK(mass_of_source(dempster_combine(s)) == dempster_combine_masses(ms));
  }
}
