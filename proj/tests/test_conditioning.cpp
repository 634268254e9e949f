#include <catch2/catch_amalgamated.hpp>

#include "evcalc/conditioning.hpp"
#include "evcalc/search.hpp"
#include "oracles.hpp"

using namespace evcalc;

namespace {

SourceStructure abc_source() {
  // P = (1/2, 1/4, 1/4) over {0,1,2}, images {1}, {1,2}, {1,2}
  Frame theta{1, 2};
  Frame omega = Frame::range(3);
  return SourceStructure(theta, omega,
                         PointProbability(omega, {Rat(1, 2), Rat(1, 4), Rat(1, 4)}),
                         {{0, Subset{1}}, {1, Subset{1, 2}}, {2, Subset{1, 2}}},
                         {{0, "a"}, {1, "b"}, {2, "c"}});
}

}  // namespace

TEST_CASE("conditioning a probability function rescales the kept weights", "[conditioning]") {
  Frame omega = Frame::range(3);
  PointProbability p(omega, {Rat(1, 2), Rat(1, 4), Rat(1, 4)});
  PointProbability conditioned = condition_probability(p, Subset{0, 1});
  CHECK(conditioned.frame().elements() == std::vector<Element>{0, 1});
  CHECK(conditioned.at(0) == Rat(2, 3));
  CHECK(conditioned.at(1) == Rat(1, 3));

  // conditioning on the whole frame changes nothing
  CHECK(condition_probability(p, Subset::full(omega)) == p);

  // a certain weight stays certain
  Frame two = Frame::range(2);
  PointProbability certain(two, {Rat(1), Rat(0)});
  CHECK(condition_probability(certain, Subset{0}).at(0) == 1);

  CHECK_THROWS_AS(condition_probability(certain, Subset{1}), ConditioningError);
}

TEST_CASE("conditioned probabilities sum to one and chain", "[conditioning]") {
  GeneratorConfig cfg;
  cfg.seed = 31;
  for (std::size_t trial = 0; trial < 200; ++trial) {
    MultiSourceStructure s = random_mss(cfg, trial);
    const SourceStructure& src = s.sources().begin()->second;
    const PointProbability& p = src.p();
    SplitMix64 rng(trial);
    const Subset delta = [&] {
      for (;;) {
        Subset candidate =
            detail::random_nonempty_subset(rng, src.omega().elements());
        if (p.total(candidate) != 0) return candidate;
      }
    }();
    PointProbability once = condition_probability(p, delta);
    CHECK(once.total(Subset::full(once.frame())) == 1);

    // chain rule: conditioning twice equals conditioning once by the subset
    for (const Subset& inner : all_subsets(Frame(delta.members()))) {
      if (inner.empty() || once.total(inner) == 0) continue;
      CHECK(condition_probability(once, inner) == condition_probability(p, inner));
    }
  }
}

TEST_CASE("conditioning a source restricts and rescales", "[conditioning]") {
  SourceStructure s = abc_source();

  SourceStructure certain = condition_source(s, Subset{1});
  CHECK(certain.omega().size() == 1);
  CHECK(certain.p().at(1) == 1);
  CHECK(certain.image_of(1) == Subset{1, 2});
  CHECK(certain.label_of(1) == "b");  // element identity kept, label kept
  CHECK(validate_source(certain).ok());

  CHECK(condition_source(s, Subset::full(s.omega())) == s);

  SourceStructure ab = condition_source(s, Subset{0, 1});
  CHECK(ab.p().at(0) == Rat(2, 3));
  CHECK(ab.p().at(1) == Rat(1, 3));
  CHECK(ab.image_of(0) == Subset{1});
}

TEST_CASE("geometric conditioning matches the mass ratio oracle", "[conditioning]") {
  // m: {1} -> 1/2, {1,2} -> 1/4, theta -> 1/4 over theta = {1,2,3}
  Frame theta{1, 2, 3};
  MassFunction m(theta, {{Subset{1}, Rat(1, 2)},
                         {Subset{1, 2}, Rat(1, 4)},
                         {Subset{1, 2, 3}, Rat(1, 4)}});
  SourceStructure s = source_from_mass(m);

  MassFunction conditioned = mass_of_source(geometric_condition(s, Subset{1, 2}));
  CHECK(conditioned.mass_of(Subset{1}) == Rat(2, 3));
  CHECK(conditioned.mass_of(Subset{1, 2}) == Rat(1, 3));
  CHECK(conditioned.entries().size() == 2);

  // conditioning by the whole frame is the identity
  CHECK(geometric_condition(s, Subset::full(theta)) == s);

  // a single focal inside A leaves certainty
  MassFunction single = mass_of_source(geometric_condition(s, Subset{1}));
  CHECK(single.mass_of(Subset{1}) == 1);

  // Bel(A) = 0: nothing to condition on
  CHECK_THROWS_AS(geometric_condition(s, Subset{3}), ConditioningError);
}

TEST_CASE("geometric conditioning divides by the belief, exhaustively", "[conditioning]") {
  GeneratorConfig cfg;
  cfg.seed = 32;
  std::size_t checked = 0;
  for (std::size_t trial = 0; trial < 150; ++trial) {
    MultiSourceStructure mss = random_mss(cfg, trial);
    const SourceStructure& s = mss.sources().begin()->second;
    MassFunction m = mass_of_source(s);
    for (const Subset& a : all_subsets(s.theta())) {
      const Rat bel = belief_from_mass(m, a);
      if (bel == 0) continue;
      ++checked;
      MassFunction conditioned = mass_of_source(geometric_condition(s, a));
      Rat covered = 0;
      for (const auto& [x, value] : conditioned.entries()) {
        CHECK(x.subset_of(a));  // no mass escapes A
        CHECK(value == m.mass_of(x) / bel);
        covered += value;
      }
      CHECK(covered == 1);
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("cylinders partition the product space", "[conditioning]") {
  Frame theta{1, 2};
  Frame w2 = Frame::range(2);
  Frame w3 = Frame::range(3);
  SourceStructure a(theta, w2, PointProbability(w2, {Rat(1, 2), Rat(1, 2)}),
                    {{0, Subset{1}}, {1, Subset{1, 2}}});
  SourceStructure b(theta, w3, PointProbability(w3, {Rat(1, 3), Rat(1, 3), Rat(1, 3)}),
                    {{0, Subset{1}}, {1, Subset{2}}, {2, Subset{1, 2}}});
  MultiSourceStructure s(theta, {{0, a}, {1, b}});

  auto [e, not_e] = cylinder(s, 0, 0);
  CHECK(e.size() == 3);  // |product| / |omega_0|
  CHECK(not_e.size() == 3);
  for (const auto& t : e) CHECK(t.coords[0] == 0);

  auto [e2, not_e2] = cylinder(s, 1, 1);
  CHECK(e2.size() == 2);
  CHECK(not_e2.size() == 4);
  CHECK(e.size() + not_e.size() == enumerate_product(s).size());

  // single-element axis: the complement is empty
  MultiSourceStructure single(theta, {{0, certain_source(theta, Subset{1})}});
  auto [all, none] = cylinder(single, 0, 0);
  CHECK(all.size() == 1);
  CHECK(none.empty());
  CHECK_FALSE(complement_cylinder(single, 0, 0).has_value());

  CHECK_THROWS_AS(cylinder(s, 7, 0), ValidationError);
  CHECK_THROWS_AS(cylinder(s, 0, 9), ValidationError);
}

TEST_CASE("conditioning a multiple source structure works part by part", "[conditioning]") {
  Frame theta{1, 2};
  Frame omega = Frame::range(2);
  SourceStructure s1(theta, omega, PointProbability(omega, {Rat(1, 2), Rat(1, 2)}),
                     {{0, Subset{1}}, {1, Subset{1, 2}}});
  SourceStructure s2(theta, omega, PointProbability(omega, {Rat(1, 2), Rat(1, 2)}),
                     {{0, Subset{2}}, {1, Subset{1, 2}}});
  MultiSourceStructure s(theta, {{0, s1}, {1, s2}});

  // full product subset: identity on induced component masses
  MultiSourceStructure same = condition_mss(s, full_product_subset(s));
  for (SourceIndex i : s.indices())
    CHECK(mass_of_source(same.source(i)) == mass_of_source(s.source(i)));

  // restrict the first source to its second element: it becomes certain
  ProductSubset delta = full_product_subset(s);
  delta.parts[0] = Subset{1};
  MultiSourceStructure conditioned = condition_mss(s, delta);
  CHECK(conditioned.source(0).omega().size() == 1);
  CHECK(mass_of_source(conditioned.source(0)).mass_of(Subset{1, 2}) == 1);
  CHECK(conditioned.source(1) == s2);

  // a zero-probability part names its index
  Frame w2 = Frame::range(2);
  SourceStructure zeroed(theta, w2, PointProbability(w2, {Rat(1), Rat(0)}),
                         {{0, Subset{1}}, {1, Subset{2}}});
  MultiSourceStructure z(theta, {{0, zeroed}, {1, s2}});
  ProductSubset bad = full_product_subset(z);
  bad.parts[0] = Subset{1};
  try {
    condition_mss(z, bad);
    FAIL("expected ConditioningError");
  } catch (const ConditioningError& e) {
    CHECK(std::string(e.what()).find("index 0") != std::string::npos);
  }

  // malformed product subsets are rejected
  ProductSubset missing;
  missing.parts.emplace(0, Subset{0});
  CHECK_THROWS_AS(condition_mss(s, missing), ValidationError);
  ProductSubset empty_part = full_product_subset(s);
  empty_part.parts[1] = Subset();
  CHECK_THROWS_AS(condition_mss(s, empty_part), ValidationError);
}

TEST_CASE("discounting moves mass onto the whole frame", "[conditioning]") {
  Frame theta{1, 2};
  MassFunction certain(theta, {{Subset{1}, Rat(1)}});

  MassFunction d = discount_mass(certain, Rat(1, 10));
  CHECK(d.mass_of(Subset{1}) == Rat(9, 10));
  CHECK(d.mass_of(Subset{1, 2}) == Rat(1, 10));

  CHECK(discount_mass(certain, Rat(0)) == certain);

  MassFunction half(theta, {{Subset{1}, Rat(1, 2)}, {Subset{1, 2}, Rat(1, 2)}});
  MassFunction dh = discount_mass(half, Rat(1, 2));
  CHECK(dh.mass_of(Subset{1}) == Rat(1, 4));
  CHECK(dh.mass_of(Subset{1, 2}) == Rat(3, 4));

  CHECK_THROWS_AS(discount_mass(certain, Rat(1)), ValidationError);
  CHECK_THROWS_AS(discount_mass(certain, Rat(-1, 2)), ValidationError);
}

TEST_CASE("discounting preserves total mass and only adds theta", "[conditioning]") {
  GeneratorConfig cfg;
  cfg.seed = 33;
  for (std::size_t trial = 0; trial < 150; ++trial) {
    const MultiSourceStructure mss = random_mss(cfg, trial);
    const SourceStructure& s = mss.sources().begin()->second;
    MassFunction m = mass_of_source(s);
    SplitMix64 rng(trial);
    const Rat eps(rng.in(1, 9), 10);
    MassFunction d = discount_mass(m, eps);

    Rat total = 0;
    for (const auto& [set, value] : d.entries()) total += value;
    CHECK(total == 1);
    CHECK(d.mass_of(Subset::full(m.theta())) >= eps);  // theta is focal

    // focal-monotone: old focals survive except by merging into theta
    for (const Subset& focal : focal_elements(m))
      CHECK((d.mass_of(focal) != 0 || focal == Subset::full(m.theta())));

    // the source-level construction induces exactly the same mass function
    CHECK(mass_of_source(discount_source(s, eps)) == d);
  }
}
