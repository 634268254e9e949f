#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evcalc/combination.hpp"
#include "evcalc/conditioning.hpp"
#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/mass.hpp"
#include "evcalc/probability.hpp"
#include "evcalc/rational.hpp"
#include "evcalc/source.hpp"

namespace evcalc {

enum class AxiomId {
  respects_contradictions,
  respects_zero_probabilities,
  assumption_a,
  assumption_a_general,
  assumption_b,
  ratio_invariance,
};

inline std::string_view to_string(AxiomId id) {
  switch (id) {
    case AxiomId::respects_contradictions: return "contradictions";
    case AxiomId::respects_zero_probabilities: return "zero-probabilities";
    case AxiomId::assumption_a: return "assumption-A";
    case AxiomId::assumption_a_general: return "assumption-A-general";
    case AxiomId::assumption_b: return "assumption-B";
    case AxiomId::ratio_invariance: return "ratio-invariance";
  }
  return "?";
}

inline std::optional<AxiomId> parse_axiom(std::string_view name) {
  for (AxiomId id : {AxiomId::respects_contradictions, AxiomId::respects_zero_probabilities,
                     AxiomId::assumption_a, AxiomId::assumption_a_general,
                     AxiomId::assumption_b, AxiomId::ratio_invariance})
    if (name == to_string(id)) return id;
  return std::nullopt;
}

/// Everything needed to reproduce a failed check: the structure, the
/// conditioning data that parameterized the check, the spot where the two
/// sides disagreed, and both values.
struct Witness {
  MultiSourceStructure structure;
  std::optional<SourceIndex> k;
  std::optional<Element> l;
  std::optional<ProductSubset> delta;
  std::optional<ProductElement> tuple;
  std::optional<ProductElement> tuple2;  // ratio checks compare a pair
  std::string expected;
  std::string actual;
};

struct AxiomVerdict {
  AxiomId axiom;
  enum class Outcome { passed, failed, skipped } outcome;
  std::optional<Witness> witness;

  bool passed() const { return outcome == Outcome::passed; }
  bool failed() const { return outcome == Outcome::failed; }
  bool skipped() const { return outcome == Outcome::skipped; }
};

namespace detail {

inline AxiomVerdict pass(AxiomId id) { return {id, AxiomVerdict::Outcome::passed, std::nullopt}; }
inline AxiomVerdict skip(AxiomId id) { return {id, AxiomVerdict::Outcome::skipped, std::nullopt}; }
inline AxiomVerdict fail(AxiomId id, Witness w) {
  return {id, AxiomVerdict::Outcome::failed, std::move(w)};
}

}  // namespace detail

/// Passed iff the rule puts zero probability on every contradictory tuple.
inline AxiomVerdict check_respects_contradictions(const CRule& rule,
                                                  const MultiSourceStructure& s) {
  const ProductDistribution pi = rule(s);
  const auto& tuples = pi.space().tuples();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    if (pi.weights()[t] == 0) continue;
    if (combined_compatibility(s, tuples[t]).empty())
      return detail::fail(AxiomId::respects_contradictions,
                          Witness{s, std::nullopt, std::nullopt, std::nullopt, tuples[t],
                                  std::nullopt, "0", fraction_string(pi.weights()[t])});
  }
  return detail::pass(AxiomId::respects_contradictions);
}

/// Passed iff the rule puts zero probability on every tuple with a
/// zero-weight coordinate.
inline AxiomVerdict check_respects_zero_probabilities(const CRule& rule,
                                                      const MultiSourceStructure& s) {
  const ProductDistribution pi = rule(s);
  const auto& tuples = pi.space().tuples();
  const auto indices = s.indices();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    if (pi.weights()[t] == 0) continue;
    for (std::size_t d = 0; d < indices.size(); ++d) {
      if (s.source(indices[d]).p().at(tuples[t].coords[d]) == 0)
        return detail::fail(AxiomId::respects_zero_probabilities,
                            Witness{s, indices[d], tuples[t].coords[d], std::nullopt, tuples[t],
                                    std::nullopt, "0", fraction_string(pi.weights()[t])});
    }
  }
  return detail::pass(AxiomId::respects_zero_probabilities);
}

namespace detail {

/// Shared body of the two assumption-(A) forms: compare Bayesian
/// conditioning of the rule's output on delta against the rule applied to
/// the conditioned structure, tuple by tuple via coordinate identity.
inline AxiomVerdict check_conditioning_commutes(AxiomId id, const CRule& rule,
                                                const MultiSourceStructure& s,
                                                const ProductSubset& delta,
                                                std::optional<SourceIndex> k,
                                                std::optional<Element> l) {
  const ProductDistribution pi = rule(s);
  const auto delta_tuples = product_subset_tuples(s, delta);
  const Rat denom = pi.total(delta_tuples);
  if (denom == 0) return skip(id);
  const MultiSourceStructure conditioned = condition_mss(s, delta);
  const ProductDistribution rhs = rule(conditioned);
  for (const auto& t : delta_tuples) {
    const Rat lhs_w = pi.weight_of(t) / denom;
    const Rat& rhs_w = rhs.weight_of(t);
    if (lhs_w != rhs_w)
      return fail(id, Witness{s, k, l, delta, t, std::nullopt, fraction_string(lhs_w),
                              fraction_string(rhs_w)});
  }
  return pass(id);
}

}  // namespace detail

/// Assumption (A): conditioning the combined probabilities on the complement
/// cylinder of (k, l) must equal combining the conditioned structure.
/// Skipped (not pass/fail) when that cylinder has probability 0.
inline AxiomVerdict check_assumption_a(const CRule& rule, const MultiSourceStructure& s,
                                       SourceIndex k, Element l) {
  auto delta = complement_cylinder(s, k, l);
  if (!delta) return detail::skip(AxiomId::assumption_a);  // single-element source: empty cylinder
  return detail::check_conditioning_commutes(AxiomId::assumption_a, rule, s, *delta, k, l);
}

/// The generalized form: delta may be any product subset.
inline AxiomVerdict check_assumption_a_general(const CRule& rule, const MultiSourceStructure& s,
                                               const ProductSubset& delta) {
  return detail::check_conditioning_commutes(AxiomId::assumption_a_general, rule, s, delta,
                                             std::nullopt, std::nullopt);
}

/// Builds the simple structures assumption (B) quantifies over: source k
/// (the lowest index) has a two-element underlying frame with the given
/// weights and focal images; every other source is certain evidence. The
/// construction enforces (B)'s no-conflict requirement.
inline MultiSourceStructure build_b_instance(const Frame& theta, const PointProbability& pk,
                                             const std::pair<Subset, Subset>& focals,
                                             const std::vector<Subset>& certain_focals) {
  if (pk.frame().size() != 2)
    throw ValidationError("the distinguished source needs a two-element underlying frame");
  if (focals.first.empty() || focals.second.empty())
    throw InstanceInvalidError("focal elements must be non-empty");
  for (const Subset* focal : {&focals.first, &focals.second}) {
    Subset inter = *focal;
    for (const Subset& c : certain_focals) inter = intersect(inter, c);
    if (inter.empty())
      throw InstanceInvalidError("conflict: " + focal->to_string() +
                                 " is incompatible with the certain evidence");
  }
  std::map<Element, Subset> compatibility;
  compatibility.emplace(pk.frame().elements()[0], focals.first);
  compatibility.emplace(pk.frame().elements()[1], focals.second);
  std::map<SourceIndex, SourceStructure> sources;
  sources.emplace(0, SourceStructure(theta, pk.frame(), pk, std::move(compatibility)));
  SourceIndex next = 1;
  for (const Subset& c : certain_focals) sources.emplace(next++, certain_source(theta, c));
  return MultiSourceStructure(theta, std::move(sources));
}

/// Assumption (B): on a B-instance, the rule must reproduce the two-element
/// source's probabilities on its cylinders: pi(E_k^l) = P_k(l) for both l.
inline AxiomVerdict check_assumption_b(const CRule& rule, const MultiSourceStructure& inst) {
  std::optional<SourceIndex> k;
  for (const auto& [index, source] : inst.sources()) {
    if (source.omega().size() == 2) {
      if (k) throw ValidationError("not a B-instance: two sources with two-element frames");
      k = index;
    } else if (source.omega().size() != 1) {
      throw ValidationError("not a B-instance: source " + std::to_string(index) +
                            " has more than two underlying elements");
    }
  }
  if (!k) throw ValidationError("not a B-instance: no two-element source");
  const ProductDistribution pi = rule(inst);
  const std::size_t axis = pi.space().axis_of(*k);
  const SourceStructure& dist = inst.source(*k);
  for (Element l : dist.omega().elements()) {
    Rat total = 0;
    for (std::size_t t = 0; t < pi.space().size(); ++t)
      if (pi.space().tuples()[t].coords[axis] == l) total += pi.weights()[t];
    if (total != dist.p().at(l))
      return detail::fail(AxiomId::assumption_b,
                          Witness{inst, *k, l, std::nullopt, std::nullopt, std::nullopt,
                                  fraction_string(dist.p().at(l)), fraction_string(total)});
  }
  return detail::pass(AxiomId::assumption_b);
}

/// The proof-sketch ratio step: across every pair of tuples differing in a
/// single coordinate (both with non-zero Dempster probability), the ratio of
/// the rule's weight to Dempster's must be the same on both sides. Running
/// Dempster against itself makes every ratio 1.
inline AxiomVerdict ratio_invariance_check(const CRule& rule, const MultiSourceStructure& s,
                                           std::size_t cap = kDefaultProductCap) {
  const ProductDistribution pi = rule(s);
  const ProductDistribution ds = apply_c_rule(CRuleId::dempster, s, cap);
  const auto& tuples = pi.space().tuples();
  const auto indices = s.indices();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    if (ds.weights()[t] == 0) continue;
    for (std::size_t d = 0; d < indices.size(); ++d) {
      for (Element alt : s.source(indices[d]).omega().elements()) {
        if (alt <= tuples[t].coords[d]) continue;  // each unordered pair once
        ProductElement other = tuples[t];
        other.coords[d] = alt;
        const std::size_t t2 = pi.space().position(other);
        if (ds.weights()[t2] == 0) continue;
        // pi(t)/ds(t) == pi(t2)/ds(t2), cross-multiplied
        if (pi.weights()[t] * ds.weights()[t2] != pi.weights()[t2] * ds.weights()[t])
          return detail::fail(
              AxiomId::ratio_invariance,
              Witness{s, std::nullopt, std::nullopt, std::nullopt, tuples[t], other,
                      fraction_string(pi.weights()[t] / ds.weights()[t]),
                      fraction_string(pi.weights()[t2] / ds.weights()[t2])});
      }
    }
  }
  return detail::pass(AxiomId::ratio_invariance);
}

// CRuleId conveniences for the registered rules.
inline AxiomVerdict check_respects_contradictions(CRuleId rule, const MultiSourceStructure& s) {
  return check_respects_contradictions(c_rule(rule), s);
}
inline AxiomVerdict check_respects_zero_probabilities(CRuleId rule,
                                                      const MultiSourceStructure& s) {
  return check_respects_zero_probabilities(c_rule(rule), s);
}
inline AxiomVerdict check_assumption_a(CRuleId rule, const MultiSourceStructure& s, SourceIndex k,
                                       Element l) {
  return check_assumption_a(c_rule(rule), s, k, l);
}
inline AxiomVerdict check_assumption_a_general(CRuleId rule, const MultiSourceStructure& s,
                                               const ProductSubset& delta) {
  return check_assumption_a_general(c_rule(rule), s, delta);
}
inline AxiomVerdict check_assumption_b(CRuleId rule, const MultiSourceStructure& inst) {
  return check_assumption_b(c_rule(rule), inst);
}
inline AxiomVerdict ratio_invariance_check(CRuleId rule, const MultiSourceStructure& s) {
  return ratio_invariance_check(c_rule(rule), s);
}

/// Re-runs the named check on a witness. Failed verdicts must re-fail here;
/// that is the reproducibility contract, and the shrinker relies on it.
inline AxiomVerdict recheck(const CRule& rule, AxiomId axiom, const Witness& w) {
  switch (axiom) {
    case AxiomId::respects_contradictions:
      return check_respects_contradictions(rule, w.structure);
    case AxiomId::respects_zero_probabilities:
      return check_respects_zero_probabilities(rule, w.structure);
    case AxiomId::assumption_a:
      if (!w.k || !w.l) throw ValidationError("assumption-A witness needs k and l");
      return check_assumption_a(rule, w.structure, *w.k, *w.l);
    case AxiomId::assumption_a_general:
      if (!w.delta) throw ValidationError("assumption-A-general witness needs a product subset");
      return check_assumption_a_general(rule, w.structure, *w.delta);
    case AxiomId::assumption_b:
      return check_assumption_b(rule, w.structure);
    case AxiomId::ratio_invariance:
      return ratio_invariance_check(rule, w.structure);
  }
  throw ValidationError("unknown axiom");
}

// ---------------------------------------------------------------------------
// Deliberately broken rules, used to demonstrate that the constraint checks
// have teeth. Not part of the registered CRuleId set.
// ---------------------------------------------------------------------------

namespace broken_rules {

/// The plain product measure: never zeroes contradictory tuples, so it
/// violates respecting-contradictions whenever there is any conflict.
inline CRule product_without_zeroing(std::size_t cap = kDefaultProductCap) {
  return [cap](const MultiSourceStructure& s) {
    ProductSpace space(s, cap);
    const detail::AxisCache cache(s);
    std::vector<Rat> weight(space.size());
    std::vector<std::size_t> pos(space.indices().size(), 0);
    for (std::size_t t = 0; t < space.size(); ++t) {
      Rat product = 1;
      for (std::size_t d = 0; d < pos.size(); ++d) product *= cache.weight[d][pos[d]];
      weight[t] = product;  // products over the whole space already sum to 1
      for (std::size_t d = pos.size(); d-- > 0;) {
        if (++pos[d] < cache.weight[d].size()) break;
        pos[d] = 0;
      }
    }
    return ProductDistribution(std::move(space), std::move(weight));
  };
}

/// Equal weight over every non-contradictory tuple, ignoring the component
/// probabilities entirely: violates respecting-zero-probabilities.
inline CRule uniform_ignoring_weights(std::size_t cap = kDefaultProductCap) {
  return [cap](const MultiSourceStructure& s) {
    ProductSpace space(s, cap);
    const detail::AxisCache cache(s);
    std::vector<Rat> weight(space.size());
    std::vector<std::size_t> pos(space.indices().size(), 0);
    std::size_t supported = 0;
    for (std::size_t t = 0; t < space.size(); ++t) {
      Subset inter = *cache.image[0][pos[0]];
      for (std::size_t d = 1; d < pos.size() && !inter.empty(); ++d)
        inter = intersect(inter, *cache.image[d][pos[d]]);
      if (!inter.empty()) {
        weight[t] = 1;
        ++supported;
      }
      for (std::size_t d = pos.size(); d-- > 0;) {
        if (++pos[d] < cache.weight[d].size()) break;
        pos[d] = 0;
      }
    }
    if (supported == 0) throw CombinabilityError("not combinable: every tuple is contradictory");
    const Rat share = Rat(1, static_cast<Int>(supported));
    for (auto& w : weight)
      if (w != 0) w = share;
    return ProductDistribution(std::move(space), std::move(weight));
  };
}

}  // namespace broken_rules

}  // namespace evcalc
