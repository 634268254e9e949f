#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evcalc/combination.hpp"
#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/mass.hpp"
#include "evcalc/probability.hpp"
#include "evcalc/rational.hpp"
#include "evcalc/source.hpp"

namespace evcalc {

/// Bayesian conditioning of a probability function on certain evidence:
/// weights P(e)/P(delta) over the members of delta.
inline PointProbability condition_probability(const PointProbability& p, const Subset& delta) {
  const Rat denom = p.total(delta);
  if (denom == 0)
    throw ConditioningError("conditioning on " + delta.to_string() + " which has probability 0");
  Frame frame(delta.members());
  std::map<Element, Rat> weights;
  for (Element e : delta.members()) weights.emplace(e, p.at(e) / denom);
  return PointProbability(std::move(frame), std::move(weights));
}

/// Bayesian conditioning of a source structure: restrict the underlying
/// frame to delta, rescale the weights, restrict the compatibility function.
/// Element identities are kept, so the restriction is literal.
inline SourceStructure condition_source(const SourceStructure& s, const Subset& delta) {
  PointProbability conditioned = condition_probability(s.p(), delta);
  std::map<Element, Subset> compatibility;
  std::map<Element, std::string> labels;
  for (Element e : delta.members()) {
    compatibility.emplace(e, s.image_of(e));
    if (auto it = s.labels().find(e); it != s.labels().end()) labels.emplace(e, it->second);
  }
  Frame omega = conditioned.frame();
  return SourceStructure(s.theta(), std::move(omega), std::move(conditioned),
                         std::move(compatibility), std::move(labels));
}

/// Geometric conditioning by a subset A of the frame of interest:
/// Bayesian conditioning on the underlying elements whose image lies
/// inside A. The induced masses are m(X)/Bel(A) for X inside A.
inline SourceStructure geometric_condition(const SourceStructure& s, const Subset& a) {
  if (!a.within(s.theta()))
    throw ValidationError("set " + a.to_string() + " not within the frame of interest");
  std::vector<Element> members;
  for (const auto& [e, image] : s.compatibility())
    if (image.subset_of(a)) members.push_back(e);
  Subset delta(std::move(members));
  if (delta.empty() || s.p().total(delta) == 0)
    throw ConditioningError("belief in " + a.to_string() + " is 0; cannot condition");
  return condition_source(s, delta);
}

/// A product subset of the product underlying frame: one non-empty part
/// per source index. The parts are exactly the projections.
struct ProductSubset {
  std::map<SourceIndex, Subset> parts;
  bool operator==(const ProductSubset&) const = default;
};

inline ProductSubset full_product_subset(const MultiSourceStructure& s) {
  ProductSubset delta;
  for (const auto& [index, source] : s.sources())
    delta.parts.emplace(index, Subset::full(source.omega()));
  return delta;
}

namespace detail {

inline void check_product_subset(const MultiSourceStructure& s, const ProductSubset& delta) {
  if (delta.parts.size() != s.arity())
    throw ValidationError("product subset must have one part per source");
  for (const auto& [index, part] : delta.parts) {
    if (!s.has_index(index))
      throw ValidationError("product subset part for unknown index " + std::to_string(index));
    if (part.empty())
      throw ValidationError("product subset part for index " + std::to_string(index) +
                            " is empty");
    if (!part.within(s.source(index).omega()))
      throw ValidationError("product subset part " + part.to_string() +
                            " not within the underlying frame of source " + std::to_string(index));
  }
}

}  // namespace detail

/// The tuples of a product subset, in the enclosing space's lexicographic
/// order.
inline std::vector<ProductElement> product_subset_tuples(const MultiSourceStructure& s,
                                                         const ProductSubset& delta) {
  detail::check_product_subset(s, delta);
  std::vector<const std::vector<Element>*> axes;
  for (const auto& [index, part] : delta.parts) axes.push_back(&part.members());
  std::vector<ProductElement> out;
  std::vector<std::size_t> pos(axes.size(), 0);
  std::size_t n = 1;
  for (const auto* axis : axes) n *= axis->size();
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    ProductElement e;
    e.coords.reserve(axes.size());
    for (std::size_t d = 0; d < axes.size(); ++d) e.coords.push_back((*axes[d])[pos[d]]);
    out.push_back(std::move(e));
    for (std::size_t d = axes.size(); d-- > 0;) {
      if (++pos[d] < axes[d]->size()) break;
      pos[d] = 0;
    }
  }
  return out;
}

/// The cylindrical extension of l at source k, and its complement:
/// E = tuples whose k-coordinate is l, notE = the rest of the product.
inline std::pair<std::vector<ProductElement>, std::vector<ProductElement>> cylinder(
    const MultiSourceStructure& s, SourceIndex k, Element l,
    std::size_t cap = kDefaultProductCap) {
  if (!s.has_index(k)) throw ValidationError("no source with index " + std::to_string(k));
  if (!s.source(k).omega().contains(l))
    throw ValidationError("element " + std::to_string(l) + " not in the underlying frame of source " +
                          std::to_string(k));
  ProductSpace space(s, cap);
  const std::size_t axis = space.axis_of(k);
  std::pair<std::vector<ProductElement>, std::vector<ProductElement>> out;
  for (const auto& t : space.tuples())
    (t.coords[axis] == l ? out.first : out.second).push_back(t);
  return out;
}

/// The complement cylinder as a product subset (part k drops l, every other
/// part is full). Empty when source k has a single element, in which case
/// there is nothing to condition on.
inline std::optional<ProductSubset> complement_cylinder(const MultiSourceStructure& s,
                                                        SourceIndex k, Element l) {
  if (!s.has_index(k)) throw ValidationError("no source with index " + std::to_string(k));
  const SourceStructure& src = s.source(k);
  if (!src.omega().contains(l))
    throw ValidationError("element " + std::to_string(l) + " not in the underlying frame of source " +
                          std::to_string(k));
  Subset rest = set_difference(Subset::full(src.omega()), Subset({l}));
  if (rest.empty()) return std::nullopt;
  ProductSubset delta = full_product_subset(s);
  delta.parts[k] = std::move(rest);
  return delta;
}

/// Component-wise Bayesian conditioning of a multiple source structure on a
/// product subset. Fails naming the first index whose part has probability 0.
inline MultiSourceStructure condition_mss(const MultiSourceStructure& s,
                                          const ProductSubset& delta) {
  detail::check_product_subset(s, delta);
  std::map<SourceIndex, SourceStructure> conditioned;
  for (const auto& [index, part] : delta.parts) {
    const SourceStructure& src = s.source(index);
    if (src.p().total(part) == 0)
      throw ConditioningError("part for index " + std::to_string(index) + " has probability 0");
    conditioned.emplace(index, condition_source(src, part));
  }
  return MultiSourceStructure(s.theta(), std::move(conditioned));
}

/// Standard discounting: scale every mass by (1-eps) and move eps onto the
/// whole frame, which becomes focal whenever eps > 0.
inline MassFunction discount_mass(const MassFunction& m, const Rat& eps) {
  if (eps < 0 || eps >= 1)
    throw ValidationError("discount rate " + fraction_string(eps) + " outside [0, 1)");
  if (!m.normalized()) throw ValidationError("discounting requires a normalized mass function");
  std::map<Subset, Rat> mass;
  for (const auto& [set, value] : m.entries()) mass[set] = value * (Rat(1) - eps);
  mass[Subset::full(m.theta())] += eps;
  return MassFunction(m.theta(), std::move(mass));
}

/// Source-level discounting: a fresh underlying element mapped to the whole
/// frame takes weight eps, everything else scales by (1-eps). The induced
/// mass function is exactly discount_mass of the original's.
inline SourceStructure discount_source(const SourceStructure& s, const Rat& eps) {
  if (eps < 0 || eps >= 1)
    throw ValidationError("discount rate " + fraction_string(eps) + " outside [0, 1)");
  if (eps == 0) return s;
  const Element fresh = s.omega().elements().back() + 1;
  std::vector<Element> elems = s.omega().elements();
  elems.push_back(fresh);
  Frame omega(std::move(elems));
  std::map<Element, Rat> weights;
  for (const auto& [e, w] : s.p().weights()) weights.emplace(e, w * (Rat(1) - eps));
  weights.emplace(fresh, eps);
  std::map<Element, Subset> compatibility = s.compatibility();
  compatibility.emplace(fresh, Subset::full(s.theta()));
  return SourceStructure(s.theta(), omega, PointProbability(omega, std::move(weights)),
                         std::move(compatibility), s.labels());
}

}  // namespace evcalc
