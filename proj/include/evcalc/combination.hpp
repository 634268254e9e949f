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

#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/mass.hpp"
#include "evcalc/probability.hpp"
#include "evcalc/rational.hpp"
#include "evcalc/source.hpp"

namespace evcalc {

using SourceIndex = std::uint32_t;

/// Finite indexed family of source structures over one common frame of
/// interest. Index gaps are fine; the index set is whatever the map holds.
/// Construction validates every component source.
class MultiSourceStructure {
public:
  MultiSourceStructure(Frame theta, std::map<SourceIndex, SourceStructure> sources)
      : theta_(std::move(theta)), sources_(std::move(sources)) {
    if (sources_.empty()) throw ValidationError("multiple source structure needs at least one source");
    for (const auto& [index, source] : sources_) {
      if (source.theta() != theta_)
        throw ValidationError("source " + std::to_string(index) +
                              " is over a different frame of interest");
      if (auto report = validate_source(source); !report.ok())
        throw ValidationError("source " + std::to_string(index) + " invalid:\n" +
                              report.to_string());
    }
  }

  const Frame& theta() const { return theta_; }
  const std::map<SourceIndex, SourceStructure>& sources() const { return sources_; }
  std::size_t arity() const { return sources_.size(); }

  const SourceStructure& source(SourceIndex i) const {
    auto it = sources_.find(i);
    if (it == sources_.end()) throw ValidationError("no source with index " + std::to_string(i));
    return it->second;
  }
  bool has_index(SourceIndex i) const { return sources_.count(i) != 0; }

  /// Sorted index set.
  std::vector<SourceIndex> indices() const {
    std::vector<SourceIndex> out;
    out.reserve(sources_.size());
    for (const auto& [index, source] : sources_) out.push_back(index);
    return out;
  }

  bool operator==(const MultiSourceStructure&) const = default;

private:
  Frame theta_;
  std::map<SourceIndex, SourceStructure> sources_;
};

/// One element of the product underlying frame: a choice of underlying
/// element per source, positionally aligned with the structure's sorted
/// index set.
struct ProductElement {
  std::vector<Element> coords;
  bool operator==(const ProductElement&) const = default;
  auto operator<=>(const ProductElement& other) const {
    return std::compare_strong_order_fallback(coords, other.coords);
  }
};

inline constexpr std::size_t kDefaultProductCap = 1'000'000;

/// The full product of the underlying frames, enumerated lexicographically
/// (sorted source indices; ascending element order inside each axis).
class ProductSpace {
public:
  explicit ProductSpace(const MultiSourceStructure& s, std::size_t cap = kDefaultProductCap)
      : indices_(s.indices()) {
    Int cardinality = 1;
    axes_.reserve(indices_.size());
    for (SourceIndex i : indices_) {
      axes_.push_back(s.source(i).omega().elements());
      cardinality *= axes_.back().size();
    }
    if (cardinality > cap)
      throw CapError("product space has " + cardinality.str() + " tuples, cap is " +
                     std::to_string(cap));
    const std::size_t n = static_cast<std::size_t>(cardinality);
    tuples_.reserve(n);
    std::vector<std::size_t> pos(axes_.size(), 0);
    for (std::size_t t = 0; t < n; ++t) {
      ProductElement e;
      e.coords.reserve(axes_.size());
      for (std::size_t d = 0; d < axes_.size(); ++d) e.coords.push_back(axes_[d][pos[d]]);
      tuples_.push_back(std::move(e));
      for (std::size_t d = axes_.size(); d-- > 0;) {
        if (++pos[d] < axes_[d].size()) break;
        pos[d] = 0;
      }
    }
  }

  const std::vector<SourceIndex>& indices() const { return indices_; }
  const std::vector<ProductElement>& tuples() const { return tuples_; }
  std::size_t size() const { return tuples_.size(); }

  /// Axis position of a source index.
  std::size_t axis_of(SourceIndex k) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), k);
    if (it == indices_.end() || *it != k)
      throw ValidationError("no source with index " + std::to_string(k));
    return static_cast<std::size_t>(it - indices_.begin());
  }

  /// Position of a tuple in enumeration order (mixed-radix decode).
  std::size_t position(const ProductElement& e) const {
    if (e.coords.size() != axes_.size())
      throw ValidationError("tuple arity does not match the product space");
    std::size_t pos = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
      const auto& axis = axes_[d];
      auto it = std::lower_bound(axis.begin(), axis.end(), e.coords[d]);
      if (it == axis.end() || *it != e.coords[d])
        throw ValidationError("tuple coordinate " + std::to_string(e.coords[d]) +
                              " not in axis " + std::to_string(d));
      pos = pos * axis.size() + static_cast<std::size_t>(it - axis.begin());
    }
    return pos;
  }

private:
  std::vector<SourceIndex> indices_;
  std::vector<std::vector<Element>> axes_;
  std::vector<ProductElement> tuples_;
};

/// Every element of the product underlying frame, exactly once, in
/// lexicographic order.
inline std::vector<ProductElement> enumerate_product(const MultiSourceStructure& s,
                                                     std::size_t cap = kDefaultProductCap) {
  return ProductSpace(s, cap).tuples();
}

/// I^s(w): the intersection of the component images. The strongest
/// proposition deducible from the tuple; may be empty.
inline Subset combined_compatibility(const MultiSourceStructure& s, const ProductElement& w) {
  const auto indices = s.indices();
  if (w.coords.size() != indices.size())
    throw ValidationError("tuple arity does not match the structure");
  std::optional<Subset> inter;
  for (std::size_t d = 0; d < indices.size(); ++d) {
    const SourceStructure& src = s.source(indices[d]);
    if (!src.omega().contains(w.coords[d]))
      throw ValidationError("coordinate " + std::to_string(w.coords[d]) +
                            " not in the underlying frame of source " +
                            std::to_string(indices[d]));
    const Subset& image = src.image_of(w.coords[d]);
    inter = inter ? intersect(*inter, image) : image;
    if (inter->empty()) return *inter;
  }
  return *inter;
}

/// True iff some tuple has non-zero weight in every coordinate and a
/// non-empty combined image. Depth-first with pruning on the running
/// intersection, so no product enumeration is needed.
inline bool is_combinable(const MultiSourceStructure& s) {
  const auto indices = s.indices();
  std::function<bool(std::size_t, const Subset&)> dfs = [&](std::size_t d,
                                                            const Subset& inter) -> bool {
    if (d == indices.size()) return !inter.empty();
    const SourceStructure& src = s.source(indices[d]);
    for (Element e : src.omega().elements()) {
      if (src.p().at(e) == 0) continue;
      Subset next = d == 0 ? src.image_of(e) : intersect(inter, src.image_of(e));
      if (next.empty()) continue;
      if (dfs(d + 1, next)) return true;
    }
    return false;
  };
  return dfs(0, Subset());
}

/// A C-rule output: a probability function over the product underlying
/// frame, addressable by tuple.
class ProductDistribution {
public:
  ProductDistribution(ProductSpace space, std::vector<Rat> weight)
      : space_(std::move(space)), weight_(std::move(weight)) {
    if (weight_.size() != space_.size())
      throw ValidationError("weight count does not match the product space");
  }

  const ProductSpace& space() const { return space_; }
  const std::vector<Rat>& weights() const { return weight_; }

  const Rat& weight_of(const ProductElement& e) const { return weight_[space_.position(e)]; }

  Rat total(const std::vector<ProductElement>& tuples) const {
    Rat sum = 0;
    for (const auto& t : tuples) sum += weight_of(t);
    return sum;
  }

  /// The same distribution over the canonically relabelled frame 0..N-1.
  PointProbability to_point_probability() const {
    Frame frame = Frame::range(weight_.size());
    std::map<Element, Rat> w;
    for (std::size_t j = 0; j < weight_.size(); ++j) w.emplace(static_cast<Element>(j), weight_[j]);
    return PointProbability(std::move(frame), std::move(w));
  }

private:
  ProductSpace space_;
  std::vector<Rat> weight_;
};

/// The probabilistic third component of a combination rule.
enum class CRuleId { dempster, uniform, squared };

inline std::string_view to_string(CRuleId id) {
  switch (id) {
    case CRuleId::dempster: return "dempster";
    case CRuleId::uniform: return "uniform";
    case CRuleId::squared: return "squared";
  }
  return "?";
}

inline std::optional<CRuleId> parse_c_rule(std::string_view name) {
  if (name == "dempster") return CRuleId::dempster;
  if (name == "uniform") return CRuleId::uniform;
  if (name == "squared") return CRuleId::squared;
  return std::nullopt;
}

namespace detail {

/// Per-axis weights and images, cached once per evaluation.
struct AxisCache {
  std::vector<std::vector<Rat>> weight;            // [axis][pos]
  std::vector<std::vector<const Subset*>> image;   // [axis][pos]

  explicit AxisCache(const MultiSourceStructure& s) {
    for (SourceIndex i : s.indices()) {
      const SourceStructure& src = s.source(i);
      std::vector<Rat> w;
      std::vector<const Subset*> im;
      for (Element e : src.omega().elements()) {
        w.push_back(src.p().at(e));
        im.push_back(&src.image_of(e));
      }
      weight.push_back(std::move(w));
      image.push_back(std::move(im));
    }
  }
};

}  // namespace detail

/// Evaluates one of the registered C-rules over the product space.
///
///  - dempster: 0 on contradictory tuples, else the product of the component
///    weights, scaled by the constant that makes the total 1.
///  - uniform:  equal weight over the tuples that are non-contradictory and
///    have no zero-weight coordinate.
///  - squared:  same support as uniform, weight proportional to the squared
///    product of the component weights.
///
/// All three respect contradictions and zero probabilities by construction.
/// A structure with empty support is not combinable and raises
/// CombinabilityError.
inline ProductDistribution apply_c_rule(CRuleId rule, const MultiSourceStructure& s,
                                        std::size_t cap = kDefaultProductCap) {
  ProductSpace space(s, cap);
  const detail::AxisCache cache(s);
  const std::size_t axes = space.indices().size();
  std::vector<Rat> weight(space.size(), Rat(0));
  std::vector<std::size_t> pos(axes, 0);
  Rat total = 0;
  std::size_t supported = 0;
  for (std::size_t t = 0; t < space.size(); ++t) {
    bool zero_factor = false;
    Rat product = 1;
    for (std::size_t d = 0; d < axes; ++d) {
      const Rat& w = cache.weight[d][pos[d]];
      if (w == 0) {
        zero_factor = true;
        break;
      }
      product *= w;
    }
    if (!zero_factor) {
      bool contradictory = false;
      Subset inter = *cache.image[0][pos[0]];
      for (std::size_t d = 1; d < axes && !inter.empty(); ++d)
        inter = intersect(inter, *cache.image[d][pos[d]]);
      contradictory = inter.empty();
      if (!contradictory) {
        ++supported;
        switch (rule) {
          case CRuleId::dempster:
            weight[t] = product;
            total += product;
            break;
          case CRuleId::uniform:
            weight[t] = 1;  // placeholder, scaled below
            break;
          case CRuleId::squared:
            weight[t] = product * product;
            total += weight[t];
            break;
        }
      }
    }
    for (std::size_t d = axes; d-- > 0;) {
      if (++pos[d] < cache.weight[d].size()) break;
      pos[d] = 0;
    }
  }
  if (supported == 0)
    throw CombinabilityError(
        "not combinable: every tuple is contradictory or carries a zero factor");
  if (rule == CRuleId::uniform) {
    const Rat share = Rat(1, static_cast<Int>(supported));
    for (auto& w : weight)
      if (w != 0) w = share;
  } else {
    for (auto& w : weight)
      if (w != 0) w /= total;
  }
  return ProductDistribution(std::move(space), std::move(weight));
}

/// A C-rule as a value, so checks can also be run against unregistered
/// (deliberately broken) rules.
using CRule = std::function<ProductDistribution(const MultiSourceStructure&)>;

inline CRule c_rule(CRuleId id, std::size_t cap = kDefaultProductCap) {
  return [id, cap](const MultiSourceStructure& s) { return apply_c_rule(id, s, cap); };
}

/// Display form "(i:label,...)" of a tuple, using source labels when present.
inline std::string render_tuple(const MultiSourceStructure& s, const ProductElement& w) {
  const auto indices = s.indices();
  std::ostringstream out;
  out << '(';
  for (std::size_t d = 0; d < indices.size(); ++d) {
    if (d) out << ',';
    out << indices[d] << ':' << s.source(indices[d]).label_of(w.coords[d]);
  }
  out << ')';
  return out.str();
}

/// Dempster's combination rule: the product space (relabelled 0..N-1 in
/// enumeration order), the Dempster C-rule probabilities, and the combined
/// compatibility function. Provenance labels "(i:element,...)" are kept for
/// reporting.
inline SourceStructure dempster_combine(const MultiSourceStructure& s,
                                        std::size_t cap = kDefaultProductCap) {
  ProductDistribution dist = apply_c_rule(CRuleId::dempster, s, cap);
  const auto& tuples = dist.space().tuples();
  Frame omega = Frame::range(tuples.size());
  std::map<Element, Rat> weights;
  std::map<Element, Subset> compatibility;
  std::map<Element, std::string> labels;
  for (std::size_t j = 0; j < tuples.size(); ++j) {
    const auto e = static_cast<Element>(j);
    weights.emplace(e, dist.weights()[j]);
    compatibility.emplace(e, combined_compatibility(s, tuples[j]));
    labels.emplace(e, render_tuple(s, tuples[j]));
  }
  return SourceStructure(s.theta(), omega, PointProbability(omega, std::move(weights)),
                         std::move(compatibility), std::move(labels));
}

namespace detail {

inline void combine_masses_rec(const std::vector<MassFunction>& ms, std::size_t depth,
                               const Subset& inter, const Rat& product,
                               std::map<Subset, Rat>& acc, Rat& conflict) {
  if (depth == ms.size()) {
    acc[inter] += product;
    return;
  }
  for (const auto& [set, value] : ms[depth].entries()) {
    Subset next = depth == 0 ? set : intersect(inter, set);
    if (next.empty()) {
      conflict += product * value;  // everything below this branch stays empty
      continue;
    }
    combine_masses_rec(ms, depth + 1, next, product * value, acc, conflict);
  }
}

inline void check_mass_inputs(const std::vector<MassFunction>& ms) {
  if (ms.empty()) throw ValidationError("need at least one mass function");
  for (const auto& m : ms) {
    if (m.theta() != ms.front().theta())
      throw ValidationError("mass functions are over different frames");
    if (!m.normalized()) throw ValidationError("combination inputs must be normalized");
  }
}

}  // namespace detail

/// Mass-level Dempster combination: m(X) is proportional to the total
/// product mass of the focal tuples whose intersection is X (X non-empty),
/// normalized. Agrees exactly with combining the canonical sources.
inline MassFunction dempster_combine_masses(const std::vector<MassFunction>& ms) {
  detail::check_mass_inputs(ms);
  std::map<Subset, Rat> acc;
  Rat conflict = 0;
  detail::combine_masses_rec(ms, 0, Subset(), Rat(1), acc, conflict);
  if (conflict == 1) throw CombinabilityError("total conflict: all focal tuples are disjoint");
  const Rat k = Rat(1) - conflict;
  for (auto& [set, value] : acc) value /= k;
  return MassFunction(ms.front().theta(), std::move(acc));
}

/// The non-normalised combination: the same sum, but the empty set keeps
/// its mass and nothing is rescaled. The output may carry mass on {}.
inline MassFunction unnormalized_combine_masses(const std::vector<MassFunction>& ms) {
  detail::check_mass_inputs(ms);
  std::map<Subset, Rat> acc;
  Rat conflict = 0;
  detail::combine_masses_rec(ms, 0, Subset(), Rat(1), acc, conflict);
  if (conflict != 0) acc[Subset()] += conflict;
  return MassFunction(ms.front().theta(), std::move(acc));
}

}  // namespace evcalc
