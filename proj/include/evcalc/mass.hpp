#pragma once

#include <map>
#include <utility>
#include <vector>

#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/rational.hpp"

namespace evcalc {

/// Mass function over the subsets of a frame of interest. Only subsets with
/// non-zero mass are stored, so equality is structural. Masses are positive
/// and sum to exactly 1.
///
/// A mass function is "normalized" when the empty set carries no mass. Every
/// operation except the non-normalised combination requires normalized
/// values; the non-normalised rule is the one producer of mass on {}.
class MassFunction {
public:
  MassFunction(Frame theta, std::map<Subset, Rat> mass)
      : theta_(std::move(theta)), mass_(std::move(mass)) {
    Rat total = 0;
    for (auto it = mass_.begin(); it != mass_.end();) {
      const auto& [set, value] = *it;
      if (!set.within(theta_))
        throw ValidationError("focal element " + set.to_string() + " not within the frame");
      if (value < 0)
        throw ValidationError("negative mass on " + set.to_string());
      total += value;
      if (value == 0) {
        it = mass_.erase(it);  // zero-mass entries are never stored
      } else {
        ++it;
      }
    }
    if (total != 1)
      throw ValidationError("masses sum to " + fraction_string(total) + ", not 1");
  }

  /// The vacuous mass function: all mass on the whole frame.
  static MassFunction vacuous(const Frame& theta) {
    std::map<Subset, Rat> m;
    m.emplace(Subset::full(theta), Rat(1));
    return MassFunction(theta, std::move(m));
  }

  const Frame& theta() const { return theta_; }

  /// Entries in canonical subset order (cardinality, then lexicographic).
  const std::map<Subset, Rat>& entries() const { return mass_; }

  Rat mass_of(const Subset& x) const {
    auto it = mass_.find(x);
    return it == mass_.end() ? Rat(0) : it->second;
  }

  bool normalized() const { return mass_.find(Subset()) == mass_.end(); }

  bool operator==(const MassFunction&) const = default;

private:
  Frame theta_;
  std::map<Subset, Rat> mass_;
};

/// The subsets with non-zero mass, in canonical order.
inline std::vector<Subset> focal_elements(const MassFunction& m) {
  std::vector<Subset> out;
  out.reserve(m.entries().size());
  for (const auto& [set, value] : m.entries()) out.push_back(set);
  return out;
}

/// Bel(X): total mass of the non-empty focal elements contained in X.
/// Bel({}) = 0 and Bel(theta) = 1 fall out of normalization.
inline Rat belief_from_mass(const MassFunction& m, const Subset& x) {
  if (!m.normalized()) throw ValidationError("belief requires a normalized mass function");
  if (!x.within(m.theta()))
    throw ValidationError("set " + x.to_string() + " not within the mass function's frame");
  Rat sum = 0;
  for (const auto& [set, value] : m.entries())
    if (set.subset_of(x)) sum += value;
  return sum;
}

}  // namespace evcalc
