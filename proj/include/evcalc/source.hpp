#pragma once

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/mass.hpp"
#include "evcalc/probability.hpp"
#include "evcalc/rational.hpp"

namespace evcalc {

/// A source structure over a frame of interest theta: an underlying frame
/// omega, a probability function over omega, and a compatibility function
/// mapping each underlying possibility to the set of theta-possibilities
/// consistent with it.
///
/// The constructor checks structural consistency only (the probability lives
/// on omega, the compatibility map is total, images stay inside theta).
/// The semantic invariant -- a contradictory image forces zero probability --
/// is what validate_source reports on.
class SourceStructure {
public:
  SourceStructure(Frame theta, Frame omega, PointProbability p,
                  std::map<Element, Subset> compatibility,
                  std::map<Element, std::string> labels = {})
      : theta_(std::move(theta)),
        omega_(std::move(omega)),
        p_(std::move(p)),
        i_(std::move(compatibility)),
        labels_(std::move(labels)) {
    if (p_.frame() != omega_)
      throw ValidationError("probability function is not over the underlying frame");
    if (i_.size() != omega_.size())
      throw ValidationError("compatibility map must cover every underlying element");
    for (const auto& [e, image] : i_) {
      if (!omega_.contains(e))
        throw ValidationError("compatibility map keyed on element " + std::to_string(e) +
                              " outside the underlying frame");
      if (!image.within(theta_))
        throw ValidationError("compatibility image " + image.to_string() +
                              " not within the frame of interest");
    }
    for (const auto& [e, label] : labels_)
      if (!omega_.contains(e))
        throw ValidationError("label on element " + std::to_string(e) +
                              " outside the underlying frame");
  }

  const Frame& theta() const { return theta_; }
  const Frame& omega() const { return omega_; }
  const PointProbability& p() const { return p_; }
  const std::map<Element, Subset>& compatibility() const { return i_; }
  const Subset& image_of(Element e) const { return i_.at(e); }
  const std::map<Element, std::string>& labels() const { return labels_; }

  /// Display label for an underlying element; falls back to the number.
  std::string label_of(Element e) const {
    auto it = labels_.find(e);
    return it == labels_.end() ? std::to_string(e) : it->second;
  }

  bool operator==(const SourceStructure&) const = default;

private:
  Frame theta_;
  Frame omega_;
  PointProbability p_;
  std::map<Element, Subset> i_;
  std::map<Element, std::string> labels_;  // reporting only
};

/// One named invariant violation inside a source structure.
struct SourceViolation {
  Element omega_element;
  std::string detail;
};

struct ValidationReport {
  std::vector<SourceViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    std::ostringstream out;
    for (const auto& v : violations) out << "element " << v.omega_element << ": " << v.detail << "\n";
    return out.str();
  }
};

/// Checks the contradiction/zero-probability invariant (an empty compatibility
/// image forces zero probability) and re-checks the probability invariants.
/// Violations are reported, not thrown, and name the offending element.
inline ValidationReport validate_source(const SourceStructure& s) {
  ValidationReport report;
  Rat total = 0;
  for (const auto& [e, w] : s.p().weights()) {
    total += w;
    if (w < 0) report.violations.push_back({e, "negative weight " + fraction_string(w)});
    if (s.image_of(e).empty() && w != 0)
      report.violations.push_back(
          {e, "contradictory image with non-zero weight " + fraction_string(w)});
  }
  if (total != 1 && !s.p().weights().empty())
    report.violations.push_back(
        {s.p().weights().begin()->first, "weights sum to " + fraction_string(total) + ", not 1"});
  return report;
}

/// m(X) = sum of P over the underlying elements whose image is X.
/// Zero totals are dropped; the result is normalized because contradictory
/// elements carry no weight in a valid source.
inline MassFunction mass_of_source(const SourceStructure& s) {
  auto report = validate_source(s);
  if (!report.ok()) throw ValidationError("invalid source:\n" + report.to_string());
  std::map<Subset, Rat> mass;
  for (const auto& [e, image] : s.compatibility()) mass[image] += s.p().at(e);
  return MassFunction(s.theta(), std::move(mass));
}

/// Canonical source for a mass function: underlying elements 0..k-1 paired
/// with the focal elements in canonical subset order, weights matching.
/// mass_of_source inverts this exactly.
inline SourceStructure source_from_mass(const MassFunction& m) {
  if (!m.normalized()) throw ValidationError("canonical source requires a normalized mass function");
  std::map<Element, Rat> weights;
  std::map<Element, Subset> compatibility;
  Element next = 0;
  for (const auto& [set, value] : m.entries()) {
    weights.emplace(next, value);
    compatibility.emplace(next, set);
    ++next;
  }
  Frame omega = Frame::range(m.entries().size());
  return SourceStructure(m.theta(), omega, PointProbability(omega, std::move(weights)),
                         std::move(compatibility));
}

/// Single-element source representing certain evidence for `focal`.
inline SourceStructure certain_source(const Frame& theta, const Subset& focal) {
  if (focal.empty()) throw ValidationError("certain evidence cannot be contradictory");
  Frame omega = Frame::range(1);
  return SourceStructure(theta, omega, PointProbability(omega, {Rat(1)}), {{0, focal}});
}

}  // namespace evcalc
