#pragma once

#include <map>
#include <utility>
#include <vector>

#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/rational.hpp"

namespace evcalc {

/// Additive probability function over a frame, stored pointwise.
/// Weights are total over the frame, non-negative, and sum to exactly 1;
/// the constructor rejects anything else. P(A) for a set A is the sum of
/// the point weights over A.
class PointProbability {
public:
  PointProbability(Frame frame, std::map<Element, Rat> weight)
      : frame_(std::move(frame)), weight_(std::move(weight)) {
    Rat total = 0;
    for (const auto& [e, w] : weight_) {
      if (!frame_.contains(e))
        throw ValidationError("weight on element " + std::to_string(e) + " outside the frame");
      if (w < 0)
        throw ValidationError("negative weight on element " + std::to_string(e));
      total += w;
    }
    if (weight_.size() != frame_.size())
      throw ValidationError("weights must cover every frame element");
    if (total != 1)
      throw ValidationError("weights sum to " + fraction_string(total) + ", not 1");
  }

  /// Convenience: weights listed in the frame's sorted element order.
  PointProbability(const Frame& frame, const std::vector<Rat>& weights)
      : PointProbability(frame, zip(frame, weights)) {}
  PointProbability(const Frame& frame, std::initializer_list<Rat> weights)
      : PointProbability(frame, std::vector<Rat>(weights)) {}

  const Frame& frame() const { return frame_; }
  const std::map<Element, Rat>& weights() const { return weight_; }

  const Rat& at(Element e) const {
    auto it = weight_.find(e);
    if (it == weight_.end())
      throw ValidationError("element " + std::to_string(e) + " not in probability domain");
    return it->second;
  }

  /// P(A). A must live inside the frame.
  Rat total(const Subset& a) const {
    if (!a.within(frame_)) throw ValidationError("set " + a.to_string() + " not within the frame");
    Rat sum = 0;
    for (Element e : a.members()) sum += weight_.at(e);
    return sum;
  }

  bool operator==(const PointProbability&) const = default;

private:
  static std::map<Element, Rat> zip(const Frame& frame, const std::vector<Rat>& weights) {
    if (weights.size() != frame.size())
      throw ValidationError("weight count does not match frame size");
    std::map<Element, Rat> w;
    for (std::size_t i = 0; i < weights.size(); ++i) w.emplace(frame.elements()[i], weights[i]);
    return w;
  }

  Frame frame_;
  std::map<Element, Rat> weight_;
};

}  // namespace evcalc
