#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "evcalc/errors.hpp"

namespace evcalc {

/// Frames are finite sets of natural numbers; each number names one of a
/// family of mutually exclusive, exhaustive propositions.
using Element = std::uint64_t;

/// Non-empty, strictly sorted set of elements.
class Frame {
public:
  explicit Frame(std::vector<Element> elements) : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end());
    if (elements_.empty()) throw ValidationError("frame must be non-empty");
    if (std::adjacent_find(elements_.begin(), elements_.end()) != elements_.end())
      throw ValidationError("frame has duplicate elements");
  }
  Frame(std::initializer_list<Element> elements) : Frame(std::vector<Element>(elements)) {}

  /// The frame {0, 1, ..., n-1}; used to relabel product spaces canonically.
  static Frame range(std::size_t n) {
    std::vector<Element> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = static_cast<Element>(i);
    return Frame(std::move(e));
  }

  const std::vector<Element>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }

  bool contains(Element e) const {
    return std::binary_search(elements_.begin(), elements_.end(), e);
  }

  /// Position of e in sorted order; e must be a member.
  std::size_t index_of(Element e) const {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), e);
    if (it == elements_.end() || *it != e)
      throw ValidationError("element " + std::to_string(e) + " not in frame");
    return static_cast<std::size_t>(it - elements_.begin());
  }

  bool operator==(const Frame&) const = default;

private:
  std::vector<Element> elements_;
};

/// A set of elements, possibly empty. Subsets are plain values; membership
/// in a particular frame is checked wherever a subset joins a frame-bearing
/// structure (mass functions, compatibility maps, evidence files).
///
/// Ordering is by cardinality, then lexicographically on the sorted members.
/// That single order drives every deterministic output in the library:
/// focal-element listings, canonical source construction, report lines.
class Subset {
public:
  Subset() = default;
  explicit Subset(std::vector<Element> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }
  Subset(std::initializer_list<Element> members) : Subset(std::vector<Element>(members)) {}

  static Subset full(const Frame& frame) { return Subset(frame.elements()); }

  const std::vector<Element>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }

  bool contains(Element e) const {
    return std::binary_search(members_.begin(), members_.end(), e);
  }

  bool subset_of(const Subset& other) const {
    return std::includes(other.members_.begin(), other.members_.end(),
                         members_.begin(), members_.end());
  }
  bool within(const Frame& frame) const {
    return std::includes(frame.elements().begin(), frame.elements().end(),
                         members_.begin(), members_.end());
  }

  bool operator==(const Subset&) const = default;

  // cardinality, then lexicographic
  std::strong_ordering operator<=>(const Subset& other) const {
    if (auto c = members_.size() <=> other.members_.size(); c != 0) return c;
    return std::compare_strong_order_fallback(members_, other.members_);
  }

  std::string to_string() const {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) out << ',';
      out << members_[i];
    }
    out << '}';
    return out.str();
  }

private:
  std::vector<Element> members_;
};

inline Subset intersect(const Subset& a, const Subset& b) {
  std::vector<Element> out;
  std::set_intersection(a.members().begin(), a.members().end(),
                        b.members().begin(), b.members().end(),
                        std::back_inserter(out));
  return Subset(std::move(out));
}

inline Subset set_difference(const Subset& a, const Subset& b) {
  std::vector<Element> out;
  std::set_difference(a.members().begin(), a.members().end(),
                      b.members().begin(), b.members().end(),
                      std::back_inserter(out));
  return Subset(std::move(out));
}

/// All 2^|frame| subsets in canonical order. Meant for small frames.
inline std::vector<Subset> all_subsets(const Frame& frame) {
  if (frame.size() > 24) throw CapError("frame too large to enumerate subsets: 2^" +
                                        std::to_string(frame.size()));
  const auto& elems = frame.elements();
  std::vector<Subset> out;
  out.reserve(std::size_t{1} << frame.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << frame.size()); ++mask) {
    std::vector<Element> members;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) members.push_back(elems[i]);
    out.emplace_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace evcalc
