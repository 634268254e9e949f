#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evcalc/axioms.hpp"
#include "evcalc/combination.hpp"
#include "evcalc/conditioning.hpp"
#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/probability.hpp"
#include "evcalc/rational.hpp"
#include "evcalc/source.hpp"

namespace evcalc {

/// Deterministic 64-bit generator (splitmix64). Identical streams on every
/// platform, which std:: distributions do not guarantee.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform-ish draw in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Inclusive range.
  std::uint64_t in(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

private:
  std::uint64_t state_;
};

/// Bounds for the random-instance generator. The defaults match the desk
/// scale the acceptance suite runs at.
struct GeneratorConfig {
  std::size_t max_sources = 3;
  std::size_t max_omega_size = 3;
  std::size_t max_theta_size = 4;
  std::uint64_t denominator_bound = 12;
  std::uint64_t seed = 0;
  std::size_t trials = 10000;
  bool discounted = false;  // give every source a positive discount, making theta focal

  void validate() const {
    if (max_sources < 1 || max_omega_size < 1 || max_theta_size < 1 || denominator_bound < 1)
      throw ValidationError("generator bounds must be at least 1");
    if (max_omega_size > 32 || max_theta_size > 32)
      throw ValidationError("generator frame bounds above 32 are not supported");
  }
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) {
  SplitMix64 rng(seed ^ (trial * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull));
  return rng.next();
}

inline Subset random_nonempty_subset(SplitMix64& rng, const std::vector<Element>& pool) {
  const std::uint64_t mask = rng.in(1, (std::uint64_t{1} << pool.size()) - 1);
  std::vector<Element> members;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (mask & (std::uint64_t{1} << i)) members.push_back(pool[i]);
  return Subset(std::move(members));
}

inline SourceStructure random_source(SplitMix64& rng, const Frame& theta,
                                     const GeneratorConfig& cfg) {
  const std::size_t omega_size = rng.in(1, cfg.max_omega_size);
  Frame omega = Frame::range(omega_size);

  // Images first: occasionally contradictory (forcing weight 0), at least
  // one element kept possible.
  std::map<Element, Subset> compatibility;
  std::vector<Element> possible;
  for (Element e : omega.elements()) {
    const bool contradictory = omega_size > 1 && rng.below(8) == 0;
    if (contradictory) {
      compatibility.emplace(e, Subset());
    } else {
      compatibility.emplace(e, random_nonempty_subset(rng, theta.elements()));
      possible.push_back(e);
    }
  }
  if (possible.empty()) {
    const Element e = omega.elements()[0];
    compatibility[e] = random_nonempty_subset(rng, theta.elements());
    possible.push_back(e);
  }

  // Split a common denominator over the possible elements, so every reduced
  // weight has denominator within the bound. Zero shares are allowed.
  const std::uint64_t d = rng.in(1, cfg.denominator_bound);
  std::map<Element, Rat> weights;
  for (Element e : omega.elements()) weights.emplace(e, Rat(0));
  std::uint64_t remaining = d;
  for (std::size_t j = 0; j + 1 < possible.size(); ++j) {
    const std::uint64_t share = rng.in(0, remaining);
    weights[possible[j]] = Rat(share, d);
    remaining -= share;
  }
  weights[possible.back()] = Rat(remaining, d);

  SourceStructure source(theta, omega, PointProbability(omega, std::move(weights)),
                         std::move(compatibility));
  if (cfg.discounted) {
    const std::uint64_t den = cfg.denominator_bound >= 2 ? rng.in(2, cfg.denominator_bound) : 2;
    const Rat eps(rng.in(1, den - 1), den);
    source = discount_source(source, eps);
  }
  return source;
}

}  // namespace detail

/// Deterministic function of (cfg.seed, trial): a combinable multiple source
/// structure within the configured bounds. Non-combinable draws are
/// resampled a bounded number of times; exhaustion is an error, never a
/// silently unusable structure.
inline MultiSourceStructure random_mss(const GeneratorConfig& cfg, std::size_t trial) {
  cfg.validate();
  SplitMix64 rng(detail::mix_seed(cfg.seed, trial));
  constexpr int kMaxResamples = 64;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const std::size_t theta_size = rng.in(1, cfg.max_theta_size);
    std::vector<Element> theta_elems;
    for (std::size_t i = 1; i <= theta_size; ++i) theta_elems.push_back(static_cast<Element>(i));
    Frame theta(std::move(theta_elems));
    const std::size_t n_sources = rng.in(1, cfg.max_sources);
    std::map<SourceIndex, SourceStructure> sources;
    for (SourceIndex i = 0; i < n_sources; ++i)
      sources.emplace(i, detail::random_source(rng, theta, cfg));
    MultiSourceStructure s(theta, std::move(sources));
    if (is_combinable(s)) return s;
  }
  throw GeneratorError("no combinable structure found in " + std::to_string(kMaxResamples) +
                       " resamples (seed " + std::to_string(cfg.seed) + ", trial " +
                       std::to_string(trial) + ")");
}

/// A random product subset of the structure's product space (every part
/// non-empty). Deterministic given the generator state.
inline ProductSubset random_product_subset(const MultiSourceStructure& s, SplitMix64& rng) {
  ProductSubset delta;
  for (const auto& [index, source] : s.sources())
    delta.parts.emplace(index, detail::random_nonempty_subset(rng, source.omega().elements()));
  return delta;
}

// ---------------------------------------------------------------------------
// Exhaustive assumption-(B) family
// ---------------------------------------------------------------------------

/// Enumerates every B-instance with |theta| <= max_theta, P_k denominators
/// <= max_denominator, and up to max_certain certain sources (as multisets;
/// order cannot matter). Conflicting configurations are pruned. The visitor
/// returns false to stop early; the return value says whether enumeration
/// ran to completion.
inline bool for_each_b_instance(std::size_t max_theta, std::uint64_t max_denominator,
                                std::size_t max_certain,
                                const std::function<bool(const MultiSourceStructure&)>& visit) {
  // All P_k(x) = a/b in lowest terms with b <= max_denominator, ascending by
  // denominator then numerator.
  std::vector<Rat> qs;
  for (std::uint64_t b = 1; b <= max_denominator; ++b)
    for (std::uint64_t a = 0; a <= b; ++a) {
      Rat q(a, b);
      if (denominator(q) == b) qs.push_back(std::move(q));
    }

  const Frame pk_frame = Frame::range(2);
  for (std::size_t theta_size = 1; theta_size <= max_theta; ++theta_size) {
    std::vector<Element> theta_elems;
    for (std::size_t i = 1; i <= theta_size; ++i) theta_elems.push_back(static_cast<Element>(i));
    const Frame theta(std::move(theta_elems));
    std::vector<Subset> nonempty;
    for (const Subset& x : all_subsets(theta))
      if (!x.empty()) nonempty.push_back(x);

    for (const Subset& fx : nonempty) {
      for (const Subset& fy : nonempty) {
        // Certain focal multisets, grown non-decreasingly; prune as soon as
        // either running intersection goes empty (it can only shrink).
        std::vector<Subset> certains;
        std::function<bool(const Subset&, const Subset&, std::size_t)> grow =
            [&](const Subset& ix, const Subset& iy, std::size_t start) -> bool {
          for (const Rat& q : qs) {
            PointProbability pk(pk_frame, {q, Rat(1) - q});
            if (!visit(build_b_instance(theta, pk, {fx, fy}, certains))) return false;
          }
          if (certains.size() == max_certain) return true;
          for (std::size_t c = start; c < nonempty.size(); ++c) {
            Subset nx = intersect(ix, nonempty[c]);
            if (nx.empty()) continue;
            Subset ny = intersect(iy, nonempty[c]);
            if (ny.empty()) continue;
            certains.push_back(nonempty[c]);
            const bool keep_going = grow(nx, ny, c);
            certains.pop_back();
            if (!keep_going) return false;
          }
          return true;
        };
        if (!grow(fx, fy, 0)) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Witness shrinking
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<AxiomVerdict> try_recheck(const CRule& rule, AxiomId axiom,
                                               const Witness& w) {
  try {
    AxiomVerdict v = recheck(rule, axiom, w);
    if (v.failed()) return v;
  } catch (const Error&) {
    // the move produced an unusable structure; reject it
  }
  return std::nullopt;
}

inline std::optional<Witness> drop_source(const Witness& w, SourceIndex victim) {
  if (w.structure.arity() <= 1) return std::nullopt;
  if (w.k && *w.k == victim) return std::nullopt;
  std::map<SourceIndex, SourceStructure> sources = w.structure.sources();
  sources.erase(victim);
  Witness out = w;
  out.structure = MultiSourceStructure(w.structure.theta(), std::move(sources));
  if (out.delta) out.delta->parts.erase(victim);
  out.tuple.reset();
  out.tuple2.reset();
  return out;
}

inline std::optional<Witness> drop_omega_element(const Witness& w, SourceIndex index,
                                                 Element victim) {
  const SourceStructure& src = w.structure.source(index);
  if (src.omega().size() <= 1) return std::nullopt;
  if (w.k && *w.k == index && w.l && *w.l == victim) return std::nullopt;
  const Rat& gone = src.p().at(victim);
  if (gone == 1) return std::nullopt;  // nothing left to carry the weight

  std::vector<Element> elems;
  std::map<Element, Rat> weights;
  std::map<Element, Subset> compatibility;
  std::map<Element, std::string> labels;
  const Rat scale = Rat(1) / (Rat(1) - gone);
  for (Element e : src.omega().elements()) {
    if (e == victim) continue;
    elems.push_back(e);
    weights.emplace(e, src.p().at(e) * scale);
    compatibility.emplace(e, src.image_of(e));
    if (auto it = src.labels().find(e); it != src.labels().end()) labels.emplace(e, it->second);
  }
  Frame omega(std::move(elems));
  std::map<SourceIndex, SourceStructure> sources = w.structure.sources();
  sources.erase(index);
  sources.emplace(index,
                  SourceStructure(src.theta(), omega, PointProbability(omega, std::move(weights)),
                                  std::move(compatibility), std::move(labels)));
  Witness out = w;
  out.structure = MultiSourceStructure(w.structure.theta(), std::move(sources));
  if (out.delta) {
    auto it = out.delta->parts.find(index);
    if (it != out.delta->parts.end() && it->second.contains(victim)) {
      Subset rest = set_difference(it->second, Subset({victim}));
      if (rest.empty()) return std::nullopt;
      it->second = std::move(rest);
    }
  }
  out.tuple.reset();
  out.tuple2.reset();
  return out;
}

inline std::optional<Witness> uniform_weights(const Witness& w, SourceIndex index) {
  const SourceStructure& src = w.structure.source(index);
  std::vector<Element> support;
  for (const auto& [e, weight] : src.p().weights())
    if (weight != 0) support.push_back(e);
  const Rat share(1, static_cast<Int>(support.size()));
  std::map<Element, Rat> weights;
  bool changed = false;
  for (const auto& [e, weight] : src.p().weights()) {
    const Rat target = weight == 0 ? Rat(0) : share;
    if (target != weight) changed = true;
    weights.emplace(e, target);
  }
  if (!changed) return std::nullopt;
  std::map<SourceIndex, SourceStructure> sources = w.structure.sources();
  sources.erase(index);
  sources.emplace(index, SourceStructure(src.theta(), src.omega(),
                                         PointProbability(src.omega(), std::move(weights)),
                                         src.compatibility(), src.labels()));
  Witness out = w;
  out.structure = MultiSourceStructure(w.structure.theta(), std::move(sources));
  out.tuple.reset();
  out.tuple2.reset();
  return out;
}

}  // namespace detail

/// Greedy, deterministic witness minimization: repeatedly drop whole
/// sources, drop underlying elements (rescaling the rest), and flatten
/// weight vectors to uniform-over-support, keeping each move only if the
/// named check still fails. Produces the reproducible minimal-ish
/// counterexamples the reports show.
inline AxiomVerdict shrink_failure(const CRule& rule, const AxiomVerdict& verdict) {
  if (!verdict.failed() || !verdict.witness) return verdict;
  AxiomVerdict best = verdict;
  for (int pass = 0; pass < 64; ++pass) {
    bool improved = false;

    const auto try_move = [&](std::optional<Witness> candidate) {
      if (!candidate) return false;
      auto v = detail::try_recheck(rule, best.axiom, *candidate);
      if (!v) return false;
      // keep the candidate's conditioning data; the recheck's witness only
      // carries the offending spot
      v->witness->k = candidate->k;
      v->witness->l = candidate->l;
      v->witness->delta = candidate->delta;
      best = std::move(*v);
      return true;
    };

    {
      const auto indices = best.witness->structure.indices();
      for (auto it = indices.rbegin(); it != indices.rend() && !improved; ++it)
        improved = try_move(detail::drop_source(*best.witness, *it));
    }
    if (!improved) {
      const auto indices = best.witness->structure.indices();
      for (auto iit = indices.rbegin(); iit != indices.rend() && !improved; ++iit) {
        const auto elems = best.witness->structure.source(*iit).omega().elements();
        for (auto eit = elems.rbegin(); eit != elems.rend() && !improved; ++eit)
          improved = try_move(detail::drop_omega_element(*best.witness, *iit, *eit));
      }
    }
    if (!improved) {
      const auto indices = best.witness->structure.indices();
      for (auto it = indices.begin(); it != indices.end() && !improved; ++it)
        improved = try_move(detail::uniform_weights(*best.witness, *it));
    }
    if (!improved) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Counterexample search
// ---------------------------------------------------------------------------

struct SearchOptions {
  bool include_general_a = true;
  std::size_t product_cap = kDefaultProductCap;
  std::size_t b_max_theta = 3;
  std::uint64_t b_max_denominator = 20;
  std::size_t b_max_certain = 4;
};

struct SearchReport {
  struct Tally {
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::size_t checked() const { return passed + failed + skipped; }
  };

  CRuleId rule;
  GeneratorConfig config;
  std::map<AxiomId, Tally> tallies;
  std::map<AxiomId, AxiomVerdict> first_failures;  // shrunk

  bool all_passed() const {
    for (const auto& [axiom, tally] : tallies)
      if (tally.failed != 0) return false;
    return true;
  }
};

/// Runs every check against cfg.trials generated structures (constraints,
/// assumption (A) for every (k, l), optionally the generalized (A) with a
/// random product subset per trial, ratio invariance) plus assumption (B)
/// over the exhaustive instance family. Deterministic given (rule, cfg).
/// Failures are data, not errors; the first failing witness per axiom is
/// shrunk for the report.
inline SearchReport search_counterexamples(CRuleId rule_id, const GeneratorConfig& cfg,
                                           const SearchOptions& options = {}) {
  cfg.validate();
  SearchReport report;
  report.rule = rule_id;
  report.config = cfg;
  const CRule rule = c_rule(rule_id, options.product_cap);

  for (AxiomId id : {AxiomId::respects_contradictions, AxiomId::respects_zero_probabilities,
                     AxiomId::assumption_a, AxiomId::assumption_a_general,
                     AxiomId::assumption_b, AxiomId::ratio_invariance})
    report.tallies[id];
  if (!options.include_general_a) report.tallies.erase(AxiomId::assumption_a_general);

  const auto note = [&](AxiomVerdict v) {
    auto& tally = report.tallies[v.axiom];
    switch (v.outcome) {
      case AxiomVerdict::Outcome::passed: ++tally.passed; break;
      case AxiomVerdict::Outcome::failed: ++tally.failed; break;
      case AxiomVerdict::Outcome::skipped: ++tally.skipped; break;
    }
    if (v.failed() && report.first_failures.find(v.axiom) == report.first_failures.end())
      report.first_failures.emplace(v.axiom, std::move(v));
  };

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const MultiSourceStructure s = random_mss(cfg, trial);
    note(check_respects_contradictions(rule, s));
    note(check_respects_zero_probabilities(rule, s));
    note(ratio_invariance_check(rule, s, options.product_cap));
    for (SourceIndex k : s.indices())
      for (Element l : s.source(k).omega().elements())
        note(check_assumption_a(rule, s, k, l));
    if (options.include_general_a) {
      SplitMix64 rng(detail::mix_seed(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ull, trial));
      note(check_assumption_a_general(rule, s, random_product_subset(s, rng)));
    }
  }

  for_each_b_instance(options.b_max_theta, options.b_max_denominator, options.b_max_certain,
                      [&](const MultiSourceStructure& inst) {
                        note(check_assumption_b(rule, inst));
                        return true;
                      });

  for (auto& [axiom, verdict] : report.first_failures) verdict = shrink_failure(rule, verdict);
  return report;
}

}  // namespace evcalc
