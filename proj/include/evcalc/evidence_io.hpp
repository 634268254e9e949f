#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "evcalc/axioms.hpp"
#include "evcalc/combination.hpp"
#include "evcalc/conditioning.hpp"
#include "evcalc/errors.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/mass.hpp"
#include "evcalc/probability.hpp"
#include "evcalc/rational.hpp"
#include "evcalc/source.hpp"

namespace evcalc {

/// One named piece of evidence: either a mass function or a source structure.
struct EvidenceEntry {
  std::string name;
  std::variant<MassFunction, SourceStructure> value;

  bool is_mass() const { return std::holds_alternative<MassFunction>(value); }
  const MassFunction& mass() const { return std::get<MassFunction>(value); }
  const SourceStructure& source() const { return std::get<SourceStructure>(value); }

  bool operator==(const EvidenceEntry&) const = default;
};

/// A parsed evidence file: one frame of interest, any number of named
/// entries over it.
struct EvidenceDocument {
  Frame theta;
  std::vector<EvidenceEntry> entries;

  const EvidenceEntry& entry(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e;
    throw ValidationError("no entry named '" + name + "'");
  }

  bool operator==(const EvidenceDocument&) const = default;
};

/// Every entry as a mass function (sources via mass_of_source).
inline MassFunction entry_mass(const EvidenceEntry& entry) {
  return entry.is_mass() ? entry.mass() : mass_of_source(entry.source());
}

namespace detail {

using json = nlohmann::json;

/// Mass/weight values: exact strings ("1/2", "0.25") or exact JSON
/// integers. JSON float tokens are binary-rounded, so they are rejected.
inline Rat value_from_json(const json& j, const std::string& where) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer() && !j.is_number_float())
    return Rat(Int(j.get<long long>()));
  if (j.is_number_float())
    throw ParseError(where + ": binary floats are not exact; write \"p/q\" or a decimal string");
  throw ParseError(where + ": expected a rational as a string or integer");
}

inline std::vector<Element> elements_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of naturals");
  std::vector<Element> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.is_number_float() || v.get<long long>() < 0)
      throw ParseError(where + ": elements must be non-negative integers");
    out.push_back(v.get<Element>());
  }
  return out;
}

inline void require_keys(const json& j, std::vector<std::string> keys, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& k : keys) known = known || it.key() == k;
    if (!known) throw ParseError(where + ": unknown key '" + it.key() + "'");
  }
}

inline MassFunction mass_from_json(const Frame& theta, const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": 'masses' must be an array");
  std::map<Subset, Rat> mass;
  for (const auto& item : j) {
    if (!item.is_object()) throw ParseError(where + ": each mass item must be an object");
    require_keys(item, {"set", "mass"}, where);
    if (!item.contains("set") || !item.contains("mass"))
      throw ParseError(where + ": mass item needs 'set' and 'mass'");
    Subset set(elements_from_json(item["set"], where));
    mass[set] += value_from_json(item["mass"], where);
  }
  return MassFunction(theta, std::move(mass));
}

inline SourceStructure source_from_json(const Frame& theta, const json& j,
                                        const std::string& where) {
  for (const char* key : {"omega", "p", "i"})
    if (!j.contains(key)) throw ParseError(where + ": source entry needs 'omega', 'p' and 'i'");
  if (!j["omega"].is_array()) throw ParseError(where + ": 'omega' must be an array of labels");
  std::vector<std::string> order;
  std::map<std::string, Element> by_label;
  for (const auto& v : j["omega"]) {
    if (!v.is_string() || v.get<std::string>().empty())
      throw ParseError(where + ": omega labels must be non-empty strings");
    const std::string label = v.get<std::string>();
    if (by_label.count(label)) throw ParseError(where + ": duplicate omega label '" + label + "'");
    by_label.emplace(label, static_cast<Element>(order.size()));
    order.push_back(label);
  }
  if (order.empty()) throw ParseError(where + ": 'omega' must not be empty");

  const auto resolve = [&](const std::string& label) -> Element {
    auto it = by_label.find(label);
    if (it == by_label.end())
      throw ParseError(where + ": '" + label + "' is not an omega label");
    return it->second;
  };

  if (!j["p"].is_object()) throw ParseError(where + ": 'p' must map labels to weights");
  std::map<Element, Rat> weights;
  for (auto it = j["p"].begin(); it != j["p"].end(); ++it)
    weights.emplace(resolve(it.key()), value_from_json(it.value(), where + ".p." + it.key()));

  if (!j["i"].is_object()) throw ParseError(where + ": 'i' must map labels to sets");
  std::map<Element, Subset> compatibility;
  for (auto it = j["i"].begin(); it != j["i"].end(); ++it)
    compatibility.emplace(resolve(it.key()),
                          Subset(elements_from_json(it.value(), where + ".i." + it.key())));

  std::map<Element, std::string> labels;
  for (std::size_t e = 0; e < order.size(); ++e) labels.emplace(static_cast<Element>(e), order[e]);
  Frame omega = Frame::range(order.size());
  SourceStructure source(theta, omega, PointProbability(omega, std::move(weights)),
                         std::move(compatibility), std::move(labels));
  if (auto report = validate_source(source); !report.ok()) {
    const SourceViolation& first = report.violations.front();
    throw ParseError(where + ": element '" + source.label_of(first.omega_element) +
                     "': " + first.detail);
  }
  return source;
}

inline json mass_to_json(const MassFunction& m) {
  json items = json::array();
  for (const auto& [set, value] : m.entries()) {
    json item;
    item["set"] = set.members();
    item["mass"] = fraction_string(value);
    items.push_back(std::move(item));
  }
  return items;
}

inline json source_to_json(const SourceStructure& s) {
  json omega = json::array();
  json p = json::object();
  json i = json::object();
  for (Element e : s.omega().elements()) {
    const std::string label = s.label_of(e);
    omega.push_back(label);
    p[label] = fraction_string(s.p().at(e));
    i[label] = s.image_of(e).members();
  }
  json out;
  out["omega"] = std::move(omega);
  out["p"] = std::move(p);
  out["i"] = std::move(i);
  return out;
}

}  // namespace detail

inline EvidenceDocument parse_evidence(const std::string& text) {
  detail::json j;
  try {
    j = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string("invalid document: ") + e.what());
  }
  if (!j.is_object() || !j.contains("theta") || !j.contains("entries"))
    throw ParseError("document needs 'theta' and 'entries'");
  detail::require_keys(j, {"theta", "entries", "witness"}, "document");

  Frame theta(detail::elements_from_json(j["theta"], "theta"));
  EvidenceDocument doc{theta, {}};
  if (!j["entries"].is_array()) throw ParseError("'entries' must be an array");
  for (const auto& entry : j["entries"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string())
      throw ParseError("each entry needs a string 'name'");
    const std::string name = entry["name"].get<std::string>();
    const std::string where = "entry '" + name + "'";
    for (const auto& existing : doc.entries)
      if (existing.name == name) throw ParseError("duplicate entry name '" + name + "'");
    try {
      if (entry.contains("masses")) {
        detail::require_keys(entry, {"name", "masses"}, where);
        doc.entries.push_back({name, detail::mass_from_json(theta, entry["masses"], where)});
      } else {
        detail::require_keys(entry, {"name", "omega", "p", "i"}, where);
        doc.entries.push_back({name, detail::source_from_json(theta, entry, where)});
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return doc;
}

/// Deterministic rendering; parse(serialize(doc)) == doc.
inline std::string serialize_evidence(const EvidenceDocument& doc) {
  detail::json j;
  j["theta"] = doc.theta.elements();
  detail::json entries = detail::json::array();
  for (const auto& entry : doc.entries) {
    detail::json e;
    e["name"] = entry.name;
    if (entry.is_mass()) {
      e["masses"] = detail::mass_to_json(entry.mass());
    } else {
      detail::json src = detail::source_to_json(entry.source());
      e["omega"] = std::move(src["omega"]);
      e["p"] = std::move(src["p"]);
      e["i"] = std::move(src["i"]);
    }
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Witness documents: a failed check serialized as an evidence file plus a
// "witness" object, so it can be re-run directly.
// ---------------------------------------------------------------------------

struct WitnessSpec {
  CRuleId rule;
  AxiomId axiom;
  MultiSourceStructure structure;
  std::optional<SourceIndex> k;
  std::optional<Element> l;
  std::optional<ProductSubset> delta;
};

inline std::string serialize_witness(CRuleId rule, const AxiomVerdict& verdict) {
  if (!verdict.witness) throw ValidationError("verdict carries no witness");
  const Witness& w = *verdict.witness;
  detail::json j;
  j["theta"] = w.structure.theta().elements();
  detail::json entries = detail::json::array();
  for (const auto& [index, source] : w.structure.sources()) {
    detail::json e = detail::source_to_json(source);
    e["name"] = "source_" + std::to_string(index);
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);

  detail::json wit;
  wit["axiom"] = std::string(to_string(verdict.axiom));
  wit["rule"] = std::string(to_string(rule));
  wit["indices"] = w.structure.indices();
  if (w.k) wit["k"] = *w.k;
  if (w.l && w.k) wit["l"] = w.structure.source(*w.k).label_of(*w.l);
  if (w.delta) {
    detail::json parts = detail::json::object();
    for (const auto& [index, part] : w.delta->parts) {
      detail::json labels = detail::json::array();
      for (Element e : part.members()) labels.push_back(w.structure.source(index).label_of(e));
      parts[std::to_string(index)] = std::move(labels);
    }
    wit["delta"] = std::move(parts);
  }
  if (!w.expected.empty()) wit["expected"] = w.expected;
  if (!w.actual.empty()) wit["actual"] = w.actual;
  j["witness"] = std::move(wit);
  return j.dump(2) + "\n";
}

inline WitnessSpec parse_witness_document(const std::string& text) {
  detail::json j;
  try {
    j = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string("invalid document: ") + e.what());
  }
  if (!j.is_object() || !j.contains("witness"))
    throw ParseError("not a witness document: no 'witness' object");
  const EvidenceDocument doc = parse_evidence(text);
  const detail::json& wit = j["witness"];
  for (const char* key : {"axiom", "rule", "indices"})
    if (!wit.contains(key)) throw ParseError("witness needs 'axiom', 'rule' and 'indices'");

  const auto axiom = parse_axiom(wit["axiom"].get<std::string>());
  if (!axiom) throw ParseError("unknown axiom '" + wit["axiom"].get<std::string>() + "'");
  const auto rule = parse_c_rule(wit["rule"].get<std::string>());
  if (!rule) throw ParseError("unknown rule '" + wit["rule"].get<std::string>() + "'");

  if (!wit["indices"].is_array() || wit["indices"].size() != doc.entries.size())
    throw ParseError("witness 'indices' must match the entries");
  std::map<SourceIndex, SourceStructure> sources;
  std::map<SourceIndex, std::map<std::string, Element>> reverse_labels;
  for (std::size_t pos = 0; pos < doc.entries.size(); ++pos) {
    const auto& entry = doc.entries[pos];
    if (entry.is_mass()) throw ParseError("witness entries must all be sources");
    const auto index = wit["indices"][pos].get<SourceIndex>();
    std::map<std::string, Element> rev;
    for (Element e : entry.source().omega().elements()) rev[entry.source().label_of(e)] = e;
    reverse_labels.emplace(index, std::move(rev));
    sources.emplace(index, entry.source());
  }
  WitnessSpec spec{*rule, *axiom, MultiSourceStructure(doc.theta, std::move(sources)),
                   std::nullopt, std::nullopt, std::nullopt};

  const auto resolve = [&](SourceIndex index, const std::string& label) -> Element {
    const auto& rev = reverse_labels.at(index);
    auto it = rev.find(label);
    if (it == rev.end())
      throw ParseError("label '" + label + "' not in source " + std::to_string(index));
    return it->second;
  };
  if (wit.contains("k")) spec.k = wit["k"].get<SourceIndex>();
  if (wit.contains("l")) {
    if (!spec.k) throw ParseError("witness 'l' without 'k'");
    spec.l = resolve(*spec.k, wit["l"].get<std::string>());
  }
  if (wit.contains("delta")) {
    ProductSubset delta;
    for (auto it = wit["delta"].begin(); it != wit["delta"].end(); ++it) {
      const auto index = static_cast<SourceIndex>(std::stoul(it.key()));
      std::vector<Element> members;
      for (const auto& label : it.value()) members.push_back(resolve(index, label.get<std::string>()));
      delta.parts.emplace(index, Subset(std::move(members)));
    }
    spec.delta = std::move(delta);
  }
  return spec;
}

/// Re-runs the witnessed check; a faithful witness re-fails.
inline AxiomVerdict rerun_witness(const WitnessSpec& spec,
                                  std::size_t cap = kDefaultProductCap) {
  Witness w{spec.structure, spec.k, spec.l, spec.delta,
            std::nullopt, std::nullopt, "", ""};
  return recheck(c_rule(spec.rule, cap), spec.axiom, w);
}

}  // namespace evcalc
