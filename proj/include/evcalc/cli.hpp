#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evcalc/axioms.hpp"
#include "evcalc/combination.hpp"
#include "evcalc/conditioning.hpp"
#include "evcalc/errors.hpp"
#include "evcalc/evidence_io.hpp"
#include "evcalc/frame.hpp"
#include "evcalc/mass.hpp"
#include "evcalc/rational.hpp"
#include "evcalc/search.hpp"
#include "evcalc/source.hpp"

namespace evcalc {
namespace cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;       // validation or parse problems
inline constexpr int kNotCombinable = 2;    // combinability errors
inline constexpr int kAxiomFailure = 3;     // `check` found a failing axiom

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw ParseError("empty list '" + text + "'");
  return out;
}

inline std::string render_value(const Rat& value, unsigned decimals) {
  std::string out = fraction_string(value);
  if (decimals > 0) out += " (" + decimal_string(value, decimals) + ")";
  return out;
}

inline void print_mass(std::ostream& out, const MassFunction& m, unsigned decimals) {
  out << "theta: " << Subset::full(m.theta()).to_string() << "\n";
  for (const auto& [set, value] : m.entries())
    out << set.to_string() << ": " << render_value(value, decimals) << "\n";
}

inline void print_source(std::ostream& out, const SourceStructure& s, unsigned decimals) {
  out << "theta: " << Subset::full(s.theta()).to_string() << "\n";
  out << "omega:\n";
  for (Element e : s.omega().elements())
    out << "  " << s.label_of(e) << ": p=" << render_value(s.p().at(e), decimals)
        << " i=" << s.image_of(e).to_string() << "\n";
}

inline Subset theta_subset(const Frame& theta, const std::string& list) {
  std::vector<Element> members;
  for (const std::string& item : split_list(list)) {
    try {
      members.push_back(static_cast<Element>(std::stoull(item)));
    } catch (const std::exception&) {
      throw ParseError("'" + item + "' is not a frame element");
    }
  }
  Subset set(std::move(members));
  if (!set.within(theta))
    throw ValidationError("set " + set.to_string() + " not within theta");
  return set;
}

inline Subset omega_subset_by_labels(const SourceStructure& s, const std::string& list) {
  std::map<std::string, Element> rev;
  for (Element e : s.omega().elements()) rev[s.label_of(e)] = e;
  std::vector<Element> members;
  for (const std::string& label : split_list(list)) {
    auto it = rev.find(label);
    if (it == rev.end()) throw ValidationError("'" + label + "' is not an omega label");
    members.push_back(it->second);
  }
  return Subset(std::move(members));
}

inline void print_search_report(std::ostream& out, const SearchReport& report) {
  const auto row = [&out](std::string name, const std::string& a, const std::string& b,
                          const std::string& c) {
    name.resize(24, ' ');
    out << name;
    for (const std::string* v : {&a, &b, &c})
      out << std::string(v->size() < 10 ? 10 - v->size() : 1, ' ') << *v;
    out << "\n";
  };
  out << "rule: " << to_string(report.rule) << "\n";
  out << "seed: " << report.config.seed << ", trials: " << report.config.trials << "\n";
  row("axiom", "passed", "failed", "skipped");
  for (const auto& [axiom, tally] : report.tallies)
    row(std::string(to_string(axiom)), std::to_string(tally.passed),
        std::to_string(tally.failed), std::to_string(tally.skipped));
}

inline void print_witness_details(std::ostream& out, const AxiomVerdict& verdict) {
  const Witness& w = *verdict.witness;
  out << "counterexample for " << to_string(verdict.axiom) << ":\n";
  if (!w.expected.empty())
    out << "  expected " << w.expected << ", got " << w.actual << "\n";
  if (w.k) out << "  k=" << *w.k << (w.l ? " l=" + w.structure.source(*w.k).label_of(*w.l) : "")
               << "\n";
  if (w.tuple) out << "  at tuple " << render_tuple(w.structure, *w.tuple) << "\n";
  if (w.tuple2) out << "  paired with " << render_tuple(w.structure, *w.tuple2) << "\n";
}

}  // namespace detail

/// Dispatches one command line. All output goes through the streams;
/// nothing touches the terminal directly, so runs are reproducible.
inline int run_command(std::vector<std::string> argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact Dempster-Shafer evidence combination and axiom checking"};
  app.name("evcalc");
  app.require_subcommand(0, 1);

  std::string file;
  std::string entry_name;
  std::string delta_list;
  std::string geometric_list;
  std::string eps_text;
  unsigned decimals = 0;
  bool unnormalized = false;

  auto* combine = app.add_subcommand("combine", "combine every entry with Dempster's rule");
  combine->add_option("file", file, "evidence file")->required();
  combine->add_option("--decimal", decimals, "append k-digit decimal approximations");
  combine->add_flag("--unnormalized", unnormalized,
                    "use the non-normalised combination (mass may land on {})");

  auto* condition = app.add_subcommand("condition", "condition a source entry");
  condition->add_option("file", file, "evidence file")->required();
  condition->add_option("--entry", entry_name, "entry to condition")->required();
  auto* delta_opt = condition->add_option(
      "--delta", delta_list, "Bayesian conditioning on these omega labels (comma separated)");
  auto* geo_opt = condition->add_option(
      "--geometric", geometric_list, "geometric conditioning by this theta subset (comma separated)");
  delta_opt->excludes(geo_opt);
  condition->add_option("--decimal", decimals, "append k-digit decimal approximations");

  auto* discount = app.add_subcommand("discount", "discount a mass entry toward the whole frame");
  discount->add_option("file", file, "evidence file")->required();
  discount->add_option("--entry", entry_name, "entry to discount")->required();
  discount->add_option("--eps", eps_text, "discount rate in [0,1), e.g. 1/10")->required();
  discount->add_option("--decimal", decimals, "append k-digit decimal approximations");

  auto* convert = app.add_subcommand("convert",
                                     "mass entry -> canonical source, source entry -> mass");
  convert->add_option("file", file, "evidence file")->required();
  convert->add_option("--entry", entry_name, "entry to convert")->required();
  convert->add_option("--decimal", decimals, "append k-digit decimal approximations");

  std::string rule_name;
  std::string witness_path;
  std::string out_path;
  bool general_a = false;
  bool discounted = false;
  GeneratorConfig cfg;
  SearchOptions options;
  auto* check = app.add_subcommand("check", "search for axiom counterexamples");
  check->add_option("--rule", rule_name, "dempster, uniform or squared");
  check->add_option("--trials", cfg.trials, "generated structures to test");
  check->add_option("--seed", cfg.seed, "generator seed");
  check->add_flag("--general-A", general_a, "also test the generalized assumption (A)");
  check->add_flag("--discounted", discounted, "generate discounted structures");
  check->add_option("--product-cap", options.product_cap, "max product-space tuples");
  check->add_option("--b-max-theta", options.b_max_theta,
                    "frame-size bound for the exhaustive assumption-(B) family");
  check->add_option("--b-max-denominator", options.b_max_denominator,
                    "denominator bound for the assumption-(B) family");
  check->add_option("--b-max-certain", options.b_max_certain,
                    "certain-source bound for the assumption-(B) family");
  check->add_option("--out", out_path, "write the first failing witness to this file");
  check->add_option("--witness", witness_path, "re-run a previously written witness file");

  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (combine->parsed()) {
      const EvidenceDocument doc = parse_evidence(detail::read_file(file));
      if (doc.entries.empty()) throw ValidationError("no entries to combine");
      std::vector<MassFunction> masses;
      for (const auto& entry : doc.entries) masses.push_back(entry_mass(entry));
      const MassFunction combined =
          unnormalized ? unnormalized_combine_masses(masses) : dempster_combine_masses(masses);
      detail::print_mass(out, combined, decimals);
      return kOk;
    }

    if (condition->parsed()) {
      const EvidenceDocument doc = parse_evidence(detail::read_file(file));
      const EvidenceEntry& entry = doc.entry(entry_name);
      if (!delta_opt->count() && !geo_opt->count())
        throw ValidationError("pick --delta (Bayesian) or --geometric");
      SourceStructure conditioned = [&] {
        if (delta_opt->count()) {
          if (entry.is_mass())
            throw ValidationError("--delta conditions underlying elements; entry '" + entry_name +
                                  "' is a mass function (use --geometric, or a source entry)");
          return condition_source(entry.source(),
                                  detail::omega_subset_by_labels(entry.source(), delta_list));
        }
        const SourceStructure source =
            entry.is_mass() ? source_from_mass(entry.mass()) : entry.source();
        return geometric_condition(source, detail::theta_subset(doc.theta, geometric_list));
      }();
      detail::print_source(out, conditioned, decimals);
      out << "induced mass:\n";
      const MassFunction induced = mass_of_source(conditioned);
      for (const auto& [set, value] : induced.entries())
        out << "  " << set.to_string() << ": " << detail::render_value(value, decimals) << "\n";
      return kOk;
    }

    if (discount->parsed()) {
      const EvidenceDocument doc = parse_evidence(detail::read_file(file));
      const MassFunction discounted_mass =
          discount_mass(entry_mass(doc.entry(entry_name)), parse_rational(eps_text));
      detail::print_mass(out, discounted_mass, decimals);
      return kOk;
    }

    if (convert->parsed()) {
      const EvidenceDocument doc = parse_evidence(detail::read_file(file));
      const EvidenceEntry& entry = doc.entry(entry_name);
      if (entry.is_mass()) {
        detail::print_source(out, source_from_mass(entry.mass()), decimals);
      } else {
        detail::print_mass(out, mass_of_source(entry.source()), decimals);
      }
      return kOk;
    }

    if (check->parsed()) {
      if (!witness_path.empty()) {
        const WitnessSpec spec = parse_witness_document(detail::read_file(witness_path));
        const AxiomVerdict verdict = rerun_witness(spec, options.product_cap);
        out << "re-running " << to_string(spec.axiom) << " against rule "
            << to_string(spec.rule) << "\n";
        if (verdict.failed()) {
          detail::print_witness_details(out, verdict);
          out << "verdict: failed\n";
          return kAxiomFailure;
        }
        out << "verdict: " << (verdict.skipped() ? "skipped" : "passed") << "\n";
        return kOk;
      }
      const auto rule = parse_c_rule(rule_name);
      if (!rule) throw ValidationError("unknown rule '" + rule_name + "' (dempster, uniform, squared)");
      cfg.discounted = discounted;
      options.include_general_a = general_a;
      const SearchReport report = search_counterexamples(*rule, cfg, options);
      detail::print_search_report(out, report);
      if (report.all_passed()) {
        out << "no counterexamples found\n";
        return kOk;
      }
      const auto& [axiom, verdict] = *report.first_failures.begin();
      detail::print_witness_details(out, verdict);
      const std::string witness_doc = serialize_witness(*rule, verdict);
      if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ValidationError("cannot write '" + out_path + "'");
        f << witness_doc;
        out << "witness written to " << out_path << "\n";
      } else {
        out << "witness:\n" << witness_doc;
      }
      return kAxiomFailure;
    }

    out << app.help();
    return kOk;
  } catch (const CombinabilityError& e) {
    err << "not combinable: " << e.what() << "\n";
    return kNotCombinable;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace cli
}  // namespace evcalc
