// treelen: exact computations with translation length functions of
// free-group actions on simplicial metric trees.
//
// Exit codes: 0 verified / compatible-up-to-bound, 1 incompatible with
// certificate, 2 unknown / not found within bounds, 3 input error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "treelen/corerect.hpp"
#include "treelen/gog.hpp"
#include "treelen/lfcore.hpp"
#include "treelen/mgraph.hpp"
#include "treelen/refine.hpp"

using namespace treelen;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kIncompatible = 1, kUnknown = 2, kInputError = 3;

struct LoadedTree {
  std::string path;
  std::shared_ptr<const MarkedMetricGraph> mg;  // null for graph-of-groups
  std::shared_ptr<const GraphOfGroupsSpec> gog;
  std::optional<LengthOracle> oracle;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw InputError("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedTree load_tree(const std::string& path) {
  LoadedTree t;
  t.path = path;
  std::string text = slurp(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (j.contains("marking")) {
    t.mg = std::make_shared<const MarkedMetricGraph>(
        MarkedMetricGraph::from_json(text));
    t.oracle = LengthOracle::from_mgraph(t.mg);
  } else if (j.contains("alphabet")) {
    t.gog = std::make_shared<const GraphOfGroupsSpec>(
        GraphOfGroupsSpec::from_json(text));
    t.oracle = LengthOracle::from_gog(t.gog);
  } else {
    throw InputError(path + ": not a tree description (expected a marked "
                            "metric graph or a graph-of-groups spec)");
  }
  return t;
}

struct Budget {
  int word_length = 6;
  int anchor_length = 4;
};

std::vector<Word> words_up_to(const Alphabet& a, int bound,
                              bool drop_identity) {
  std::vector<Word> out = enumerate_words(a, bound);
  if (drop_identity)
    std::erase_if(out, [](const Word& w) { return w.empty(); });
  return out;
}

void emit(bool as_json, const json& payload, const std::string& text) {
  if (as_json)
    std::cout << payload.dump(2) << "\n";
  else
    std::cout << text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out.good()) throw InputError("cannot write file: " + path);
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

std::string kind_name(CompatKind k) {
  switch (k) {
    case CompatKind::CompatibleUpToBound:
      return "CompatibleUpToBound";
    case CompatKind::IncompatibleCombinatorics:
      return "IncompatibleCombinatorics";
    case CompatKind::IncoherentOrientation:
      return "IncoherentOrientation";
  }
  return "?";
}

int cmd_length(const LoadedTree& t, const std::vector<std::string>& words,
               bool as_json) {
  const Alphabet& a = t.oracle->alphabet();
  json rows = json::array();
  std::ostringstream text;
  for (const std::string& s : words) {
    Word w = parse_word(a, s);
    Rat len = (*t.oracle)(w);
    rows.push_back({{"word", format_word(a, w)}, {"length", to_string(len)}});
    text << format_word(a, w) << "\t" << to_string(len) << "\n";
  }
  emit(as_json, {{"command", "length"}, {"tree", t.path}, {"rows", rows}},
       text.str());
  return kOk;
}

int cmd_axioms(const LoadedTree& t, int bound, bool as_json) {
  auto words = words_up_to(t.oracle->alphabet(), bound, false);
  AxiomReport rep = check_axioms(*t.oracle, words);
  json j = {{"command", "axioms"},
            {"tree", t.path},
            {"len_bound", bound},
            {"nonnegative", rep.nonnegative},
            {"violations", rep.violations},
            {"passed", rep.all_passed()}};
  std::ostringstream text;
  static const char* names[] = {"I", "II", "III", "IV", "V", "VI"};
  for (int i = 0; i < 6; ++i) {
    j["axioms"][names[i]] = rep.ok[i];
    text << "axiom " << names[i] << ": " << (rep.ok[i] ? "pass" : "FAIL")
         << "\n";
  }
  text << "nonnegative: " << (rep.nonnegative ? "pass" : "FAIL") << "\n";
  if (rep.vi_witness) {
    const Alphabet& a = t.oracle->alphabet();
    j["vi_witness"] = {format_word(a, rep.vi_witness->first),
                       format_word(a, rep.vi_witness->second)};
    text << "VI witness: (" << format_word(a, rep.vi_witness->first) << ", "
         << format_word(a, rep.vi_witness->second) << ")\n";
  }
  for (const std::string& v : rep.violations) text << "violation: " << v << "\n";
  text << (rep.all_passed() ? "all axioms pass" : "AXIOM FAILURE") << "\n";
  emit(as_json, j, text.str());
  return rep.all_passed() ? kOk : kIncompatible;
}

int cmd_compat(const LoadedTree& ta, const LoadedTree& tb, int bound,
               const Budget& budget, const std::string& out_path,
               bool as_json) {
  const Alphabet& a = ta.oracle->alphabet();
  if (a.names() != tb.oracle->alphabet().names())
    throw InputError("trees are over different alphabets");
  auto elements = words_up_to(a, bound, true);
  CompatVerdict verdict = compatible_on(*ta.oracle, *tb.oracle, elements);

  json j = {{"command", "compat"},
            {"treeA", ta.path},
            {"treeB", tb.path},
            {"len_bound", bound},
            {"verdict", kind_name(verdict.kind)}};
  std::ostringstream text;

  std::optional<RectangleCertificate> rect;
  bool geometric = ta.mg && tb.mg;
  if (geometric)
    rect = rectangle_search(*ta.mg, *tb.mg,
                            {budget.word_length, budget.anchor_length});

  if (verdict.kind != CompatKind::CompatibleUpToBound) {
    const auto& [g, h] = *verdict.witness;
    j["witness"] = {format_word(a, g), format_word(a, h)};
    text << "INCOMPATIBLE (" << kind_name(verdict.kind) << "), witness ("
         << format_word(a, g) << ", " << format_word(a, h) << ")\n";
    std::string cert = compat_witness_to_json(a, verdict);
    if (rect) {
      // Cross-check: the geometric route must agree.
      auto [rho, sigma] = certificate_from_rectangle(*ta.mg, *tb.mg, *rect);
      j["rectangle"] = json::parse(rectangle_to_json(*ta.mg, *tb.mg, *rect));
      j["rectangle_pair"] = {format_word(a, rho), format_word(a, sigma)};
      text << "rectangle certificate agrees; derived pair ("
           << format_word(a, rho) << ", " << format_word(a, sigma) << ")\n";
    }
    if (!out_path.empty()) {
      write_file(out_path, cert);
      text << "certificate written to " << out_path << "\n";
    }
    emit(as_json, j, text.str());
    return kIncompatible;
  }

  if (rect) {
    // Numeric scan missed it but the geometric search found a rectangle.
    auto [rho, sigma] = certificate_from_rectangle(*ta.mg, *tb.mg, *rect);
    j["verdict"] = "Incompatible";
    j["rectangle"] = json::parse(rectangle_to_json(*ta.mg, *tb.mg, *rect));
    j["rectangle_pair"] = {format_word(a, rho), format_word(a, sigma)};
    text << "INCOMPATIBLE (rectangle), derived pair (" << format_word(a, rho)
         << ", " << format_word(a, sigma) << ")\n";
    if (!out_path.empty()) {
      write_file(out_path, rectangle_to_json(*ta.mg, *tb.mg, *rect));
      text << "certificate written to " << out_path << "\n";
    }
    emit(as_json, j, text.str());
    return kIncompatible;
  }

  text << "compatible up to length bound " << bound;
  if (geometric)
    text << " and rectangle budget (" << budget.word_length << ","
         << budget.anchor_length << ")";
  text << "\n";
  emit(as_json, j, text.str());
  return kOk;
}

int cmd_good_pair(const LoadedTree& t, int bound, const std::string& out_path,
                  bool as_json) {
  const Alphabet& a = t.oracle->alphabet();
  auto words = words_up_to(a, bound, true);
  for (const Word& g : words) {
    for (const Word& h : words) {
      if (g == h) continue;
      if (!is_good_pair(*t.oracle, g, h)) continue;
      auto cert = make_good_pair(*t.oracle, g, h);
      std::string text_cert = good_pair_to_json(a, cert);
      json j = {{"command", "good-pair"},
                {"tree", t.path},
                {"certificate", json::parse(text_cert)}};
      std::ostringstream text;
      text << "good pair (" << format_word(a, g) << ", " << format_word(a, h)
           << "), slack " << to_string(cert.slack_lower) << " / "
           << to_string(cert.slack_upper) << "\n";
      if (!out_path.empty()) {
        write_file(out_path, text_cert);
        text << "certificate written to " << out_path << "\n";
      }
      emit(as_json, j, text.str());
      return kOk;
    }
  }
  emit(as_json,
       {{"command", "good-pair"}, {"tree", t.path}, {"found", false}},
       "no good pair within length bound " + std::to_string(bound) + "\n");
  return kUnknown;
}

int cmd_based_length(const LoadedTree& t, const std::string& cert_path,
                     int bound, const std::vector<std::string>& words,
                     bool as_json) {
  const Alphabet& a = t.oracle->alphabet();
  std::optional<GoodPairCertificate> gp;
  if (!cert_path.empty()) {
    gp = good_pair_from_json(a, slurp(cert_path));
    // Re-derive against this oracle; throws if the pair is not good here.
    gp = make_good_pair(*t.oracle, gp->g, gp->h, gp->assumption);
  } else {
    auto found = words_up_to(a, bound, true);
    for (const Word& g : found) {
      for (const Word& h : found)
        if (g != h && is_good_pair(*t.oracle, g, h)) {
          gp = make_good_pair(*t.oracle, g, h);
          break;
        }
      if (gp) break;
    }
    if (!gp)
      throw InputError("no good pair within length bound " +
                       std::to_string(bound) + "; pass one via --good-pair");
  }
  json rows = json::array();
  std::ostringstream text;
  text << "basepoint: good pair (" << format_word(a, gp->g) << ", "
       << format_word(a, gp->h) << ")\n";
  for (const std::string& s : words) {
    Word w = parse_word(a, s);
    Rat len = based_length_dagger(*t.oracle, *gp, w);
    rows.push_back({{"word", format_word(a, w)}, {"length", to_string(len)}});
    text << format_word(a, w) << "\t" << to_string(len) << "\n";
  }
  emit(as_json,
       {{"command", "based-length"},
        {"tree", t.path},
        {"good_pair", {format_word(a, gp->g), format_word(a, gp->h)}},
        {"rows", rows}},
       text.str());
  return kOk;
}

int cmd_refine(const LoadedTree& ta, const LoadedTree& tb, int bound,
               int sample_bound, const std::string& out_path, bool as_json) {
  const Alphabet& a = ta.oracle->alphabet();
  if (a.names() != tb.oracle->alphabet().names())
    throw InputError("trees are over different alphabets");
  auto elements = words_up_to(a, bound, true);
  CompatVerdict verdict = compatible_on(*ta.oracle, *tb.oracle, elements);
  if (verdict.kind != CompatKind::CompatibleUpToBound) {
    const auto& [g, h] = *verdict.witness;
    std::ostringstream text;
    text << "refusing: trees are incompatible (" << kind_name(verdict.kind)
         << "), witness (" << format_word(a, g) << ", " << format_word(a, h)
         << ")\n";
    emit(as_json,
         {{"command", "refine"},
          {"verdict", kind_name(verdict.kind)},
          {"witness", {format_word(a, g), format_word(a, h)}}},
         text.str());
    return kIncompatible;
  }

  auto gp = simultaneous_good_pair(*ta.oracle, *tb.oracle, bound);
  if (!gp) {
    emit(as_json,
         {{"command", "refine"}, {"verdict", "NoSimultaneousGoodPair"}},
         "no simultaneous good pair within length bound " +
             std::to_string(bound) + "\n");
    return kUnknown;
  }

  LengthOracle sum = sum_oracle(*ta.oracle, *tb.oracle);
  BasedOracle p = dagger_oracle(sum, gp->for_sum);
  auto sample = words_up_to(a, sample_bound, false);
  OrbitMetric om = orbit_metric(p, sample);
  FiniteTree tree = build_tree(om);
  RefinementReport rep = verify_refinement(*ta.oracle, *tb.oracle, *gp,
                                           sample, tree);
  DisplacementReport disp = displacement_check(sum, p, sample);

  json j = {{"command", "refine"},
            {"good_pair", {format_word(a, gp->g), format_word(a, gp->h)}},
            {"sample_size", sample.size()},
            {"nodes", tree.nodes.size()},
            {"edges", tree.edges.size()},
            {"refinement_ok", rep.ok},
            {"displacement_ok", disp.ok},
            {"violations", rep.violations},
            {"tree", json::parse(tree_to_json(tree))}};
  std::ostringstream text;
  text << "good pair (" << format_word(a, gp->g) << ", "
       << format_word(a, gp->h) << "); sample " << sample.size()
       << " orbit points; tree has " << tree.nodes.size() << " nodes / "
       << tree.edges.size() << " edges\n";
  text << "sum-splitting and alignment: " << (rep.ok ? "pass" : "FAIL")
       << "\n";
  text << "displacement bound: " << (disp.ok ? "pass" : "FAIL") << "\n";
  for (const std::string& v : rep.violations) text << "violation: " << v << "\n";
  for (const std::string& v : disp.violations)
    text << "violation: " << v << "\n";
  text << "newick: " << tree_to_newick(tree) << "\n";
  if (!out_path.empty()) {
    write_file(out_path, tree_to_json(tree));
    text << "tree written to " << out_path << "\n";
  }
  emit(as_json, j, text.str());
  return rep.ok && disp.ok ? kOk : kIncompatible;
}

int cmd_verify(const std::string& cert_path,
               const std::vector<std::string>& tree_paths, bool as_json) {
  std::string text = slurp(cert_path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(cert_path + ": " + e.what());
  }
  std::vector<LoadedTree> trees;
  for (const std::string& p : tree_paths) trees.push_back(load_tree(p));

  std::ostringstream report;
  bool pass = false;

  if (j.contains("witnesses") && j.contains("a") && j.contains("b")) {
    if (trees.size() != 2 || !trees[0].mg || !trees[1].mg)
      throw InputError("rectangle certificates need two marked-graph trees");
    auto rect = rectangle_from_json(*trees[0].mg, *trees[1].mg, text);
    pass = verify_rectangle(*trees[0].mg, *trees[1].mg, rect);
    report << "rectangle certificate: "
           << (pass ? "all eight horizon memberships verified"
                    : "horizon membership FAILED")
           << "\n";
  } else if (j.contains("slack_lower")) {
    if (trees.size() != 1)
      throw InputError("good-pair certificates need exactly one tree");
    const Alphabet& a = trees[0].oracle->alphabet();
    auto stored = good_pair_from_json(a, text);
    auto fresh = make_good_pair(*trees[0].oracle, stored.g, stored.h,
                                stored.assumption);
    pass = true;
    auto check = [&](const char* name, const Rat& got, const Rat& want) {
      if (got != want) {
        pass = false;
        report << "mismatch in " << name << ": stored " << to_string(got)
               << ", recomputed " << to_string(want) << "\n";
      }
    };
    check("l(g)", stored.lg, fresh.lg);
    check("l(h)", stored.lh, fresh.lh);
    check("l(gh)", stored.lgh, fresh.lgh);
    check("l(gh^-1)", stored.lghi, fresh.lghi);
    check("slack_lower", stored.slack_lower, fresh.slack_lower);
    check("slack_upper", stored.slack_upper, fresh.slack_upper);
    if (pass) report << "good-pair certificate re-derived exactly\n";
  } else if (j.contains("kind")) {
    if (trees.size() != 2)
      throw InputError("compatibility witnesses need exactly two trees");
    const Alphabet& a = trees[0].oracle->alphabet();
    auto stored = compat_witness_from_json(a, text);
    if (!stored.witness) throw InputError("certificate lacks a witness pair");
    CompatVerdict fresh = compatible_on(*trees[0].oracle, *trees[1].oracle,
                                        {*stored.witness});
    pass = fresh.kind == stored.kind &&
           fresh.kind != CompatKind::CompatibleUpToBound;
    report << "compatibility witness (" << format_word(a, stored.witness->first)
           << ", " << format_word(a, stored.witness->second) << "): "
           << (pass ? "re-derived " + kind_name(stored.kind)
                    : "FAILED (recomputed " + kind_name(fresh.kind) + ")")
           << "\n";
  } else {
    throw InputError(cert_path + ": unrecognized certificate schema");
  }

  emit(as_json,
       {{"command", "verify"}, {"certificate", cert_path}, {"pass", pass}},
       report.str() + (pass ? "PASS\n" : "FAIL\n"));
  return pass ? kOk : kIncompatible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "treelen: exact translation length functions, compatibility "
      "certificates, and common-refinement reconstruction for free-group "
      "actions on simplicial metric trees"};
  app.require_subcommand(1);

  std::string format = "text";
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  unsigned seed = 0;
  app.add_option("--seed", seed,
                 "Seed for randomized spot-checks (never affects verdicts)");

  std::string tree_a, tree_b, out_path, cert_path;
  std::vector<std::string> words, tree_paths;
  int len_bound = 4, sample_bound = 2;
  std::string budget_str = "6,4";

  auto* length = app.add_subcommand("length", "Translation lengths of words");
  length->add_option("tree", tree_a, "Tree description (JSON)")->required();
  length->add_option("words", words, "Words over the tree's alphabet")
      ->required();

  auto* axioms =
      app.add_subcommand("axioms", "Check the length-function axioms");
  axioms->add_option("tree", tree_a)->required();
  axioms->add_option("--len-bound", len_bound, "Word length bound");

  auto* compat =
      app.add_subcommand("compat", "Decide/certify compatibility of two trees");
  compat->add_option("treeA", tree_a)->required();
  compat->add_option("treeB", tree_b)->required();
  compat->add_option("--len-bound", len_bound);
  compat->add_option("--budget", budget_str,
                     "Rectangle search budget as WORDLEN,ANCHORLEN");
  compat->add_option("--out", out_path, "Certificate output path");

  auto* good = app.add_subcommand("good-pair", "Find a good pair");
  good->add_option("tree", tree_a)->required();
  good->add_option("--len-bound", len_bound);
  good->add_option("--out", out_path);

  auto* based =
      app.add_subcommand("based-length", "Based lengths at a good-pair point");
  based->add_option("tree", tree_a)->required();
  based->add_option("words", words)->required();
  based->add_option("--good-pair", cert_path, "Good-pair certificate file");
  based->add_option("--len-bound", len_bound);

  auto* refine =
      app.add_subcommand("refine", "Reconstruct the common refinement tree");
  refine->add_option("treeA", tree_a)->required();
  refine->add_option("treeB", tree_b)->required();
  refine->add_option("--len-bound", len_bound);
  refine->add_option("--sample-bound", sample_bound,
                     "Word length bound for orbit sample points");
  refine->add_option("--out", out_path, "Tree output path");

  auto* verify = app.add_subcommand("verify", "Re-derive a certificate");
  verify->add_option("certificate", cert_path)->required();
  verify->add_option("trees", tree_paths, "Tree files the certificate cites")
      ->required();

  CLI11_PARSE(app, argc, argv);
  bool as_json = format == "json";

  try {
    if (len_bound <= 0 || sample_bound <= 0)
      throw InputError("bounds must be positive");
    Budget budget;
    if (compat->parsed()) {
      char comma = 0;
      std::istringstream bs(budget_str);
      if (!(bs >> budget.word_length >> comma >> budget.anchor_length) ||
          comma != ',' || budget.word_length <= 0 || budget.anchor_length <= 0)
        throw InputError("--budget expects WORDLEN,ANCHORLEN, both positive");
    }
    if (length->parsed()) return cmd_length(load_tree(tree_a), words, as_json);
    if (axioms->parsed())
      return cmd_axioms(load_tree(tree_a), len_bound, as_json);
    if (compat->parsed())
      return cmd_compat(load_tree(tree_a), load_tree(tree_b), len_bound,
                        budget, out_path, as_json);
    if (good->parsed())
      return cmd_good_pair(load_tree(tree_a), len_bound, out_path, as_json);
    if (based->parsed())
      return cmd_based_length(load_tree(tree_a), cert_path, len_bound, words,
                              as_json);
    if (refine->parsed())
      return cmd_refine(load_tree(tree_a), load_tree(tree_b), len_bound,
                        sample_bound, out_path, as_json);
    if (verify->parsed()) return cmd_verify(cert_path, tree_paths, as_json);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
