#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>

#include "treelen/gog.hpp"
#include "treelen/mgraph.hpp"
#include "treelen/refine.hpp"

using namespace treelen;

namespace {

std::string fixture(const std::string& name) {
  const char* dir = std::getenv("TREELEN_FIXTURES");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

const LengthOracle& rose_oracle() {
  static LengthOracle l = LengthOracle::from_mgraph(
      std::make_shared<const MarkedMetricGraph>(
          MarkedMetricGraph::from_file(fixture("rose2.json"))));
  return l;
}
const LengthOracle& phi2_oracle() {
  static LengthOracle l = LengthOracle::from_mgraph(
      std::make_shared<const MarkedMetricGraph>(
          MarkedMetricGraph::from_file(fixture("rose2_phi2.json"))));
  return l;
}
const LengthOracle& gogA() {
  static LengthOracle l =
      LengthOracle::from_gog(std::make_shared<const GraphOfGroupsSpec>(
          GraphOfGroupsSpec::from_file(fixture("example10_A.json"))));
  return l;
}
const LengthOracle& gogB() {
  static LengthOracle l =
      LengthOracle::from_gog(std::make_shared<const GraphOfGroupsSpec>(
          GraphOfGroupsSpec::from_file(fixture("example10_B.json"))));
  return l;
}

Word W(const LengthOracle& l, const std::string& s) {
  return parse_word(l.alphabet(), s);
}

BasedOracle rose_based() {
  const auto& l = rose_oracle();
  // a good pair whose triple intersection point is the base vertex
  auto gp = make_good_pair(l, W(l, "b a a"), W(l, "b' a a"));
  return dagger_oracle(l, gp);
}

}  // namespace

TEST_CASE("orbit metric basics") {
  auto p = rose_based();
  auto om1 = orbit_metric(p, {Word()});
  CHECK(om1.d.size() == 1);
  CHECK(om1.d[0][0] == Rat(0));

  const auto& l = rose_oracle();
  auto om = orbit_metric(p, {Word(), W(l, "a"), W(l, "b")});
  CHECK(om.d[0][1] == Rat(1));
  CHECK(om.d[0][2] == Rat(1));
  CHECK(om.d[1][2] == Rat(2));

  CHECK_THROWS_AS(orbit_metric(p, {W(l, "a")}), InputError);
}

TEST_CASE("orbit metric rejects non-tree distances") {
  // a 4-cycle metric (adjacent 1, opposite 2) is not additive
  Alphabet ab({"a", "b"});
  std::map<Word, Rat> table;
  auto put = [&](const std::string& s, int v) {
    table[parse_word(ab, s)] = Rat(v);
  };
  put("a", 1);
  put("a'", 1);
  put("b", 1);
  put("b'", 1);
  put("a b", 2);
  put("b' a'", 2);
  put("a b a'", 1);
  put("a b' a'", 1);
  put("b a'", 2);
  put("a b'", 2);
  BasedOracle cyc = [&](const Word& w) {
    if (w.empty()) return Rat(0);
    return table.at(w);
  };
  std::vector<Word> sample{Word(), parse_word(ab, "a"), parse_word(ab, "a b"),
                           parse_word(ab, "b")};
  try {
    orbit_metric(cyc, sample);
    FAIL("expected a four-point violation");
  } catch (const MetricViolation& v) {
    CHECK(v.indices.size() == 4);
  }
}

TEST_CASE("tree realization of small samples") {
  auto p = rose_based();
  const auto& l = rose_oracle();

  auto om2 = orbit_metric(p, {Word(), W(l, "a")});
  auto t2 = build_tree(om2);
  CHECK(t2.edges.size() == 1);
  CHECK(t2.edges[0].length == Rat(1));

  // d = (1,1,2): the identity point is interior, no Steiner node
  auto om3 = orbit_metric(p, {Word(), W(l, "a"), W(l, "b")});
  auto t3 = build_tree(om3);
  CHECK(t3.nodes.size() == 3);
  int deg0 = 0;
  for (const auto& e : t3.edges)
    deg0 += (e.a == t3.sample_node[0]) + (e.b == t3.sample_node[0]);
  CHECK(deg0 == 2);
}

TEST_CASE("realization reproduces the matrix for larger rose samples") {
  auto p = rose_based();
  auto sample = enumerate_words(rose_oracle().alphabet(), 2);
  auto om = orbit_metric(p, sample);
  auto t = build_tree(om);  // internal post-verification is exact
  for (size_t i = 0; i < sample.size(); ++i)
    CHECK(t.sample_distance(0, static_cast<int>(i)) == om.d[0][i]);
}

TEST_CASE("insertion order does not change the tree") {
  auto p = rose_based();
  const auto& l = rose_oracle();
  std::vector<Word> sample{Word(),        W(l, "a"),   W(l, "b"),
                           W(l, "a b"),   W(l, "b'"),  W(l, "a a")};
  auto base = build_tree(orbit_metric(p, sample));
  std::vector<int> perm(sample.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  for (int trial = 0; trial < 8; ++trial) {
    std::next_permutation(perm.begin(), perm.end());
    std::vector<Word> shuffled(sample.size());
    for (size_t i = 0; i < perm.size(); ++i) shuffled[i] = sample[perm[i]];
    auto t = build_tree(orbit_metric(p, shuffled));
    // relabel back through the permutation before comparing
    FiniteTree back = t;
    for (auto& node : back.nodes)
      for (auto& s : node.samples) s = perm[s];
    for (size_t i = 0; i < perm.size(); ++i)
      back.sample_node[perm[i]] = t.sample_node[i];
    CHECK(trees_isomorphic(base, back));
  }
}

TEST_CASE("refinement pipeline for identical oracles") {
  const auto& l = rose_oracle();
  auto gp = simultaneous_good_pair(l, l, 3);
  REQUIRE(gp.has_value());
  auto sum = sum_oracle(l, l);
  auto p = dagger_oracle(sum, gp->for_sum);
  auto sample = enumerate_words(l.alphabet(), 2);
  auto om = orbit_metric(p, sample);
  auto t = build_tree(om);
  auto rep = verify_refinement(l, l, *gp, sample, t);
  CHECK(rep.ok);
  // doubled metric: every distance splits evenly
  for (size_t i = 1; i < sample.size(); ++i)
    CHECK(om.d[0][i] ==
          based_length_dagger(l, gp->for_l, sample[i]) * 2);
}

TEST_CASE("refinement pipeline for the compatible pair") {
  auto gp = simultaneous_good_pair(gogA(), gogB(), 4);
  REQUIRE(gp.has_value());
  auto sum = sum_oracle(gogA(), gogB());
  auto p = dagger_oracle(sum, gp->for_sum);
  auto sample = enumerate_words(gogA().alphabet(), 2);
  auto om = orbit_metric(p, sample);
  auto t = build_tree(om);
  auto rep = verify_refinement(gogA(), gogB(), *gp, sample, t);
  CHECK(rep.ok);
}

TEST_CASE("incompatible pair fails the pipeline") {
  const auto& l = rose_oracle();
  const auto& m = phi2_oracle();
  auto gp = simultaneous_good_pair(l, m, 4);
  REQUIRE(gp.has_value());
  auto sum = sum_oracle(l, m);
  auto p = dagger_oracle(sum, gp->for_sum);
  auto sample = enumerate_words(l.alphabet(), 3);
  bool violated = false;
  try {
    auto om = orbit_metric(p, sample);
    auto t = build_tree(om);
    auto rep = verify_refinement(l, m, *gp, sample, t);
    violated = !rep.ok;
  } catch (const MetricViolation&) {
    violated = true;
  }
  CHECK(violated);
}

TEST_CASE("displacement check") {
  const auto& l = rose_oracle();
  auto p = rose_based();
  auto sample = enumerate_words(l.alphabet(), 3);
  auto rep = displacement_check(l, p, sample);
  CHECK(rep.ok);
  auto on_axis = [&](const std::string& s) {
    return std::find(rep.on_axis.begin(), rep.on_axis.end(), W(l, s)) !=
           rep.on_axis.end();
  };
  CHECK(on_axis("a"));  // basepoint lies on the a-axis
  CHECK(std::find(rep.on_axis.begin(), rep.on_axis.end(), Word()) !=
        rep.on_axis.end());

  auto gp = simultaneous_good_pair(gogA(), gogB(), 4);
  REQUIRE(gp.has_value());
  auto sum = sum_oracle(gogA(), gogB());
  auto pr = dagger_oracle(sum, gp->for_sum);
  Word ac = parse_word(gogA().alphabet(), "a c");
  auto rep2 = displacement_check(sum, pr, {Word(), ac});
  CHECK(rep2.ok);
  CHECK(pr(ac) >= Rat(6));
}

TEST_CASE("tree serialization") {
  auto p = rose_based();
  const auto& l = rose_oracle();
  auto om = orbit_metric(p, enumerate_words(l.alphabet(), 2));
  auto t = build_tree(om);
  auto t2 = tree_from_json(tree_to_json(t));
  CHECK(trees_isomorphic(t, t2));
  auto nwk = tree_to_newick(t);
  CHECK(nwk.find("p0") != std::string::npos);
  CHECK(nwk.back() == ';');
}
