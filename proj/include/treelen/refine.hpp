#pragma once

#include <functional>
#include <string>
#include <vector>

#include "treelen/lfcore.hpp"
#include "treelen/rational.hpp"
#include "treelen/words.hpp"

namespace treelen {

// A based length function P(g) = d(p, p.g) at an implicit basepoint,
// evaluated purely from translation lengths.
using BasedOracle = std::function<Rat(const Word&)>;

// The based oracle at the canonical basepoint of a good pair.
BasedOracle dagger_oracle(const LengthOracle& l, const GoodPairCertificate& gp);

// Distances between the orbit points p.x_i of a finite sample, recovered from
// a based oracle: d(i, j) = P(x_j x_i^-1).
struct OrbitMetric {
  std::vector<Word> sample;
  std::vector<std::vector<Rat>> d;
};

// Thrown when the sample distances cannot come from points of a tree; carries
// the offending tuple.
struct MetricViolation : DomainError {
  std::vector<int> indices;
  MetricViolation(const std::string& what, std::vector<int> idx)
      : DomainError(what), indices(std::move(idx)) {}
};

// Requires the identity in the sample. Validates symmetry, zero diagonal,
// the triangle inequality, and the four-point condition; throws
// MetricViolation naming the first offending pair/triple/quadruple.
OrbitMetric orbit_metric(const BasedOracle& p, const std::vector<Word>& sample);

// An edge-weighted finite tree spanned by the sample points. Nodes carry the
// sample indices mapped to them (possibly several when orbit points coincide,
// possibly none for Steiner branch nodes).
struct FiniteTree {
  struct Node {
    std::vector<int> samples;
  };
  struct Edge {
    int a, b;
    Rat length;
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<int> sample_node;  // sample index -> node index

  Rat node_distance(int u, int v) const;  // path metric between node indices
  Rat sample_distance(int i, int j) const {
    return node_distance(sample_node[i], sample_node[j]);
  }
};

// Exact realization of a four-point metric by iterative Gromov-product
// insertion. Post-verifies that the tree reproduces the matrix exactly and
// that every unlabeled node has degree >= 3; throws MetricViolation if the
// matrix turns out not to be additive.
FiniteTree build_tree(const OrbitMetric& om);

struct RefinementReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks the l1 and alignment structure of the reconstruction against the
// individual based oracles of a simultaneously good pair: (i) tree distances
// split as d_A + d_B; (ii) betweenness in the tree implies betweenness for
// both summands; (iii) every built edge has positive length.
RefinementReport verify_refinement(const LengthOracle& l, const LengthOracle& m,
                                   const SimultaneousGoodPair& gp,
                                   const std::vector<Word>& sample,
                                   const FiniteTree& built);

struct DisplacementReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::vector<Word> on_axis;  // sample elements whose basepoint displacement
                              // equals the translation length
};

// For each g in the sample: P(g) >= lm(g) with a nonnegative half-difference
// (the basepoint-to-axis distance); equality flags that the basepoint lies on
// the characteristic set of g.
DisplacementReport displacement_check(const LengthOracle& lm,
                                      const BasedOracle& p,
                                      const std::vector<Word>& sample);

// Serialization. Sample points are named p0, p1, ... by sample index.
std::string tree_to_json(const FiniteTree& t);
FiniteTree tree_from_json(const std::string& text);
std::string tree_to_newick(const FiniteTree& t);

// Sample-labeled isometry of finite trees (same samples at the same relative
// positions, identical branch structure and edge lengths).
bool trees_isomorphic(const FiniteTree& a, const FiniteTree& b);

}  // namespace treelen
