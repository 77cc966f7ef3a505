#pragma once

// Translation length functions of Bass-Serre trees for tree-shaped graphs of
// groups whose vertex groups are generated by subsets of a fixed basis of an
// ambient free group, with edge groups generated by a single shared basis
// letter. Elliptic/hyperbolic classification and lengths reduce to a
// letter-support syllable rewriting.

#include <string>
#include <vector>

#include "treelen/rational.hpp"
#include "treelen/words.hpp"

namespace treelen {

class GraphOfGroupsSpec {
 public:
  struct Vertex {
    std::string name;
    std::vector<int> letters;  // sorted letter indices of the ambient alphabet
  };
  struct Edge {
    int from, to;
    int letter;
    Rat length;
  };

  // Throws InputError when the spec is invalid (see validate for the rules).
  GraphOfGroupsSpec(Alphabet alphabet, std::vector<Vertex> vertices,
                    std::vector<Edge> edges);

  static GraphOfGroupsSpec from_json(const std::string& text);
  static GraphOfGroupsSpec from_file(const std::string& path);

  const Alphabet& alphabet() const { return alphabet_; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Vertex& vertex(int v) const { return vertices_.at(v); }
  const Edge& edge(int k) const { return edges_.at(k); }
  int vertex_index(const std::string& name) const;

  bool vertex_has_letter(int v, int letter) const;
  // Weighted distance between vertices in the underlying tree.
  const Rat& tree_distance(int u, int v) const { return dist_[u][v]; }

 private:
  Alphabet alphabet_;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Rat>> dist_;
};

struct SpecReport {
  bool valid;
  std::vector<std::string> problems;
};

// Non-throwing validation of the raw data (same rules as the constructor).
SpecReport validate_spec(const Alphabet& alphabet,
                         const std::vector<GraphOfGroupsSpec::Vertex>& vertices,
                         const std::vector<GraphOfGroupsSpec::Edge>& edges);

struct Syllable {
  std::vector<int> support;  // vertices whose group contains every letter
  Word word;
};

// Cyclic syllable normal form. Fewer than two syllables means the element is
// elliptic (conjugate into a vertex group).
struct SyllableForm {
  std::vector<Syllable> syllables;
  bool elliptic() const { return syllables.size() <= 1; }
};

SyllableForm normalize(const GraphOfGroupsSpec& spec, const Word& w);
Rat translation_length_gog(const GraphOfGroupsSpec& spec, const Word& w);

}  // namespace treelen
