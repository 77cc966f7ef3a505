#pragma once

// Marked metric graphs and the geometry of their universal covers: free
// simplicial actions on metric trees. Points of the cover are addressed by
// anchor paths from a fixed lift of the base vertex; nothing global is ever
// materialized. All lengths and offsets are exact rationals.

#include <string>
#include <vector>

#include "treelen/rational.hpp"
#include "treelen/words.hpp"

namespace treelen {

// Oriented edge ids: structural edge k is traversed forward as 2k and
// backward as 2k+1.
using EdgePath = std::vector<int>;

inline int opp(int oid) { return oid ^ 1; }
inline int eindex(int oid) { return oid >> 1; }
inline bool is_reversed(int oid) { return oid & 1; }

class MetricGraph {
 public:
  struct Edge {
    std::string name;
    int from, to;
    Rat length;
  };

  MetricGraph(std::vector<std::string> vertex_names, std::vector<Edge> edges);

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::string& vertex_name(int v) const { return vertices_.at(v); }
  const Edge& edge(int k) const { return edges_.at(k); }
  int vertex_index(const std::string& name) const;  // -1 if absent
  int edge_index(const std::string& name) const;

  int src(int oid) const {
    const Edge& e = edges_[eindex(oid)];
    return is_reversed(oid) ? e.to : e.from;
  }
  int dst(int oid) const { return src(opp(oid)); }
  const Rat& elen(int oid) const { return edges_[eindex(oid)].length; }

  int first_betti() const { return edge_count() - vertex_count() + 1; }

 private:
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
};

// Remove backtracking (e followed by its reversal) everywhere.
EdgePath tighten(EdgePath path);
// Throws InputError unless consecutive edges are endpoint-compatible.
void check_path(const MetricGraph& g, const EdgePath& path);
Rat path_length(const MetricGraph& g, const EdgePath& path);
EdgePath reverse_path(const EdgePath& path);

// A point of the universal cover. `path` is a tightened edge path read from
// the base-vertex lift; offset == 0 means the terminal vertex of the path,
// otherwise 0 < offset < len(path.back()) and the point sits inside the
// final edge.
struct TreePoint {
  EdgePath path;
  Rat offset{0};

  bool is_vertex() const { return offset.numerator() == 0; }
  bool operator==(const TreePoint& o) const = default;
};

// Canonicalizing constructor: tightens and folds offset == len into the
// terminal vertex. Throws InputError on out-of-range offsets.
TreePoint make_point(const MetricGraph& g, EdgePath path, Rat offset = Rat(0));
inline TreePoint base_point() { return TreePoint{}; }

Rat depth(const MetricGraph& g, const TreePoint& p);  // distance to base lift
Rat distance(const MetricGraph& g, const TreePoint& p, const TreePoint& q);
// Point at distance s from p along the arc [p, q]; requires 0 <= s <= d(p,q).
TreePoint point_toward(const MetricGraph& g, const TreePoint& p,
                       const TreePoint& q, const Rat& s);
// The median (Fermat point) of a triple.
TreePoint median_point(const MetricGraph& g, const TreePoint& p,
                       const TreePoint& q, const TreePoint& r);
// Oriented edges crossed by [p, q]; requires vertex points.
EdgePath geodesic_edges(const MetricGraph& g, const TreePoint& p,
                        const TreePoint& q);

class MarkedMetricGraph {
 public:
  // Validates: rank match, closed tightened images, and that the images
  // generate the fundamental group (Stallings fold covers the rose).
  MarkedMetricGraph(MetricGraph graph, Alphabet alphabet, int base_vertex,
                    std::vector<EdgePath> images);

  static MarkedMetricGraph from_json(const std::string& text);
  static MarkedMetricGraph from_file(const std::string& path);

  const MetricGraph& graph() const { return graph_; }
  const Alphabet& alphabet() const { return alphabet_; }
  int base_vertex() const { return base_; }
  const EdgePath& image(int letter) const { return images_.at(letter); }

  // Tightened image path of a word (a path from the base lift to its
  // translate).
  EdgePath image_path(const Word& w) const;

 private:
  MetricGraph graph_;
  Alphabet alphabet_;
  int base_;
  std::vector<EdgePath> images_;
};

// The covering action: anchor(w . p) = tighten(image(w) ++ anchor(p)).
TreePoint act(const MarkedMetricGraph& m, const TreePoint& p, const Word& w);

Rat translation_length(const MarkedMetricGraph& m, const Word& w);
Rat based_length(const MarkedMetricGraph& m, const TreePoint& p,
                 const Word& w);

struct AxisDescriptor {
  CyclicWord element;
  EdgePath entry;   // geodesic from the base lift to the axis
  EdgePath period;  // fundamental domain starting at the entry endpoint
  Rat length;       // = sum of period edge lengths = translation length
};

// Axis of a hyperbolic word. Throws DomainError on the identity.
AxisDescriptor axis(const MarkedMetricGraph& m, const Word& w);
// Nearest point of the axis of w; x must be given, w hyperbolic.
TreePoint project_to_axis(const MarkedMetricGraph& m, const TreePoint& x,
                          const Word& w);

// An oriented edge of the universal cover: the lift of `oedge` whose origin
// is the (vertex) point `origin`.
struct EdgeLift {
  TreePoint origin;
  int oedge;
};

// True iff the attracting end of w lies among the ends on the terminal side
// of the lift. Identity -> false.
bool horizon_member(const MarkedMetricGraph& m, const EdgeLift& e,
                    const Word& w);

}  // namespace treelen
