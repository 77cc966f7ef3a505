#include "treelen/mgraph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace treelen {

MetricGraph::MetricGraph(std::vector<std::string> vertex_names,
                         std::vector<Edge> edges)
    : vertices_(std::move(vertex_names)), edges_(std::move(edges)) {
  if (vertices_.empty()) throw InputError("graph needs at least one vertex");
  for (const Edge& e : edges_) {
    if (e.from < 0 || e.from >= vertex_count() || e.to < 0 ||
        e.to >= vertex_count())
      throw InputError("edge endpoint out of range: " + e.name);
    if (e.length <= Rat(0)) throw InputError("edge length must be positive: " + e.name);
  }
  // Connectivity.
  std::vector<bool> seen(vertex_count(), false);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = true;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (const Edge& e : edges_)
      for (int w : {e.from == v ? e.to : -1, e.to == v ? e.from : -1})
        if (w >= 0 && !seen[w]) {
          seen[w] = true;
          bfs.push(w);
        }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw InputError("graph is not connected");
  // No valence-2 (or lower) vertices, except the one-vertex rose.
  if (vertex_count() > 1) {
    std::vector<int> valence(vertex_count(), 0);
    for (const Edge& e : edges_) {
      ++valence[e.from];
      ++valence[e.to];
    }
    for (int v = 0; v < vertex_count(); ++v)
      if (valence[v] < 3)
        throw InputError("vertex of valence < 3: " + vertices_[v]);
  }
}

int MetricGraph::vertex_index(const std::string& name) const {
  for (int v = 0; v < vertex_count(); ++v)
    if (vertices_[v] == name) return v;
  return -1;
}

int MetricGraph::edge_index(const std::string& name) const {
  for (int k = 0; k < edge_count(); ++k)
    if (edges_[k].name == name) return k;
  return -1;
}

EdgePath tighten(EdgePath path) {
  EdgePath out;
  out.reserve(path.size());
  for (int oid : path) {
    if (!out.empty() && out.back() == opp(oid))
      out.pop_back();
    else
      out.push_back(oid);
  }
  return out;
}

void check_path(const MetricGraph& g, const EdgePath& path) {
  for (size_t i = 0; i < path.size(); ++i) {
    if (eindex(path[i]) < 0 || eindex(path[i]) >= g.edge_count())
      throw InputError("edge id out of range in path");
    if (i > 0 && g.dst(path[i - 1]) != g.src(path[i]))
      throw InputError("path is not edge-to-edge continuous");
  }
}

Rat path_length(const MetricGraph& g, const EdgePath& path) {
  Rat sum(0);
  for (int oid : path) sum += g.elen(oid);
  return sum;
}

EdgePath reverse_path(const EdgePath& path) {
  EdgePath out(path.rbegin(), path.rend());
  for (int& oid : out) oid = opp(oid);
  return out;
}

TreePoint make_point(const MetricGraph& g, EdgePath path, Rat offset) {
  path = tighten(std::move(path));
  if (offset < Rat(0)) throw InputError("negative offset");
  if (offset > Rat(0)) {
    if (path.empty()) throw InputError("offset without a final edge");
    const Rat& len = g.elen(path.back());
    if (offset > len) throw InputError("offset exceeds edge length");
    if (offset == len) offset = 0;
  }
  return TreePoint{std::move(path), std::move(offset)};
}

namespace {

// Length contributed by element i of the anchor; the final edge of a
// non-vertex point is only traversed up to the offset.
Rat traversed(const MetricGraph& g, const TreePoint& p, size_t i) {
  if (i + 1 == p.path.size() && p.offset > Rat(0)) return p.offset;
  return g.elen(p.path[i]);
}

Rat tail_length(const MetricGraph& g, const TreePoint& p, size_t i) {
  Rat sum(0);
  for (; i < p.path.size(); ++i) sum += traversed(g, p, i);
  return sum;
}

bool fully_traversed(const TreePoint& p, size_t i) {
  return i + 1 < p.path.size() || p.offset == Rat(0);
}

}  // namespace

Rat depth(const MetricGraph& g, const TreePoint& p) {
  return tail_length(g, p, 0);
}

Rat distance(const MetricGraph& g, const TreePoint& p, const TreePoint& q) {
  size_t k = 0;
  while (k < p.path.size() && k < q.path.size() && p.path[k] == q.path[k] &&
         fully_traversed(p, k) && fully_traversed(q, k))
    ++k;
  if (k < p.path.size() && k < q.path.size() && p.path[k] == q.path[k]) {
    // Both points meet the same cover edge; at most one passes beyond it.
    const Rat& len = g.elen(p.path[k]);
    Rat a = fully_traversed(p, k) ? len : p.offset;
    Rat b = fully_traversed(q, k) ? len : q.offset;
    Rat d = a < b ? b - a : a - b;
    return d + tail_length(g, p, k + 1) + tail_length(g, q, k + 1);
  }
  return tail_length(g, p, k) + tail_length(g, q, k);
}

namespace {

// Point on the anchor of p at distance d from the base lift; d <= depth(p).
TreePoint anchor_prefix(const MetricGraph& g, const TreePoint& p, Rat d) {
  EdgePath path;
  for (size_t i = 0; i < p.path.size(); ++i) {
    if (d.numerator() == 0) break;
    Rat step = traversed(g, p, i);
    path.push_back(p.path[i]);
    if (d <= step) return make_point(g, std::move(path), d);
    d -= step;
  }
  if (d.numerator() != 0) throw DomainError("depth beyond anchor");
  return make_point(g, std::move(path), Rat(0));
}

}  // namespace

TreePoint point_toward(const MetricGraph& g, const TreePoint& p,
                       const TreePoint& q, const Rat& s) {
  Rat dp = depth(g, p), dq = depth(g, q), dpq = distance(g, p, q);
  if (s < Rat(0) || s > dpq) throw DomainError("point_toward: s outside [0, d(p,q)]");
  Rat gromov = (dp + dq - dpq) / 2;  // depth of the branch point over base
  if (s <= dp - gromov) return anchor_prefix(g, p, dp - s);
  return anchor_prefix(g, q, gromov + (s - (dp - gromov)));
}

TreePoint median_point(const MetricGraph& g, const TreePoint& p,
                       const TreePoint& q, const TreePoint& r) {
  Rat s = (distance(g, p, q) + distance(g, p, r) - distance(g, q, r)) / 2;
  return point_toward(g, p, q, s);
}

EdgePath geodesic_edges([[maybe_unused]] const MetricGraph& g,
                        const TreePoint& p, const TreePoint& q) {
  if (!p.is_vertex() || !q.is_vertex())
    throw DomainError("geodesic_edges requires vertex points");
  size_t k = 0;
  while (k < p.path.size() && k < q.path.size() && p.path[k] == q.path[k]) ++k;
  EdgePath out;
  for (size_t i = p.path.size(); i > k; --i) out.push_back(opp(p.path[i - 1]));
  out.insert(out.end(), q.path.begin() + k, q.path.end());
  return out;
}

MarkedMetricGraph::MarkedMetricGraph(MetricGraph graph, Alphabet alphabet,
                                     int base_vertex,
                                     std::vector<EdgePath> images)
    : graph_(std::move(graph)),
      alphabet_(std::move(alphabet)),
      base_(base_vertex),
      images_(std::move(images)) {
  if (base_ < 0 || base_ >= graph_.vertex_count())
    throw InputError("base vertex out of range");
  if (static_cast<int>(images_.size()) != alphabet_.rank())
    throw InputError("marking must cover every generator exactly once");
  if (alphabet_.rank() != graph_.first_betti())
    throw InputError("marking rank differs from graph rank");
  for (EdgePath& img : images_) {
    check_path(graph_, img);
    img = tighten(std::move(img));
    if (!img.empty() &&
        (graph_.src(img.front()) != base_ || graph_.dst(img.back()) != base_))
      throw InputError("marking image is not a loop at the base vertex");
  }
  // The images must generate pi_1 of the graph. Collapse a spanning tree to
  // read each image as a word over the non-tree edges, then Stallings-fold.
  std::vector<int> tree_edge(graph_.edge_count(), -1);  // -1 tree, else letter
  std::vector<bool> seen(graph_.vertex_count(), false);
  std::vector<bool> in_tree(graph_.edge_count(), false);
  seen[base_] = true;
  std::queue<int> bfs;
  bfs.push(base_);
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (int k = 0; k < graph_.edge_count(); ++k) {
      const auto& e = graph_.edge(k);
      int w = e.from == v ? e.to : (e.to == v ? e.from : -1);
      if (w >= 0 && !seen[w]) {
        seen[w] = true;
        in_tree[k] = true;
        bfs.push(w);
      }
    }
  }
  int next = 0;
  for (int k = 0; k < graph_.edge_count(); ++k)
    if (!in_tree[k]) tree_edge[k] = next++;
  std::vector<std::string> names;
  for (int i = 0; i < next; ++i) names.push_back("e" + std::to_string(i));
  Alphabet collapse(names);
  std::vector<Word> words;
  for (const EdgePath& img : images_) {
    std::vector<Lit> lits;
    for (int oid : img) {
      int letter = tree_edge[eindex(oid)];
      if (letter >= 0) lits.push_back(is_reversed(oid) ? -(letter + 1) : letter + 1);
    }
    words.push_back(Word(lits));
  }
  if (!SubgroupAutomaton(collapse, words).is_full_group())
    throw InputError("marking images do not generate the fundamental group");
}

EdgePath MarkedMetricGraph::image_path(const Word& w) const {
  EdgePath out;
  for (Lit l : w.lits()) {
    if (lit_index(l) >= alphabet_.rank())
      throw InputError("word letter outside the marking alphabet");
    const EdgePath& img = images_[lit_index(l)];
    if (l > 0)
      out.insert(out.end(), img.begin(), img.end());
    else {
      EdgePath r = reverse_path(img);
      out.insert(out.end(), r.begin(), r.end());
    }
  }
  return tighten(std::move(out));
}

TreePoint act(const MarkedMetricGraph& m, const TreePoint& p, const Word& w) {
  EdgePath img = m.image_path(w);
  if (p.is_vertex()) {
    img.insert(img.end(), p.path.begin(), p.path.end());
    return make_point(m.graph(), std::move(img), Rat(0));
  }
  int last = p.path.back();
  img.insert(img.end(), p.path.begin(), p.path.end() - 1);
  EdgePath prefix = tighten(std::move(img));
  if (!prefix.empty() && prefix.back() == opp(last))
    // The cancellation runs into the partial edge: the point now sits on the
    // reversed edge, measured from the other end.
    return make_point(m.graph(), std::move(prefix),
                      m.graph().elen(last) - p.offset);
  prefix.push_back(last);
  return make_point(m.graph(), std::move(prefix), p.offset);
}

Rat translation_length(const MarkedMetricGraph& m, const Word& w) {
  EdgePath loop = m.image_path(w);
  // Cyclic tightening.
  size_t a = 0, b = loop.size();
  while (b - a >= 2 && loop[a] == opp(loop[b - 1])) {
    ++a;
    --b;
  }
  Rat sum(0);
  for (size_t i = a; i < b; ++i) sum += m.graph().elen(loop[i]);
  return sum;
}

Rat based_length(const MarkedMetricGraph& m, const TreePoint& p,
                 const Word& w) {
  return distance(m.graph(), p, act(m, p, w));
}

TreePoint project_to_axis(const MarkedMetricGraph& m, const TreePoint& x,
                          const Word& w) {
  if (translation_length(m, w).numerator() == 0)
    throw DomainError("projection needs a hyperbolic word");
  // [w^-1 x, w x] crosses the axis through the projection of x.
  return median_point(m.graph(), act(m, x, invert(w)), act(m, x, w), x);
}

AxisDescriptor axis(const MarkedMetricGraph& m, const Word& w) {
  Rat len = translation_length(m, w);
  if (len.numerator() == 0) throw DomainError("identity has no axis");
  TreePoint proj = project_to_axis(m, base_point(), w);
  if (!proj.is_vertex())
    throw DomainError("axis projection of a vertex must be a vertex");
  EdgePath period = geodesic_edges(m.graph(), proj, act(m, proj, w));
  if (path_length(m.graph(), period) != len)
    throw DomainError("axis period does not realize the translation length");
  return AxisDescriptor{cyclic_reduce(w).cyclic, proj.path, std::move(period),
                        std::move(len)};
}

bool horizon_member(const MarkedMetricGraph& m, const EdgeLift& e,
                    const Word& w) {
  Rat len = translation_length(m, w);
  if (len.numerator() == 0) return false;
  if (!e.origin.is_vertex() ||
      (!e.origin.path.empty() ? m.graph().dst(e.origin.path.back())
                              : m.base_vertex()) != m.graph().src(e.oedge))
    throw InputError("edge lift origin does not match the edge");
  const MetricGraph& g = m.graph();
  Rat d0 = (based_length(m, e.origin, w) - len) / 2;
  long long n = rat_ceil((d0 + g.elen(e.oedge)) / len) + 1;
  EdgePath tpath = e.origin.path;
  tpath.push_back(e.oedge);
  TreePoint tpoint = make_point(g, std::move(tpath));
  auto side = [&](long long k) {
    TreePoint z = act(m, e.origin, power(w, static_cast<int>(k)));
    return distance(g, z, e.origin) ==
           g.elen(e.oedge) + distance(g, z, tpoint);
  };
  bool r = side(n);
  if (side(n + 1) != r) throw DomainError("horizon test did not stabilize");
  return r;
}

namespace {

EdgePath parse_edge_path(const MetricGraph& g, const std::string& text) {
  EdgePath path;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    bool rev = !tok.empty() && tok[0] == '~';
    std::string name = rev ? tok.substr(1) : tok;
    int k = g.edge_index(name);
    if (k < 0) throw InputError("unknown edge in path: " + name);
    path.push_back(2 * k + (rev ? 1 : 0));
  }
  check_path(g, path);
  return path;
}

}  // namespace

MarkedMetricGraph MarkedMetricGraph::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("bad JSON: ") + e.what());
  }
  std::vector<std::string> vnames;
  for (const auto& v : j.at("vertices")) vnames.push_back(v.get<std::string>());
  std::vector<MetricGraph::Edge> edges;
  auto vidx = [&](const std::string& n) {
    auto it = std::find(vnames.begin(), vnames.end(), n);
    if (it == vnames.end()) throw InputError("unknown vertex: " + n);
    return static_cast<int>(it - vnames.begin());
  };
  for (const auto& e : j.at("edges")) {
    Rat len = e.at("length").is_string()
                  ? parse_rat(e.at("length").get<std::string>())
                  : Rat(e.at("length").get<long long>());
    edges.push_back({e.at("name").get<std::string>(),
                     vidx(e.at("from").get<std::string>()),
                     vidx(e.at("to").get<std::string>()), len});
  }
  MetricGraph graph(vnames, edges);
  int base = graph.vertex_index(j.at("base_vertex").get<std::string>());
  if (base < 0) throw InputError("unknown base vertex");
  std::vector<std::string> letters;
  for (const auto& [k, v] : j.at("marking").items()) letters.push_back(k);
  std::sort(letters.begin(), letters.end());
  Alphabet alphabet(letters);
  std::vector<EdgePath> images;
  for (const std::string& l : letters)
    images.push_back(
        parse_edge_path(graph, j.at("marking").at(l).get<std::string>()));
  return MarkedMetricGraph(std::move(graph), std::move(alphabet), base,
                           std::move(images));
}

MarkedMetricGraph MarkedMetricGraph::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace treelen
