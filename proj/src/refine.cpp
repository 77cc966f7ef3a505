#include "treelen/refine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "json.hpp"

namespace treelen {

namespace {

std::string rat_str(const Rat& r) { return to_string(r); }

}  // namespace

BasedOracle dagger_oracle(const LengthOracle& l,
                          const GoodPairCertificate& gp) {
  return [l, gp](const Word& k) { return based_length_dagger(l, gp, k); };
}

OrbitMetric orbit_metric(const BasedOracle& p,
                         const std::vector<Word>& sample) {
  bool has_id = false;
  for (const auto& w : sample) has_id = has_id || w.empty();
  if (!has_id) throw InputError("sample must contain the identity");
  int n = static_cast<int>(sample.size());
  OrbitMetric om;
  om.sample = sample;
  om.d.assign(n, std::vector<Rat>(n, Rat(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) om.d[i][j] = p(concat(sample[j], invert(sample[i])));

  for (int i = 0; i < n; ++i) {
    if (!(om.d[i][i] == Rat(0)))
      throw MetricViolation("nonzero diagonal at index " + std::to_string(i),
                            {i});
    for (int j = i + 1; j < n; ++j) {
      if (om.d[i][j] != om.d[j][i])
        throw MetricViolation("asymmetric distance at (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")",
                              {i, j});
      if (om.d[i][j] < Rat(0))
        throw MetricViolation("negative distance at (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")",
                              {i, j});
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (om.d[i][j] > om.d[i][k] + om.d[k][j])
          throw MetricViolation(
              "triangle inequality fails at (" + std::to_string(i) + ", " +
                  std::to_string(j) + ", " + std::to_string(k) + ")",
              {i, j, k});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          Rat s1 = om.d[i][j] + om.d[k][l];
          Rat s2 = om.d[i][k] + om.d[j][l];
          Rat s3 = om.d[i][l] + om.d[j][k];
          Rat hi = std::max({s1, s2, s3});
          int at_max = (s1 == hi) + (s2 == hi) + (s3 == hi);
          if (at_max < 2)
            throw MetricViolation(
                "four-point condition fails at (" + std::to_string(i) + ", " +
                    std::to_string(j) + ", " + std::to_string(k) + ", " +
                    std::to_string(l) + ")",
                {i, j, k, l});
        }
  return om;
}

Rat FiniteTree::node_distance(int u, int v) const {
  if (u == v) return Rat(0);
  // BFS over the tree accumulating exact path lengths
  std::vector<Rat> dist(nodes.size(), Rat(-1));
  std::vector<std::vector<std::pair<int, Rat>>> adj(nodes.size());
  for (const auto& e : edges) {
    adj[e.a].push_back({e.b, e.length});
    adj[e.b].push_back({e.a, e.length});
  }
  std::deque<int> queue{u};
  dist[u] = Rat(0);
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    if (x == v) return dist[x];
    for (auto& [y, len] : adj[x])
      if (dist[y] < Rat(0)) {
        dist[y] = dist[x] + len;
        queue.push_back(y);
      }
  }
  throw DomainError("disconnected tree");
}

namespace {

// Node path between two nodes of a tree under construction.
std::vector<int> tree_path(const FiniteTree& t, int u, int v) {
  std::vector<int> parent(t.nodes.size(), -1);
  std::vector<std::vector<int>> adj(t.nodes.size());
  for (const auto& e : t.edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::deque<int> queue{u};
  parent[u] = u;
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    if (x == v) break;
    for (int y : adj[x])
      if (parent[y] == -1) {
        parent[y] = x;
        queue.push_back(y);
      }
  }
  std::vector<int> path{v};
  while (path.back() != u) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

int find_edge(const FiniteTree& t, int a, int b) {
  for (size_t i = 0; i < t.edges.size(); ++i)
    if ((t.edges[i].a == a && t.edges[i].b == b) ||
        (t.edges[i].a == b && t.edges[i].b == a))
      return static_cast<int>(i);
  throw DomainError("edge lookup failed");
}

// The node at exact distance `t` from `u` along the path to `v`, splitting an
// edge with a fresh Steiner node when the position is interior.
int node_at_offset(FiniteTree& tree, int u, int v, const Rat& t) {
  auto path = tree_path(tree, u, v);
  Rat walked(0);
  for (size_t s = 0; s + 1 < path.size(); ++s) {
    int ei = find_edge(tree, path[s], path[s + 1]);
    Rat len = tree.edges[ei].length;
    if (walked + len < t) {
      walked += len;
      continue;
    }
    if (walked + len == t) return path[s + 1];
    if (walked == t) return path[s];
    // split edge ei at offset t - walked from path[s]
    int fresh = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    Rat first = t - walked;
    Rat second = len - first;
    tree.edges[ei] = {path[s], fresh, first};
    tree.edges.push_back({fresh, path[s + 1], second});
    return fresh;
  }
  if (walked == t) return v;
  throw MetricViolation("projection offset exceeds the path length", {});
}

}  // namespace

FiniteTree build_tree(const OrbitMetric& om) {
  int n = static_cast<int>(om.sample.size());
  FiniteTree t;
  t.sample_node.assign(n, -1);
  t.nodes.push_back({{0}});
  t.sample_node[0] = 0;
  for (int i = 1; i < n; ++i) {
    int attach;
    if (i == 1) {
      attach = 0;
    } else {
      // the projection of point i onto the current span lies on the path from
      // point 0 toward the witness maximizing the Gromov product at 0
      Rat best(-1);
      int witness = 1;
      for (int j = 1; j < i; ++j) {
        Rat gp = (om.d[0][i] + om.d[0][j] - om.d[i][j]) / 2;
        if (gp > best) {
          best = gp;
          witness = j;
        }
      }
      attach = node_at_offset(t, 0, t.sample_node[witness], best);
    }
    Rat leg = om.d[0][i] - (i == 1 ? Rat(0) : t.node_distance(0, attach));
    if (leg == Rat(0)) {
      t.nodes[attach].samples.push_back(i);
      t.sample_node[i] = attach;
    } else {
      int fresh = static_cast<int>(t.nodes.size());
      t.nodes.push_back({{i}});
      t.edges.push_back({attach, fresh, leg});
      t.sample_node[i] = fresh;
    }
  }
  // post-verification: the tree must reproduce the matrix exactly
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (t.sample_distance(i, j) != om.d[i][j])
        throw MetricViolation("realization mismatch at (" + std::to_string(i) +
                                  ", " + std::to_string(j) +
                                  "): matrix is not additive",
                              {i, j});
  std::vector<int> degree(t.nodes.size(), 0);
  for (const auto& e : t.edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  for (size_t v = 0; v < t.nodes.size(); ++v)
    if (t.nodes[v].samples.empty() && degree[v] < 3)
      throw DomainError("internal error: low-degree Steiner node");
  return t;
}

RefinementReport verify_refinement(const LengthOracle& l, const LengthOracle& m,
                                   const SimultaneousGoodPair& gp,
                                   const std::vector<Word>& sample,
                                   const FiniteTree& built) {
  RefinementReport rep;
  auto note = [&](const std::string& s) {
    rep.ok = false;
    rep.violations.push_back(s);
  };
  int n = static_cast<int>(sample.size());
  std::vector<std::vector<Rat>> da(n, std::vector<Rat>(n, Rat(0)));
  std::vector<std::vector<Rat>> db = da, dt = da;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Word rel = concat(sample[j], invert(sample[i]));
      da[i][j] = based_length_dagger(l, gp.for_l, rel);
      db[i][j] = based_length_dagger(m, gp.for_m, rel);
      dt[i][j] = built.sample_distance(i, j);
    }
  for (int i = 0; i < n && rep.violations.size() < 20; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dt[i][j] != da[i][j] + db[i][j])
        note("l1 identity fails at (" + std::to_string(i) + ", " +
             std::to_string(j) + "): " + rat_str(dt[i][j]) +
             " != " + rat_str(da[i][j]) + " + " + rat_str(db[i][j]));
  for (int i = 0; i < n && rep.violations.size() < 20; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        if (dt[i][k] + dt[k][j] != dt[i][j]) continue;  // k not between
        if (da[i][k] + da[k][j] != da[i][j] ||
            db[i][k] + db[k][j] != db[i][j])
          note("alignment fails at (" + std::to_string(i) + ", " +
               std::to_string(k) + ", " + std::to_string(j) + ")");
      }
  for (const auto& e : built.edges)
    if (!(e.length > Rat(0)))
      note("collapsed edge between nodes " + std::to_string(e.a) + " and " +
           std::to_string(e.b));
  return rep;
}

DisplacementReport displacement_check(const LengthOracle& lm,
                                      const BasedOracle& p,
                                      const std::vector<Word>& sample) {
  DisplacementReport rep;
  for (const auto& g : sample) {
    Rat disp = p(g);
    Rat len = lm(g);
    if (disp < len) {
      rep.ok = false;
      rep.violations.push_back("displacement " + rat_str(disp) +
                               " below translation length " + rat_str(len));
      continue;
    }
    if (disp == len) rep.on_axis.push_back(g);
  }
  return rep;
}

std::string tree_to_json(const FiniteTree& t) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& node : t.nodes) j["nodes"].push_back({{"samples", node.samples}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : t.edges)
    j["edges"].push_back(
        {{"a", e.a}, {"b", e.b}, {"length", rat_str(e.length)}});
  j["sample_node"] = t.sample_node;
  return j.dump(2);
}

FiniteTree tree_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FiniteTree t;
  for (const auto& n : j.at("nodes"))
    t.nodes.push_back({n.at("samples").get<std::vector<int>>()});
  for (const auto& e : j.at("edges"))
    t.edges.push_back({e.at("a").get<int>(), e.at("b").get<int>(),
                       parse_rat(e.at("length").get<std::string>())});
  t.sample_node = j.at("sample_node").get<std::vector<int>>();
  return t;
}

namespace {

std::string node_label(const FiniteTree& t, int v) {
  if (t.nodes[v].samples.empty()) return "s" + std::to_string(v);
  std::string s;
  for (int i : t.nodes[v].samples) s += (s.empty() ? "p" : "+p") + std::to_string(i);
  return s;
}

void newick_rec(const FiniteTree& t,
                const std::vector<std::vector<std::pair<int, Rat>>>& adj,
                int v, int parent, std::ostringstream& out) {
  std::vector<std::pair<int, Rat>> kids;
  for (auto& [w, len] : adj[v])
    if (w != parent) kids.push_back({w, len});
  if (!kids.empty()) {
    out << "(";
    for (size_t i = 0; i < kids.size(); ++i) {
      if (i) out << ",";
      newick_rec(t, adj, kids[i].first, v, out);
      out << ":" << to_string(kids[i].second);
    }
    out << ")";
  }
  out << node_label(t, v);
}

// Canonical string of the subtree below v, for sample-labeled isometry.
std::string canon_rec(const FiniteTree& t,
                      const std::vector<std::vector<std::pair<int, Rat>>>& adj,
                      int v, int parent) {
  std::vector<std::string> parts;
  for (auto& [w, len] : adj[v])
    if (w != parent)
      parts.push_back(to_string(len) + "[" + canon_rec(t, adj, w, v) + "]");
  std::sort(parts.begin(), parts.end());
  auto samples = t.nodes[v].samples;
  std::sort(samples.begin(), samples.end());
  std::string s = "{";
  for (int i : samples) s += std::to_string(i) + ",";
  s += "}";
  for (const auto& p : parts) s += p;
  return s;
}

std::vector<std::vector<std::pair<int, Rat>>> adjacency(const FiniteTree& t) {
  std::vector<std::vector<std::pair<int, Rat>>> adj(t.nodes.size());
  for (const auto& e : t.edges) {
    adj[e.a].push_back({e.b, e.length});
    adj[e.b].push_back({e.a, e.length});
  }
  return adj;
}

}  // namespace

std::string tree_to_newick(const FiniteTree& t) {
  std::ostringstream out;
  newick_rec(t, adjacency(t), t.sample_node.empty() ? 0 : t.sample_node[0], -1,
             out);
  out << ";";
  return out.str();
}

bool trees_isomorphic(const FiniteTree& a, const FiniteTree& b) {
  if (a.sample_node.size() != b.sample_node.size()) return false;
  if (a.sample_node.empty()) return true;
  return canon_rec(a, adjacency(a), a.sample_node[0], -1) ==
         canon_rec(b, adjacency(b), b.sample_node[0], -1);
}

}  // namespace treelen
