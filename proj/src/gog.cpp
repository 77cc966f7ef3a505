#include "treelen/gog.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace treelen {

SpecReport validate_spec(const Alphabet& alphabet,
                         const std::vector<GraphOfGroupsSpec::Vertex>& vertices,
                         const std::vector<GraphOfGroupsSpec::Edge>& edges) {
  SpecReport rep{true, {}};
  auto bad = [&](const std::string& msg) {
    rep.valid = false;
    rep.problems.push_back(msg);
  };
  int nv = static_cast<int>(vertices.size());
  if (nv == 0) {
    bad("no vertices");
    return rep;
  }
  for (const auto& v : vertices)
    for (int l : v.letters)
      if (l < 0 || l >= alphabet.rank())
        bad("vertex " + v.name + " carries an unknown letter");
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= nv || e.to < 0 || e.to >= nv) {
      bad("edge endpoint out of range");
      continue;
    }
    if (e.length <= Rat(0)) bad("edge length must be positive");
    for (int side : {e.from, e.to}) {
      const auto& ls = vertices[side].letters;
      if (std::find(ls.begin(), ls.end(), e.letter) == ls.end())
        bad("edge letter " + alphabet.name(e.letter) +
            " missing from vertex group of " + vertices[side].name);
    }
  }
  if (!rep.valid) return rep;
  // Underlying graph must be a tree.
  if (static_cast<int>(edges.size()) != nv - 1) bad("underlying graph is not a tree");
  std::vector<bool> seen(nv, false);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = true;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop();
    for (const auto& e : edges)
      for (int w : {e.from == v ? e.to : -1, e.to == v ? e.from : -1})
        if (w >= 0 && !seen[w]) {
          seen[w] = true;
          bfs.push(w);
        }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    bad("underlying graph is not connected");
  // Letter coverage: the amalgam must present the free group on the alphabet.
  for (int l = 0; l < alphabet.rank(); ++l) {
    std::vector<int> carriers;
    for (int v = 0; v < nv; ++v)
      if (std::find(vertices[v].letters.begin(), vertices[v].letters.end(),
                    l) != vertices[v].letters.end())
        carriers.push_back(v);
    if (carriers.empty()) {
      bad("letter " + alphabet.name(l) + " is in no vertex group");
      continue;
    }
    bool is_edge_letter = std::any_of(
        edges.begin(), edges.end(),
        [&](const GraphOfGroupsSpec::Edge& e) { return e.letter == l; });
    if (!is_edge_letter) {
      if (carriers.size() > 1)
        bad("non-edge letter " + alphabet.name(l) +
            " appears in more than one vertex group");
      continue;
    }
    // Carriers of an edge letter must be connected by edges with that letter,
    // otherwise the amalgam keeps several independent copies of it.
    std::vector<bool> cseen(nv, false);
    std::queue<int> q;
    q.push(carriers[0]);
    cseen[carriers[0]] = true;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& e : edges) {
        if (e.letter != l) continue;
        for (int w : {e.from == v ? e.to : -1, e.to == v ? e.from : -1})
          if (w >= 0 && !cseen[w]) {
            cseen[w] = true;
            q.push(w);
          }
      }
    }
    for (int v : carriers)
      if (!cseen[v])
        bad("letter " + alphabet.name(l) +
            " appears in vertex groups not joined by its edges");
  }
  return rep;
}

GraphOfGroupsSpec::GraphOfGroupsSpec(Alphabet alphabet,
                                     std::vector<Vertex> vertices,
                                     std::vector<Edge> edges)
    : alphabet_(std::move(alphabet)),
      vertices_(std::move(vertices)),
      edges_(std::move(edges)) {
  SpecReport rep = validate_spec(alphabet_, vertices_, edges_);
  if (!rep.valid) throw InputError("invalid spec: " + rep.problems.front());
  for (auto& v : vertices_) std::sort(v.letters.begin(), v.letters.end());
  // All-pairs tree distances.
  int nv = vertex_count();
  dist_.assign(nv, std::vector<Rat>(nv, Rat(0)));
  for (int s = 0; s < nv; ++s) {
    std::vector<bool> seen(nv, false);
    seen[s] = true;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const auto& e : edges_)
        for (int w : {e.from == v ? e.to : -1, e.to == v ? e.from : -1})
          if (w >= 0 && !seen[w]) {
            seen[w] = true;
            dist_[s][w] = dist_[s][v] + e.length;
            q.push(w);
          }
    }
  }
}

int GraphOfGroupsSpec::vertex_index(const std::string& name) const {
  for (int v = 0; v < vertex_count(); ++v)
    if (vertices_[v].name == name) return v;
  return -1;
}

bool GraphOfGroupsSpec::vertex_has_letter(int v, int letter) const {
  const auto& ls = vertices_.at(v).letters;
  return std::binary_search(ls.begin(), ls.end(), letter);
}

SyllableForm normalize(const GraphOfGroupsSpec& spec, const Word& w) {
  for (Lit l : w.lits())
    if (lit_index(l) >= spec.alphabet().rank())
      throw InputError("word letter outside the ambient alphabet");
  CyclicWord cyc = cyclic_reduce(w).cyclic;
  SyllableForm form;
  for (Lit l : cyc.lits()) {
    Syllable s;
    s.word = Word({l});
    for (int v = 0; v < spec.vertex_count(); ++v)
      if (spec.vertex_has_letter(v, lit_index(l))) s.support.push_back(v);
    if (s.support.empty())
      throw InputError("letter " + spec.alphabet().name(lit_index(l)) +
                       " is in no vertex group");
    form.syllables.push_back(std::move(s));
  }
  // Cyclically merge adjacent syllables with a common supporting vertex,
  // scanning left to right (canonical), until stable.
  auto& syl = form.syllables;
  bool changed = true;
  while (changed && syl.size() > 1) {
    changed = false;
    for (size_t i = 0; i < syl.size() && syl.size() > 1; ++i) {
      size_t j = (i + 1) % syl.size();
      std::vector<int> common;
      std::set_intersection(syl[i].support.begin(), syl[i].support.end(),
                            syl[j].support.begin(), syl[j].support.end(),
                            std::back_inserter(common));
      if (common.empty()) continue;
      syl[i].support = std::move(common);
      syl[i].word = concat(syl[i].word, syl[j].word);
      syl.erase(syl.begin() + j);
      changed = true;
      if (j == 0) {
        // The wrap merge rotated the cyclic sequence; the merged syllable is
        // now last, which is fine for a cyclic form, but restart the scan.
        break;
      }
      --i;
    }
  }
  return form;
}

Rat translation_length_gog(const GraphOfGroupsSpec& spec, const Word& w) {
  SyllableForm form = normalize(spec, w);
  if (form.elliptic()) return Rat(0);
  const auto& syl = form.syllables;
  size_t n = syl.size();
  // Each syllable fixes the subtree spanned by its support; minimize the
  // cyclic tour over the choice of representative vertices. Supports are
  // almost always singletons; the first one is fixed and the rest follow by
  // dynamic programming along the cycle.
  Rat best;
  bool have_best = false;
  for (int start : syl[0].support) {
    std::vector<std::pair<Rat, int>> cur;  // (cost so far, vertex)
    cur.push_back({Rat(0), start});
    for (size_t i = 1; i < n; ++i) {
      std::vector<std::pair<Rat, int>> next;
      for (int v : syl[i].support) {
        Rat c;
        bool have = false;
        for (const auto& [cost, u] : cur) {
          Rat cand = cost + spec.tree_distance(u, v);
          if (!have || cand < c) {
            c = cand;
            have = true;
          }
        }
        next.push_back({c, v});
      }
      cur = std::move(next);
    }
    for (const auto& [cost, u] : cur) {
      Rat total = cost + spec.tree_distance(u, start);
      if (!have_best || total < best) {
        best = total;
        have_best = true;
      }
    }
  }
  return best;
}

namespace {

Rat parse_len(const nlohmann::json& j) {
  return j.is_string() ? parse_rat(j.get<std::string>())
                       : Rat(j.get<long long>());
}

}  // namespace

GraphOfGroupsSpec GraphOfGroupsSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("bad JSON: ") + e.what());
  }
  std::vector<std::string> names;
  for (const auto& a : j.at("alphabet")) names.push_back(a.get<std::string>());
  Alphabet alphabet(names);
  std::vector<Vertex> vertices;
  for (const auto& v : j.at("vertices")) {
    Vertex vx;
    vx.name = v.at("name").get<std::string>();
    for (const auto& l : v.at("letters")) {
      int idx = alphabet.index_of(l.get<std::string>());
      if (idx < 0) throw InputError("unknown letter: " + l.get<std::string>());
      vx.letters.push_back(idx);
    }
    vertices.push_back(std::move(vx));
  }
  auto vidx = [&](const std::string& n) {
    for (int v = 0; v < static_cast<int>(vertices.size()); ++v)
      if (vertices[v].name == n) return v;
    throw InputError("unknown vertex: " + n);
  };
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    int letter = alphabet.index_of(e.at("letter").get<std::string>());
    if (letter < 0)
      throw InputError("unknown edge letter: " +
                       e.at("letter").get<std::string>());
    edges.push_back({vidx(e.at("from").get<std::string>()),
                     vidx(e.at("to").get<std::string>()), letter,
                     parse_len(e.at("length"))});
  }
  return GraphOfGroupsSpec(std::move(alphabet), std::move(vertices),
                           std::move(edges));
}

GraphOfGroupsSpec GraphOfGroupsSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace treelen
