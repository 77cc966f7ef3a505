#include "treelen/words.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>

namespace treelen {

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw InputError("alphabet must have rank >= 1");
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    const auto& n = names_[i];
    if (n.empty()) throw InputError("empty letter name");
    if (!index_.emplace(n, i).second)
      throw InputError("duplicate letter name: " + n);
  }
}

int Alphabet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

namespace {

std::vector<Lit> reduce_lits(const std::vector<Lit>& raw) {
  std::vector<Lit> out;
  out.reserve(raw.size());
  for (Lit l : raw) {
    if (l == 0) throw InputError("zero letter code");
    if (!out.empty() && out.back() == -l)
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

bool shortlex_less(const std::vector<Lit>& a, const std::vector<Lit>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (size_t i = 0; i < a.size(); ++i) {
    int ra = lit_rank(a[i]), rb = lit_rank(b[i]);
    if (ra != rb) return ra < rb;
  }
  return false;
}

std::vector<Lit> least_rotation(std::vector<Lit> v) {
  if (v.size() < 2) return v;
  std::vector<Lit> best = v;
  for (size_t k = 1; k < v.size(); ++k) {
    std::rotate(v.begin(), v.begin() + 1, v.end());
    if (shortlex_less(v, best)) best = v;
  }
  return best;
}

}  // namespace

Word::Word(std::vector<Lit> raw) : lits_(reduce_lits(raw)) {}

bool Word::operator<(const Word& o) const {
  return shortlex_less(lits_, o.lits_);
}

CyclicWord::CyclicWord(std::vector<Lit> lits) {
  const size_t n = lits.size();
  if (n >= 2)
    for (size_t i = 0; i < n; ++i)
      if (lits[i] == -lits[(i + 1) % n])
        throw InputError("input is not cyclically reduced");
  lits_ = least_rotation(std::move(lits));
}

bool CyclicWord::operator<(const CyclicWord& o) const {
  return shortlex_less(lits_, o.lits_);
}

Word reduce(const std::vector<Lit>& raw) { return Word(raw); }

CyclicReduction cyclic_reduce(const Word& w) {
  std::vector<Lit> lits = w.lits();
  std::vector<Lit> conj;
  while (lits.size() >= 2 && lits.front() == -lits.back()) {
    conj.push_back(lits.front());
    lits.erase(lits.begin());
    lits.pop_back();
  }
  return {CyclicWord(lits), Word(conj)};
}

Word concat(const Word& u, const Word& v) {
  std::vector<Lit> lits = u.lits();
  lits.insert(lits.end(), v.lits().begin(), v.lits().end());
  return Word(lits);
}

Word invert(const Word& w) {
  std::vector<Lit> lits(w.lits().rbegin(), w.lits().rend());
  for (Lit& l : lits) l = -l;
  return Word(lits);
}

Word conjugate(const Word& w, const Word& u) {
  return concat(concat(u, w), invert(u));
}

Word power(const Word& w, int n) {
  Word base = n < 0 ? invert(w) : w;
  int k = n < 0 ? -n : n;
  Word out;
  for (int i = 0; i < k; ++i) out = concat(out, base);
  return out;
}

namespace {

std::vector<Lit> ordered_lits(const Alphabet& a) {
  std::vector<Lit> lits;
  for (int i = 0; i < a.rank(); ++i) {
    lits.push_back(i + 1);
    lits.push_back(-(i + 1));
  }
  return lits;
}

void enumerate_reduced(const std::vector<Lit>& lits, int max_len,
                       std::vector<Lit>& cur, bool& stop,
                       const std::function<bool(const std::vector<Lit>&)>& f) {
  if (stop) return;
  if (!f(cur)) {
    stop = true;
    return;
  }
  if (static_cast<int>(cur.size()) == max_len) return;
  for (Lit l : lits) {
    if (!cur.empty() && cur.back() == -l) continue;
    cur.push_back(l);
    enumerate_reduced(lits, max_len, cur, stop, f);
    cur.pop_back();
    if (stop) return;
  }
}

}  // namespace

std::vector<Word> enumerate_words(const Alphabet& alphabet, int max_len) {
  if (max_len < 0) throw InputError("max_len must be >= 0");
  std::vector<Word> out;
  std::vector<Lit> cur;
  bool stop = false;
  enumerate_reduced(ordered_lits(alphabet), max_len, cur, stop,
                    [&](const std::vector<Lit>& v) {
                      out.push_back(Word(v));
                      return true;
                    });
  return out;
}

void for_each_cyclic_word(const Alphabet& alphabet, int max_len,
                          const std::function<bool(const CyclicWord&)>& emit) {
  if (max_len < 0) throw InputError("max_len must be >= 0");
  std::vector<Lit> cur;
  bool stop = false;
  enumerate_reduced(ordered_lits(alphabet), max_len, cur, stop,
                    [&](const std::vector<Lit>& v) {
                      // One representative per rotation class: keep only the
                      // cyclically reduced least rotation.
                      if (v.size() >= 2 && v.front() == -v.back()) return true;
                      if (least_rotation(v) != v) return true;
                      return emit(CyclicWord(v));
                    });
}

std::vector<CyclicWord> enumerate_cyclic_words(const Alphabet& alphabet,
                                               int max_len) {
  std::vector<CyclicWord> out;
  for_each_cyclic_word(alphabet, max_len, [&](const CyclicWord& c) {
    out.push_back(c);
    return true;
  });
  return out;
}

Word parse_word(const Alphabet& alphabet, const std::string& text) {
  std::vector<Lit> lits;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
  };
  while (true) {
    skip_ws();
    if (i >= text.size()) break;
    if (text[i] == '1') {
      ++i;
      continue;  // identity factor
    }
    // Longest name match at position i.
    int best = -1;
    size_t best_len = 0;
    for (int k = 0; k < alphabet.rank(); ++k) {
      const std::string& n = alphabet.name(k);
      if (n.size() > best_len && text.compare(i, n.size(), n) == 0) {
        best = k;
        best_len = n.size();
      }
    }
    if (best < 0)
      throw InputError("unknown letter at position " + std::to_string(i) +
                       " in '" + text + "'");
    i += best_len;
    bool inv = false;
    int rep = 1;
    if (i < text.size() && text[i] == '\'') {
      inv = true;
      ++i;
    } else if (i < text.size() && text[i] == '^') {
      ++i;
      if (i < text.size() && text[i] == '-') {
        inv = true;
        ++i;
      }
      size_t start = i;
      while (i < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i])))
        ++i;
      if (start == i) throw InputError("malformed exponent in '" + text + "'");
      rep = std::stoi(text.substr(start, i - start));
    }
    Lit l = inv ? -(best + 1) : (best + 1);
    for (int r = 0; r < rep; ++r) lits.push_back(l);
  }
  return Word(lits);
}

namespace {
std::string format_lits(const Alphabet& alphabet,
                        const std::vector<Lit>& lits) {
  if (lits.empty()) return "1";
  std::string out;
  for (Lit l : lits) {
    if (!out.empty()) out += ' ';
    if (lit_index(l) >= alphabet.rank())
      throw InputError("word letter outside alphabet");
    out += alphabet.name(lit_index(l));
    if (l < 0) out += '\'';
  }
  return out;
}
}  // namespace

std::string format_word(const Alphabet& alphabet, const Word& w) {
  return format_lits(alphabet, w.lits());
}
std::string format_word(const Alphabet& alphabet, const CyclicWord& w) {
  return format_lits(alphabet, w.lits());
}

SubgroupAutomaton::SubgroupAutomaton(const Alphabet& alphabet,
                                     const std::vector<Word>& generators)
    : alphabet_(alphabet) {
  // Wedge of generator loops at a single base vertex, then Stallings fold.
  struct Edge {
    int from, to;
    int letter;  // positive letter index; traversal from->to reads +letter
  };
  std::vector<Edge> edges;
  int nverts = 1;
  for (const Word& g : generators) {
    const auto& lits = g.lits();
    if (lits.empty()) continue;
    int cur = 0;
    for (size_t i = 0; i < lits.size(); ++i) {
      if (lit_index(lits[i]) >= alphabet.rank())
        throw InputError("generator letter outside alphabet");
      int next = (i + 1 == lits.size()) ? 0 : nverts++;
      if (lits[i] > 0)
        edges.push_back({cur, next, lit_index(lits[i])});
      else
        edges.push_back({next, cur, lit_index(lits[i])});
      cur = next;
    }
  }

  std::vector<int> parent(nverts);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  // Fold: merge targets of same-labeled, same-direction edges at a vertex.
  bool changed = true;
  while (changed) {
    changed = false;
    // key: (vertex, letter, direction) -> other endpoint
    std::map<std::tuple<int, int, int>, int> seen;
    for (const Edge& e : edges) {
      int u = find(e.from), v = find(e.to);
      for (auto [base, other, dir] :
           {std::tuple<int, int, int>{u, v, 0}, {v, u, 1}}) {
        auto key = std::make_tuple(base, e.letter, dir);
        auto it = seen.find(key);
        if (it == seen.end()) {
          seen[key] = other;
        } else if (find(it->second) != find(other)) {
          int a = find(it->second), b = find(other);
          parent[std::max(a, b)] = std::min(a, b);
          changed = true;
        }
      }
      if (changed) break;
    }
  }

  // Keep only the core: vertices on reduced paths from/to the base. Trimming
  // repeatedly removes non-base vertices of degree <= 1.
  std::map<int, std::vector<std::pair<int, Lit>>> adj;  // rep -> (rep, lit)
  for (const Edge& e : edges) {
    int u = find(e.from), v = find(e.to);
    // Parallel same-labeled edges are identical after folding.
    adj[u].push_back({v, e.letter + 1});
    adj[v].push_back({u, -(e.letter + 1)});
  }
  auto degree = [&](int v) {
    std::map<std::pair<int, Lit>, bool> uniq;
    for (auto& [t, l] : adj[v]) uniq[{t, l}] = true;
    return uniq.size();
  };
  bool trimmed = true;
  int base = find(0);
  while (trimmed) {
    trimmed = false;
    for (auto& [v, nb] : adj) {
      if (v == base || nb.empty()) continue;
      if (degree(v) <= 1) {
        for (auto& [t, l] : nb) {
          auto& back = adj[t];
          back.erase(std::remove_if(back.begin(), back.end(),
                                    [&](auto& p) { return p.first == v; }),
                     back.end());
        }
        nb.clear();
        trimmed = true;
      }
    }
  }

  // Compact into the deterministic transition table.
  std::map<int, int> id;
  id[base] = 0;
  for (auto& [v, nb] : adj) {
    if (v == base || nb.empty()) continue;
    id[v] = static_cast<int>(id.size());
  }
  states_.assign(id.size(), std::vector<int>(2 * alphabet.rank(), -1));
  for (auto& [v, nb] : adj) {
    if (!id.count(v)) continue;
    for (auto& [t, l] : nb) {
      if (!id.count(t)) continue;
      int slot = 2 * lit_index(l) + (l < 0 ? 1 : 0);
      states_[id[v]][slot] = id[t];
    }
  }
}

int SubgroupAutomaton::step(int state, Lit l) const {
  int slot = 2 * lit_index(l) + (l < 0 ? 1 : 0);
  return states_[state][slot];
}

bool SubgroupAutomaton::member(const Word& w) const {
  int cur = 0;
  for (Lit l : w.lits()) {
    if (lit_index(l) >= alphabet_.rank())
      throw InputError("word letter outside alphabet");
    cur = step(cur, l);
    if (cur == -1) return false;
  }
  return cur == 0;
}

int SubgroupAutomaton::rank() const {
  int v = static_cast<int>(states_.size());
  int e2 = 0;
  for (const auto& row : states_)
    for (int t : row)
      if (t != -1) ++e2;
  return e2 / 2 - v + 1;
}

bool SubgroupAutomaton::is_full_group() const {
  if (states_.size() != 1) return false;
  for (int t : states_[0])
    if (t == -1) return false;
  return true;
}

}  // namespace treelen
