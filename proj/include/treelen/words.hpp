#pragma once

// Free group word algebra over a ranked alphabet, plus Stallings subgroup
// automata. Words are kept freely reduced at all times; every constructor
// reduces its input. All values are immutable after construction and all
// operations are pure.

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace treelen {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A signed letter: letter index i (0-based) is encoded as +(i+1), its formal
// inverse as -(i+1).
using Lit = int;

inline Lit lit_inverse(Lit l) { return -l; }
inline int lit_index(Lit l) { return (l > 0 ? l : -l) - 1; }

// Canonical order for enumeration and printing: declaration order, with each
// inverse immediately after its positive letter (a < a' < b < b' < ...).
inline int lit_rank(Lit l) { return 2 * lit_index(l) + (l < 0 ? 1 : 0); }

class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  int rank() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }

  // Index of a letter name, or -1.
  int index_of(const std::string& name) const;

  bool operator==(const Alphabet& o) const { return names_ == o.names_; }
  bool operator!=(const Alphabet& o) const { return !(*this == o); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

class Word {
 public:
  Word() = default;
  // Reduces on construction.
  explicit Word(std::vector<Lit> raw);

  bool empty() const { return lits_.empty(); }
  int size() const { return static_cast<int>(lits_.size()); }
  const std::vector<Lit>& lits() const { return lits_; }
  Lit at(int i) const { return lits_.at(i); }

  bool operator==(const Word& o) const { return lits_ == o.lits_; }
  bool operator!=(const Word& o) const { return !(*this == o); }
  // Shortlex over lit_rank.
  bool operator<(const Word& o) const;

 private:
  std::vector<Lit> lits_;
};

// Cyclically reduced word stored as the lexicographically least rotation, a
// stable key for conjugacy classes.
class CyclicWord {
 public:
  CyclicWord() = default;
  // Input must already be cyclically reduced; canonicalizes the rotation.
  explicit CyclicWord(std::vector<Lit> cyclically_reduced);

  bool empty() const { return lits_.empty(); }
  int size() const { return static_cast<int>(lits_.size()); }
  const std::vector<Lit>& lits() const { return lits_; }
  Word word() const { return Word(lits_); }

  bool operator==(const CyclicWord& o) const { return lits_ == o.lits_; }
  bool operator!=(const CyclicWord& o) const { return !(*this == o); }
  bool operator<(const CyclicWord& o) const;

 private:
  std::vector<Lit> lits_;
};

Word reduce(const std::vector<Lit>& raw);

// w = conjugator * cyclic * conjugator^-1 after reduction.
struct CyclicReduction {
  CyclicWord cyclic;
  Word conjugator;
};
CyclicReduction cyclic_reduce(const Word& w);

Word concat(const Word& u, const Word& v);
Word invert(const Word& w);
// u w u^-1.
Word conjugate(const Word& w, const Word& u);
Word power(const Word& w, int n);

// All reduced words of length <= max_len in shortlex order.
std::vector<Word> enumerate_words(const Alphabet& alphabet, int max_len);
// One representative per rotation class of cyclically reduced words of length
// <= max_len, in shortlex order of the canonical representative.
std::vector<CyclicWord> enumerate_cyclic_words(const Alphabet& alphabet,
                                               int max_len);
// Streaming form of enumerate_cyclic_words; emit returns false to stop early.
void for_each_cyclic_word(const Alphabet& alphabet, int max_len,
                          const std::function<bool(const CyclicWord&)>& emit);

// Text syntax: letters by name, inverse as trailing apostrophe or ^-1,
// juxtaposition (whitespace optional between multi-char names) as product.
// "1" denotes the identity.
Word parse_word(const Alphabet& alphabet, const std::string& text);
std::string format_word(const Alphabet& alphabet, const Word& w);
std::string format_word(const Alphabet& alphabet, const CyclicWord& w);

// Folded Stallings graph of a finitely generated subgroup of the free group
// on `alphabet`. Transitions are deterministic and involutive.
class SubgroupAutomaton {
 public:
  SubgroupAutomaton(const Alphabet& alphabet,
                    const std::vector<Word>& generators);

  bool member(const Word& w) const;

  int state_count() const { return static_cast<int>(states_.size()); }
  int rank() const;  // first Betti number of the folded core graph

  // True iff the subgroup is the whole free group: the folded core graph is
  // the rose on the full alphabet.
  bool is_full_group() const;

 private:
  int step(int state, Lit l) const;

  Alphabet alphabet_;
  // states_[s][2i] = target on letter i, [2i+1] = target on letter i inverse,
  // -1 if absent.
  std::vector<std::vector<int>> states_;
};

}  // namespace treelen
