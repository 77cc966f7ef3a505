#pragma once

// Calculus of axiomatic length functions: axiom checking, pair
// classification (overlap/disjoint), compatibility of two length functions
// on enumerated pair sets, good-pair machinery, and based length functions
// recovered from translation lengths alone.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treelen/rational.hpp"
#include "treelen/words.hpp"

namespace treelen {

class MarkedMetricGraph;
class GraphOfGroupsSpec;

// A memoized nonnegative conjugacy-invariant evaluator. Copies share the
// memo table. The memo is keyed by the reduced word, not its conjugacy
// class, so invariance axioms are genuinely exercised.
class LengthOracle {
 public:
  using Fn = std::function<Rat(const Word&)>;

  LengthOracle(Alphabet alphabet, std::string provenance, Fn eval);

  Rat operator()(const Word& w) const;
  const Alphabet& alphabet() const { return alphabet_; }
  const std::string& provenance() const { return provenance_; }

  static LengthOracle from_mgraph(std::shared_ptr<const MarkedMetricGraph> m);
  static LengthOracle from_gog(std::shared_ptr<const GraphOfGroupsSpec> s);
  static LengthOracle zero(Alphabet alphabet);

 private:
  Alphabet alphabet_;
  std::string provenance_;
  Fn eval_;
  std::shared_ptr<std::map<std::vector<Lit>, Rat>> memo_;
};

// Pointwise sum; meaningful as a length function only for compatible inputs.
LengthOracle sum_oracle(const LengthOracle& l, const LengthOracle& m);
// Projective rescaling by a positive rational.
LengthOracle scaled_oracle(const LengthOracle& l, const Rat& c);

enum class PairKind { Overlap, Disjoint, Neither };

struct PairClass {
  PairKind kind;
  Rat lg, lh, lgh, lghi;  // l(g), l(h), l(gh), l(gh^-1)
};

// Throws DomainError on g == h (pairs live off the diagonal) and when the
// oracle violates the elliptic-pair constraint (an overlap pair must consist
// of hyperbolic elements).
PairClass classify_pair(const LengthOracle& l, const Word& g, const Word& h);

// Half the length excess of the product: d(C_g, C_h) when the
// characteristic sets are disjoint, zero otherwise.
Rat char_distance(const LengthOracle& l, const Word& g, const Word& h);

enum class Orientation { Agree, Oppose, NotOverlap };

struct OrientationResult {
  Orientation kind;
  Rat overlap_length;  // meaningful when kind != NotOverlap
};

OrientationResult overlap_orientation(const LengthOracle& l, const Word& g,
                                      const Word& h);

struct AxiomReport {
  std::array<bool, 6> ok;  // axioms I..VI
  bool nonnegative = true;
  std::vector<std::string> violations;
  std::optional<std::pair<Word, Word>> vi_witness;

  bool all_passed() const {
    bool a = nonnegative;
    for (bool b : ok) a = a && b;
    return a;
  }
};

AxiomReport check_axioms(const LengthOracle& l, const std::vector<Word>& s);

enum class CompatKind {
  CompatibleUpToBound,
  IncompatibleCombinatorics,
  IncoherentOrientation
};

struct CompatVerdict {
  CompatKind kind;
  std::optional<std::pair<Word, Word>> witness;
};

CompatVerdict compatible_on(const LengthOracle& l, const LengthOracle& m,
                            const std::vector<std::pair<Word, Word>>& pairs);
// Ordered pairs of distinct elements drawn from a set.
CompatVerdict compatible_on(const LengthOracle& l, const LengthOracle& m,
                            const std::vector<Word>& elements);

struct GoodPairCertificate {
  Word g, h;
  Rat lg, lh, lgh, lghi;
  Rat slack_lower;  // l(g)+l(h)-l(gh^-1), must be > 0
  Rat slack_upper;  // 2 min{l(g),l(h)} - slack_lower, must be > 0
  std::string provenance;
  std::string assumption;  // unverifiable hypotheses recorded verbatim
};

// Throws DomainError unless (g,h) satisfies the strict two-sided inequality.
GoodPairCertificate make_good_pair(const LengthOracle& l, const Word& g,
                                   const Word& h,
                                   const std::string& assumption = "");
bool is_good_pair(const LengthOracle& l, const Word& g, const Word& h);

struct PowerPair {
  bool ok;
  long long a, b;
  std::string failure;
};

// Exponents making (g^a, h^b) a good pair, starting from the overlap-length
// bound and escalating; requires an Agree-oriented overlap pair.
PowerPair power_good_pair(const LengthOracle& l, const Word& g, const Word& h);

// The pair (gh, gh^-1), escalated through powers if needed. Requires
// 0 < l(h) < l(g); the geometric independence hypothesis is recorded, not
// checked.
GoodPairCertificate good_pair_from_independent(const LengthOracle& l,
                                               const Word& g, const Word& h);

struct SimultaneousGoodPair {
  Word g, h;
  GoodPairCertificate for_l, for_m, for_sum;
};

// First pair (shortlex, nontrivial words of length <= bound) that is good
// for l, m, and l+m at once. Empty result is a statement about the bound.
std::optional<SimultaneousGoodPair> simultaneous_good_pair(
    const LengthOracle& l, const LengthOracle& m, int bound);

// Based length function at the canonical basepoint of a good pair,
// recovered from translation lengths: max over x, x' in {g, h, gh^-1} of
// char_distance(l, x, k^-1 x' k).
Rat based_length_dagger(const LengthOracle& l, const GoodPairCertificate& gp,
                        const Word& k);

struct BasedSumReport {
  bool ok;
  std::vector<std::string> violations;
};

BasedSumReport based_sum_identity(const LengthOracle& l, const LengthOracle& m,
                                  const SimultaneousGoodPair& gp,
                                  const std::vector<Word>& s);

// JSON certificate round trips (validated on read against a fresh oracle by
// the callers).
std::string good_pair_to_json(const Alphabet& a, const GoodPairCertificate& c);
GoodPairCertificate good_pair_from_json(const Alphabet& a,
                                        const std::string& text);
std::string compat_witness_to_json(const Alphabet& a, const CompatVerdict& v);
CompatVerdict compat_witness_from_json(const Alphabet& a,
                                       const std::string& text);

}  // namespace treelen
