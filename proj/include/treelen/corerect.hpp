#pragma once

// Geometric compatibility certificates for marked-graph trees: rectangle
// detection through asymptotic horizons, constructive axis witnesses, and
// conversion between geometric and length-function incompatibility proofs.

#include <optional>
#include <string>
#include <utility>

#include "treelen/lfcore.hpp"
#include "treelen/mgraph.hpp"

namespace treelen {

struct SearchBudget {
  int word_length;    // max reduced length of witness words
  int anchor_length;  // max word length for translating edge lifts
};

// A rectangle witness: an oriented edge lift in each tree plus one witness
// word per horizon-intersection corner. Corner order: (a,b), (abar,b),
// (a,bbar), (abar,bbar).
struct RectangleCertificate {
  EdgeLift a, b;
  Word w_pp, w_np, w_pn, w_nn;
};

// The same lift traversed backwards.
EdgeLift reverse_lift(const MarkedMetricGraph& m, const EdgeLift& e);
// The terminal vertex of a lift.
TreePoint lift_terminus(const MarkedMetricGraph& m, const EdgeLift& e);

// Re-checks all eight horizon memberships (and spot-checks interior subarcs,
// which must agree with the whole-edge verdicts for simplicial trees).
bool verify_rectangle(const MarkedMetricGraph& a, const MarkedMetricGraph& b,
                      const RectangleCertificate& rect);

// Bounded search for a rectangle. One canonical lift per oriented a-edge
// (equivariance), b-lifts translated over the anchor ball, witnesses in
// shortlex order. A certificate proves incompatibility; absence proves
// nothing beyond the budget.
std::optional<RectangleCertificate> rectangle_search(
    const MarkedMetricGraph& a, const MarkedMetricGraph& b,
    const SearchBudget& budget);

struct AxisWitness {
  long long n;
  Word f;
};

// For g seen forward and h seen backward through e: f = g^n h^-n whose axis
// contains e with agreeing orientation. The exponent starts at the
// case-dependent bound and escalates until geometric post-verification
// passes.
AxisWitness arc_axis_witness(const MarkedMetricGraph& m, const EdgeLift& e,
                             const Word& g, const Word& h);

// For g, h both seen forward through e with distinct attracting ends:
// f = g^n h^-n whose axis avoids the interior of e on the terminal side.
AxisWitness pos_axis_witness(const MarkedMetricGraph& m, const EdgeLift& e,
                             const Word& g, const Word& h);

// From a verified rectangle, a pure length-function witness (rho, sigma)
// with disjoint axes in a and overlapping axes in b -- re-checkable by
// classify_pair alone.
std::pair<Word, Word> certificate_from_rectangle(const MarkedMetricGraph& a,
                                                 const MarkedMetricGraph& b,
                                                 const RectangleCertificate& r);

// The symmetric construction: a pair (c, gamma) overlapping in both trees
// with opposite orientations (incoherent-orientation witness).
std::pair<Word, Word> orientation_clash_from_rectangle(
    const MarkedMetricGraph& a, const MarkedMetricGraph& b,
    const RectangleCertificate& r);

// From a pair with disjoint a-axes and overlapping b-axes, a rectangle built
// from the bridge in a and the overlap arc in b, witnessed by g, h and their
// inverses.
RectangleCertificate rectangle_from_pair(const MarkedMetricGraph& a,
                                         const MarkedMetricGraph& b,
                                         const Word& g, const Word& h);

// Bounded emptiness scan for the twice-light corners of a rectangle; finding
// witnesses in both mixed corners refutes twice-lightness, otherwise the
// scan is inconclusive.
enum class TwiceLightVerdict { No, Unknown };
TwiceLightVerdict twice_light_check(const MarkedMetricGraph& a,
                                    const MarkedMetricGraph& b,
                                    const RectangleCertificate& r,
                                    int word_length);

std::string rectangle_to_json(const MarkedMetricGraph& a,
                              const MarkedMetricGraph& b,
                              const RectangleCertificate& r);
RectangleCertificate rectangle_from_json(const MarkedMetricGraph& a,
                                         const MarkedMetricGraph& b,
                                         const std::string& text);

}  // namespace treelen
