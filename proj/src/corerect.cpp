#include "treelen/corerect.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"

namespace treelen {

namespace {

int vertex_at(const MarkedMetricGraph& m, const TreePoint& p) {
  if (!p.is_vertex()) throw InputError("expected a vertex point");
  return p.path.empty() ? m.base_vertex() : m.graph().dst(p.path.back());
}

void check_lift(const MarkedMetricGraph& m, const EdgeLift& e) {
  if (!e.origin.is_vertex() ||
      vertex_at(m, e.origin) != m.graph().src(e.oedge))
    throw InputError("edge lift origin does not match the edge");
}

// Membership of the attracting end of w on the far side of the subarc
// [p1, p2]; same side test as horizon_member but for arbitrary points.
bool subarc_member(const MarkedMetricGraph& m, const TreePoint& p1,
                   const TreePoint& p2, const Word& w) {
  Rat len = translation_length(m, w);
  if (len.numerator() == 0) return false;
  const MetricGraph& g = m.graph();
  Rat gap = distance(g, p1, p2);
  Rat d0 = (based_length(m, p1, w) - len) / 2;
  long long n = rat_ceil((d0 + gap) / len) + 1;
  auto side = [&](long long k) {
    TreePoint z = act(m, p1, power(w, static_cast<int>(k)));
    return distance(g, z, p1) == gap + distance(g, z, p2);
  };
  bool r = side(n);
  if (side(n + 1) != r) throw DomainError("subarc test did not stabilize");
  return r;
}

}  // namespace

EdgeLift reverse_lift(const MarkedMetricGraph& m, const EdgeLift& e) {
  check_lift(m, e);
  EdgePath path = e.origin.path;
  path.push_back(e.oedge);
  return EdgeLift{make_point(m.graph(), tighten(std::move(path))),
                  opp(e.oedge)};
}

TreePoint lift_terminus(const MarkedMetricGraph& m, const EdgeLift& e) {
  check_lift(m, e);
  EdgePath path = e.origin.path;
  path.push_back(e.oedge);
  return make_point(m.graph(), tighten(std::move(path)));
}

namespace {

// Horizon membership plus an interior-subarc spot check: for simplicial
// trees the horizon of any closed subarc of an open edge agrees with the
// whole-edge horizon (directions are constant on open edges); if the two
// verdicts ever diverge the run fails loudly.
bool member_with_spot_check(const MarkedMetricGraph& m, const EdgeLift& e,
                            const Word& w) {
  bool whole = horizon_member(m, e, w);
  const MetricGraph& g = m.graph();
  Rat len = g.elen(e.oedge);
  TreePoint t = lift_terminus(m, e);
  TreePoint q1 = point_toward(g, e.origin, t, len / 4);
  TreePoint q2 = point_toward(g, e.origin, t, len * 3 / 4);
  if (subarc_member(m, q1, q2, w) != whole)
    throw DomainError("subarc horizon check diverged from the whole edge");
  return whole;
}

struct LiftKey {
  EdgePath path;
  int oedge;
  bool operator<(const LiftKey& o) const {
    return std::tie(path, oedge) < std::tie(o.path, o.oedge);
  }
};

}  // namespace

bool verify_rectangle(const MarkedMetricGraph& a, const MarkedMetricGraph& b,
                      const RectangleCertificate& rect) {
  check_lift(a, rect.a);
  check_lift(b, rect.b);
  EdgeLift ra = reverse_lift(a, rect.a);
  EdgeLift rb = reverse_lift(b, rect.b);
  return member_with_spot_check(a, rect.a, rect.w_pp) &&
         member_with_spot_check(b, rect.b, rect.w_pp) &&
         member_with_spot_check(a, ra, rect.w_np) &&
         member_with_spot_check(b, rect.b, rect.w_np) &&
         member_with_spot_check(a, rect.a, rect.w_pn) &&
         member_with_spot_check(b, rb, rect.w_pn) &&
         member_with_spot_check(a, ra, rect.w_nn) &&
         member_with_spot_check(b, rb, rect.w_nn);
}

namespace {

// Canonical lift of an oriented edge at the identity: anchor along a
// breadth-first path from the base vertex.
EdgeLift canonical_lift(const MarkedMetricGraph& m, int oid) {
  const MetricGraph& g = m.graph();
  int target = g.src(oid);
  std::vector<int> via(g.vertex_count(), -2);
  via[m.base_vertex()] = -1;
  std::vector<int> queue{m.base_vertex()};
  for (size_t head = 0; head < queue.size(); ++head) {
    int v = queue[head];
    if (v == target) break;
    for (int k = 0; k < g.edge_count(); ++k)
      for (int o : {2 * k, 2 * k + 1})
        if (g.src(o) == v && via[g.dst(o)] == -2) {
          via[g.dst(o)] = o;
          queue.push_back(g.dst(o));
        }
  }
  EdgePath path;
  for (int v = target; via[v] != -1; v = g.src(via[v])) path.push_back(via[v]);
  std::reverse(path.begin(), path.end());
  return EdgeLift{make_point(g, std::move(path)), oid};
}

// Memoized horizon rows over a fixed witness list.
struct HorizonRow {
  const MarkedMetricGraph* m;
  EdgeLift lift;
  std::vector<signed char> cache;
  bool at(const std::vector<Word>& words, size_t i) {
    if (cache.empty()) cache.assign(words.size(), -1);
    if (cache[i] < 0) cache[i] = horizon_member(*m, lift, words[i]) ? 1 : 0;
    return cache[i] == 1;
  }
};

}  // namespace

std::optional<RectangleCertificate> rectangle_search(
    const MarkedMetricGraph& a, const MarkedMetricGraph& b,
    const SearchBudget& budget) {
  if (budget.word_length <= 0 || budget.anchor_length <= 0)
    throw InputError("search budget must be positive");
  if (a.alphabet().names() != b.alphabet().names())
    throw InputError("marked graphs are over different alphabets");

  std::vector<Word> words = enumerate_words(a.alphabet(), budget.word_length);
  words.erase(words.begin());  // drop the identity

  std::vector<EdgeLift> alifts;
  for (int o = 0; o < 2 * a.graph().edge_count(); ++o)
    alifts.push_back(canonical_lift(a, o));

  std::vector<EdgeLift> blifts;
  std::set<LiftKey> seen;
  for (const Word& w : enumerate_words(b.alphabet(), budget.anchor_length))
    for (int o = 0; o < 2 * b.graph().edge_count(); ++o) {
      EdgeLift base = canonical_lift(b, o);
      EdgeLift lift{act(b, base.origin, w), base.oedge};
      if (seen.insert({lift.origin.path, lift.oedge}).second)
        blifts.push_back(lift);
    }

  std::vector<HorizonRow> arow_f, arow_r, brow_f, brow_r;
  for (const auto& l : alifts) {
    arow_f.push_back({&a, l, {}});
    arow_r.push_back({&a, reverse_lift(a, l), {}});
  }
  for (const auto& l : blifts) {
    brow_f.push_back({&b, l, {}});
    brow_r.push_back({&b, reverse_lift(b, l), {}});
  }

  for (size_t ia = 0; ia < alifts.size(); ++ia)
    for (size_t ib = 0; ib < blifts.size(); ++ib) {
      std::optional<Word> corner[4];
      int found = 0;
      for (size_t wi = 0; wi < words.size() && found < 4; ++wi) {
        bool af = arow_f[ia].at(words, wi);
        bool ar = !af && arow_r[ia].at(words, wi);
        if (!af && !ar) continue;
        bool bf = brow_f[ib].at(words, wi);
        bool br = !bf && brow_r[ib].at(words, wi);
        if (!bf && !br) continue;
        int c = (af ? 0 : 1) + (bf ? 0 : 2);
        if (!corner[c]) {
          corner[c] = words[wi];
          ++found;
        }
      }
      if (found == 4)
        return RectangleCertificate{alifts[ia],    blifts[ib], *corner[0],
                                    *corner[1],    *corner[2], *corner[3]};
    }
  return std::nullopt;
}

namespace {

bool commute(const Word& g, const Word& h) {
  return concat(g, h) == concat(h, g);
}

Rat overlap_estimate(const MarkedMetricGraph& m, const Word& g,
                     const Word& h) {
  Rat lg = translation_length(m, g), lh = translation_length(m, h);
  Rat lo = std::min(translation_length(m, concat(g, h)),
                    translation_length(m, concat(g, invert(h))));
  Rat ov = (lg + lh - lo) / 2;
  return ov > Rat(0) ? ov : Rat(0);
}

// e is contained in the axis of f with agreeing orientation.
bool axis_contains_oriented(const MarkedMetricGraph& m, const EdgeLift& e,
                            const Word& f) {
  if (translation_length(m, f).numerator() == 0) return false;
  const MetricGraph& g = m.graph();
  TreePoint o = e.origin, t = lift_terminus(m, e);
  if (distance(g, o, project_to_axis(m, o, f)) != Rat(0)) return false;
  if (distance(g, t, project_to_axis(m, t, f)) != Rat(0)) return false;
  TreePoint fo = act(m, o, f);
  return distance(g, o, fo) == g.elen(e.oedge) + distance(g, t, fo);
}

// The axis of f avoids the interior of e, on the terminal side.
bool axis_beyond(const MarkedMetricGraph& m, const EdgeLift& e,
                 const Word& f) {
  if (translation_length(m, f).numerator() == 0) return false;
  const MetricGraph& g = m.graph();
  TreePoint o = e.origin, t = lift_terminus(m, e);
  TreePoint q = project_to_axis(m, o, f);
  return distance(g, o, q) == g.elen(e.oedge) + distance(g, t, q);
}

constexpr int kEscalationCap = 32;

}  // namespace

AxisWitness arc_axis_witness(const MarkedMetricGraph& m, const EdgeLift& e,
                             const Word& g, const Word& h) {
  if (!horizon_member(m, e, g) || !horizon_member(m, reverse_lift(m, e), h))
    throw DomainError("horizon membership precondition fails");
  Rat lg = translation_length(m, g), lh = translation_length(m, h);
  Rat minl = std::min(lg, lh);
  long long n0 = 1;
  if (!commute(g, h)) {
    // bridge/overlap location estimated from projections of o(e)
    TreePoint pg = project_to_axis(m, e.origin, g);
    TreePoint q = project_to_axis(m, pg, h);
    Rat rough = distance(m.graph(), e.origin, q) + m.graph().elen(e.oedge) +
                overlap_estimate(m, g, h);
    n0 = rat_ceil(rough / minl) + 1;
  }
  for (int extra = 0; extra <= kEscalationCap; ++extra) {
    long long n = n0 + extra;
    Word f = concat(power(g, static_cast<int>(n)),
                    power(invert(h), static_cast<int>(n)));
    if (axis_contains_oriented(m, e, f)) return {n, f};
  }
  throw DomainError("arc-axis exponent escalation exhausted");
}

AxisWitness pos_axis_witness(const MarkedMetricGraph& m, const EdgeLift& e,
                             const Word& g, const Word& h) {
  if (!horizon_member(m, e, g) || !horizon_member(m, e, h))
    throw DomainError("horizon membership precondition fails");
  Rat lg = translation_length(m, g), lh = translation_length(m, h);
  if (commute(g, h) &&
      translation_length(m, concat(g, h)) == lg + lh)
    throw DomainError("attracting ends coincide");
  const MetricGraph& gr = m.graph();
  TreePoint pg = project_to_axis(m, e.origin, g);
  TreePoint ph = project_to_axis(m, e.origin, h);
  Rat rough = distance(gr, e.origin, pg) + distance(gr, e.origin, ph) +
              gr.elen(e.oedge) + overlap_estimate(m, g, h);
  long long n0 = rat_ceil(rough / std::min(lg, lh)) + 1;
  for (int extra = 0; extra <= kEscalationCap; ++extra) {
    long long n = n0 + extra;
    Word f = concat(power(g, static_cast<int>(n)),
                    power(invert(h), static_cast<int>(n)));
    if (axis_beyond(m, e, f)) return {n, f};
  }
  throw DomainError("pos-axis exponent escalation exhausted");
}

namespace {

// Numeric pair class computed straight from translation lengths.
bool numeric_disjoint(const MarkedMetricGraph& m, const Word& g,
                      const Word& h) {
  Rat gh = translation_length(m, concat(g, h));
  Rat ghi = translation_length(m, concat(g, invert(h)));
  return gh == ghi &&
         gh > translation_length(m, g) + translation_length(m, h);
}

bool numeric_overlap(const MarkedMetricGraph& m, const Word& g,
                     const Word& h) {
  return translation_length(m, concat(g, h)) !=
         translation_length(m, concat(g, invert(h)));
}

// Ensures the a-axes of x and y have bounded intersection by replacing x
// with a conjugated companion when x and y share an axis (in a free group:
// commute), per the characteristic-representative adjustment. The result
// keeps the same two horizon memberships as x.
Word bounded_companion(const Word& x,
                       const Word& y, const MarkedMetricGraph& ma,
                       const EdgeLift& la, bool la_forward,
                       const MarkedMetricGraph& mb, const EdgeLift& lb,
                       bool lb_forward) {
  if (!commute(x, y)) return x;
  auto la_eff = la_forward ? la : reverse_lift(ma, la);
  auto lb_eff = lb_forward ? lb : reverse_lift(mb, lb);
  for (const Word& s : enumerate_words(ma.alphabet(), 3)) {
    if (s.empty() || commute(s, y)) continue;
    for (int n = 1; n <= kEscalationCap; ++n) {
      Word xn = power(x, n);
      Word cand = concat(concat(xn, s), invert(xn));
      if (commute(cand, y)) continue;
      if (horizon_member(ma, la_eff, cand) &&
          horizon_member(mb, lb_eff, cand))
        return cand;
    }
  }
  throw DomainError("characteristic-representative adjustment failed");
}

}  // namespace

std::pair<Word, Word> certificate_from_rectangle(
    const MarkedMetricGraph& a, const MarkedMetricGraph& b,
    const RectangleCertificate& rect) {
  if (!verify_rectangle(a, b, rect))
    throw InputError("rectangle fails re-verification");
  Word g = rect.w_pp, h = rect.w_nn, alpha = rect.w_pn, beta = rect.w_np;
  // bounded-axis-intersection adjustments (a-side for (g, alpha), b-side for
  // (h, beta))
  g = bounded_companion(g, alpha, a, rect.a, true, b, rect.b, true);
  h = bounded_companion(h, beta, a, rect.a, false, b, rect.b, false);

  EdgeLift abar = reverse_lift(a, rect.a);
  EdgeLift bbar = reverse_lift(b, rect.b);
  long long n0 = std::max(arc_axis_witness(b, rect.b, g, alpha).n,
                          pos_axis_witness(a, rect.a, g, alpha).n);
  long long m0 = std::max(arc_axis_witness(b, bbar, h, beta).n,
                          pos_axis_witness(a, abar, h, beta).n);
  for (int extra = 0; extra <= kEscalationCap; ++extra) {
    long long n = n0 + extra, mm = m0 + extra;
    Word rho = concat(power(g, static_cast<int>(n)),
                      power(invert(alpha), static_cast<int>(n)));
    Word sigma = concat(power(h, static_cast<int>(mm)),
                        power(invert(beta), static_cast<int>(mm)));
    if (rho == sigma) continue;
    if (axis_contains_oriented(b, rect.b, rho) && axis_beyond(a, rect.a, rho) &&
        axis_beyond(a, abar, sigma) && numeric_disjoint(a, rho, sigma) &&
        numeric_overlap(b, rho, sigma))
      return {rho, sigma};
  }
  throw DomainError("certificate construction escalation exhausted");
}

std::pair<Word, Word> orientation_clash_from_rectangle(
    const MarkedMetricGraph& a, const MarkedMetricGraph& b,
    const RectangleCertificate& rect) {
  if (!verify_rectangle(a, b, rect))
    throw InputError("rectangle fails re-verification");
  Word g = rect.w_pp, h = rect.w_nn, alpha = rect.w_pn, beta = rect.w_np;
  EdgeLift bbar = reverse_lift(b, rect.b);
  long long j0 = std::max(arc_axis_witness(a, rect.a, g, h).n,
                          arc_axis_witness(b, rect.b, g, h).n);
  long long k0 = std::max(arc_axis_witness(a, rect.a, alpha, beta).n,
                          arc_axis_witness(b, bbar, alpha, beta).n);
  auto la = [&](const Word& w) { return translation_length(a, w); };
  auto lb = [&](const Word& w) { return translation_length(b, w); };
  for (int extra = 0; extra <= kEscalationCap; ++extra) {
    long long j = j0 + extra, k = k0 + extra;
    Word c = concat(power(g, static_cast<int>(j)),
                    power(invert(h), static_cast<int>(j)));
    Word gamma = concat(power(alpha, static_cast<int>(k)),
                        power(invert(beta), static_cast<int>(k)));
    if (c == gamma) continue;
    Word cg = concat(c, gamma), cgi = concat(c, invert(gamma));
    if (axis_contains_oriented(a, rect.a, c) &&
        axis_contains_oriented(a, rect.a, gamma) &&
        axis_contains_oriented(b, rect.b, c) &&
        axis_contains_oriented(b, bbar, gamma) && la(cgi) < la(cg) &&
        lb(cgi) > lb(cg))
      return {c, gamma};
  }
  throw DomainError("orientation-clash escalation exhausted");
}

RectangleCertificate rectangle_from_pair(const MarkedMetricGraph& a,
                                         const MarkedMetricGraph& b,
                                         const Word& g, const Word& h) {
  if (!numeric_disjoint(a, g, h) || !numeric_overlap(b, g, h))
    throw DomainError(
        "pair is not disjoint in the first tree and overlapping in the "
        "second");
  const MetricGraph& ga = a.graph();
  // bridge in a: from the h-axis to the g-axis, stabilized projections
  TreePoint p = project_to_axis(a, base_point(), g);
  TreePoint q = project_to_axis(a, p, h);
  p = project_to_axis(a, q, g);
  q = project_to_axis(a, p, h);
  EdgePath bridge = geodesic_edges(ga, q, p);
  if (bridge.empty()) throw DomainError("degenerate bridge");
  EdgeLift la{q, bridge.front()};

  // overlap arc in b: walk the g-axis through a common point and keep the
  // first whole edge also on the h-axis, oriented along g
  const MetricGraph& gb = b.graph();
  TreePoint p0 = project_to_axis(b, project_to_axis(b, base_point(), g), h);
  TreePoint back = act(b, p0, invert(g));
  TreePoint fwd = act(b, p0, g);
  EdgePath walk = geodesic_edges(gb, back, fwd);
  std::optional<EdgeLift> lb;
  TreePoint cursor = back;
  for (int o : walk) {
    TreePoint next =
        make_point(gb, tighten([&] {
                     EdgePath ext = cursor.path;
                     ext.push_back(o);
                     return ext;
                   }()));
    bool on_h =
        distance(gb, cursor, project_to_axis(b, cursor, h)) == Rat(0) &&
        distance(gb, next, project_to_axis(b, next, h)) == Rat(0);
    if (on_h) {
      lb = EdgeLift{cursor, o};
      break;
    }
    cursor = next;
  }
  if (!lb) throw DomainError("overlap arc has no whole edge");

  bool same_orientation = translation_length(b, concat(g, h)) >
                          translation_length(b, concat(g, invert(h)));
  RectangleCertificate rect;
  rect.a = la;
  rect.b = *lb;
  rect.w_pp = g;
  rect.w_pn = invert(g);
  rect.w_np = same_orientation ? h : invert(h);
  rect.w_nn = same_orientation ? invert(h) : h;
  if (!verify_rectangle(a, b, rect))
    throw DomainError("constructed rectangle failed re-verification");
  return rect;
}

TwiceLightVerdict twice_light_check(const MarkedMetricGraph& a,
                                    const MarkedMetricGraph& b,
                                    const RectangleCertificate& rect,
                                    int word_length) {
  EdgeLift abar = reverse_lift(a, rect.a);
  EdgeLift bbar = reverse_lift(b, rect.b);
  bool pn = false, np = false;
  for (const Word& w : enumerate_words(a.alphabet(), word_length)) {
    if (w.empty()) continue;
    if (!pn && horizon_member(a, rect.a, w) && horizon_member(b, bbar, w))
      pn = true;
    if (!np && horizon_member(a, abar, w) && horizon_member(b, rect.b, w))
      np = true;
    if (pn && np) return TwiceLightVerdict::No;
  }
  return TwiceLightVerdict::Unknown;
}

namespace {

nlohmann::json lift_to_json(const EdgeLift& e) {
  return {{"anchor", e.origin.path}, {"oedge", e.oedge}};
}

EdgeLift lift_from_json(const MarkedMetricGraph& m, const nlohmann::json& j) {
  EdgeLift e{make_point(m.graph(), j.at("anchor").get<EdgePath>()),
             j.at("oedge").get<int>()};
  check_lift(m, e);
  return e;
}

}  // namespace

std::string rectangle_to_json(const MarkedMetricGraph& a,
                              const MarkedMetricGraph& b,
                              const RectangleCertificate& r) {
  nlohmann::json j;
  j["a"] = lift_to_json(r.a);
  j["b"] = lift_to_json(r.b);
  j["witnesses"] = {format_word(a.alphabet(), r.w_pp),
                    format_word(a.alphabet(), r.w_np),
                    format_word(a.alphabet(), r.w_pn),
                    format_word(b.alphabet(), r.w_nn)};
  return j.dump(2);
}

RectangleCertificate rectangle_from_json(const MarkedMetricGraph& a,
                                         const MarkedMetricGraph& b,
                                         const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RectangleCertificate r;
  r.a = lift_from_json(a, j.at("a"));
  r.b = lift_from_json(b, j.at("b"));
  auto w = j.at("witnesses");
  r.w_pp = parse_word(a.alphabet(), w.at(0).get<std::string>());
  r.w_np = parse_word(a.alphabet(), w.at(1).get<std::string>());
  r.w_pn = parse_word(a.alphabet(), w.at(2).get<std::string>());
  r.w_nn = parse_word(a.alphabet(), w.at(3).get<std::string>());
  return r;
}

}  // namespace treelen
