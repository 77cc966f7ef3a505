#include "treelen/lfcore.hpp"

#include <algorithm>

#include "json.hpp"
#include "treelen/gog.hpp"
#include "treelen/mgraph.hpp"

namespace treelen {

LengthOracle::LengthOracle(Alphabet alphabet, std::string provenance, Fn eval)
    : alphabet_(std::move(alphabet)),
      provenance_(std::move(provenance)),
      eval_(std::move(eval)),
      memo_(std::make_shared<std::map<std::vector<Lit>, Rat>>()) {}

Rat LengthOracle::operator()(const Word& w) const {
  auto it = memo_->find(w.lits());
  if (it != memo_->end()) return it->second;
  Rat v = eval_(w);
  if (v < Rat(0))
    throw DomainError("oracle returned a negative length for " +
                      format_word(alphabet_, w));
  memo_->emplace(w.lits(), v);
  return v;
}

LengthOracle LengthOracle::from_mgraph(
    std::shared_ptr<const MarkedMetricGraph> m) {
  Alphabet a = m->alphabet();
  return LengthOracle(a, "mgraph", [m = std::move(m)](const Word& w) {
    return translation_length(*m, w);
  });
}

LengthOracle LengthOracle::from_gog(
    std::shared_ptr<const GraphOfGroupsSpec> s) {
  Alphabet a = s->alphabet();
  return LengthOracle(a, "gog", [s = std::move(s)](const Word& w) {
    return translation_length_gog(*s, w);
  });
}

LengthOracle LengthOracle::zero(Alphabet alphabet) {
  return LengthOracle(std::move(alphabet), "zero",
                      [](const Word&) { return Rat(0); });
}

LengthOracle sum_oracle(const LengthOracle& l, const LengthOracle& m) {
  if (l.alphabet() != m.alphabet())
    throw InputError("sum of oracles over different alphabets");
  return LengthOracle(l.alphabet(), "sum",
                      [l, m](const Word& w) { return l(w) + m(w); });
}

LengthOracle scaled_oracle(const LengthOracle& l, const Rat& c) {
  if (c <= Rat(0)) throw InputError("scale factor must be positive");
  return LengthOracle(l.alphabet(), "derived-based",
                      [l, c](const Word& w) { return l(w) * c; });
}

PairClass classify_pair(const LengthOracle& l, const Word& g, const Word& h) {
  if (g == h) throw DomainError("pairs are taken off the diagonal");
  PairClass pc;
  pc.lg = l(g);
  pc.lh = l(h);
  pc.lgh = l(concat(g, h));
  pc.lghi = l(concat(g, invert(h)));
  bool elliptic_member = pc.lg == Rat(0) || pc.lh == Rat(0);
  if (pc.lgh != pc.lghi && !elliptic_member)
    pc.kind = PairKind::Overlap;
  else if (pc.lgh == pc.lghi && pc.lgh > pc.lg + pc.lh)
    pc.kind = PairKind::Disjoint;
  else
    pc.kind = PairKind::Neither;
  // An overlap pair must be a pair of hyperbolic elements. When a member is
  // elliptic and the pair is not disjoint, the fixed set of the elliptic
  // member meets the characteristic set of the other, which forces both
  // l(gh) and l(gh^-1) to be at most l(g) + l(h); assert that bound. (The
  // stronger claim that both equal l(other member) fails when gh or gh^-1 is
  // itself elliptic, e.g. g elliptic and h = g'k with k elliptic elsewhere.)
  if (elliptic_member && pc.kind != PairKind::Disjoint &&
      (pc.lgh > pc.lg + pc.lh || pc.lghi > pc.lg + pc.lh))
    throw DomainError("elliptic-pair constraint violated at (" +
                      format_word(l.alphabet(), g) + ", " +
                      format_word(l.alphabet(), h) + ")");
  return pc;
}

Rat char_distance(const LengthOracle& l, const Word& g, const Word& h) {
  Rat excess = l(concat(g, h)) - l(g) - l(h);
  return excess > Rat(0) ? excess / 2 : Rat(0);
}

OrientationResult overlap_orientation(const LengthOracle& l, const Word& g,
                                      const Word& h) {
  Rat lgh = l(concat(g, h)), lghi = l(concat(g, invert(h)));
  OrientationResult r;
  if (lgh == lghi) {
    r.kind = Orientation::NotOverlap;
    r.overlap_length = Rat(0);
    return r;
  }
  r.kind = lgh > lghi ? Orientation::Agree : Orientation::Oppose;
  r.overlap_length = (l(g) + l(h) - std::min(lgh, lghi)) / 2;
  return r;
}

AxiomReport check_axioms(const LengthOracle& l, const std::vector<Word>& s) {
  AxiomReport rep;
  rep.ok.fill(true);
  const Alphabet& a = l.alphabet();
  auto fail = [&](int axiom, const std::string& msg) {
    rep.ok[axiom - 1] = false;
    rep.violations.push_back("axiom " + std::to_string(axiom) + ": " + msg);
  };
  for (const Word& w : s) {
    try {
      l(w);
    } catch (const DomainError& e) {
      rep.nonnegative = false;
      rep.violations.push_back(e.what());
      return rep;
    }
  }
  if (l(Word()) != Rat(0)) fail(1, "l(1) = " + to_string(l(Word())));
  for (const Word& w : s)
    if (l(w) != l(invert(w)))
      fail(2, format_word(a, w) + ": " + to_string(l(w)) +
                  " != " + to_string(l(invert(w))));
  for (const Word& g : s)
    for (const Word& h : s)
      if (l(conjugate(g, h)) != l(g)) {
        fail(3, format_word(a, g) + " conjugated by " + format_word(a, h));
        break;
      }
  for (const Word& g : s)
    for (const Word& h : s) {
      Rat lgh = l(concat(g, h)), lghi = l(concat(g, invert(h)));
      if (lgh != lghi && std::max(lgh, lghi) > l(g) + l(h))
        fail(4, "(" + format_word(a, g) + ", " + format_word(a, h) + ")");
      if (l(g) > Rat(0) && l(h) > Rat(0)) {
        bool disj = lgh == lghi && lgh > l(g) + l(h);
        bool touch = std::max(lgh, lghi) == l(g) + l(h);
        if (!disj && !touch)
          fail(5, "(" + format_word(a, g) + ", " + format_word(a, h) +
                      "): lengths " + to_string(lgh) + ", " + to_string(lghi) +
                      " vs " + to_string(l(g) + l(h)));
      }
    }
  rep.ok[5] = false;
  for (const Word& g : s) {
    for (const Word& h : s) {
      if (g == h) continue;
      Rat n = l(g) + l(h) - l(concat(g, invert(h)));
      if (n > Rat(0) && n < 2 * std::min(l(g), l(h))) {
        rep.ok[5] = true;
        rep.vi_witness = {g, h};
        break;
      }
    }
    if (rep.ok[5]) break;
  }
  if (!rep.ok[5])
    rep.violations.push_back("axiom 6: no good pair within the element set");
  return rep;
}

CompatVerdict compatible_on(const LengthOracle& l, const LengthOracle& m,
                            const std::vector<std::pair<Word, Word>>& pairs) {
  for (const auto& [g, h] : pairs) {
    if (g == h) continue;
    PairClass cl = classify_pair(l, g, h);
    PairClass cm = classify_pair(m, g, h);
    bool od = cl.kind == PairKind::Overlap && cm.kind == PairKind::Disjoint;
    bool doo = cl.kind == PairKind::Disjoint && cm.kind == PairKind::Overlap;
    if (od || doo)
      return {CompatKind::IncompatibleCombinatorics, {{g, h}}};
    if (cl.kind == PairKind::Overlap && cm.kind == PairKind::Overlap) {
      bool agree_l = cl.lgh > cl.lghi;
      bool agree_m = cm.lgh > cm.lghi;
      if (agree_l != agree_m)
        return {CompatKind::IncoherentOrientation, {{g, h}}};
    }
  }
  return {CompatKind::CompatibleUpToBound, std::nullopt};
}

CompatVerdict compatible_on(const LengthOracle& l, const LengthOracle& m,
                            const std::vector<Word>& elements) {
  std::vector<std::pair<Word, Word>> pairs;
  for (const Word& g : elements)
    for (const Word& h : elements)
      if (g != h) pairs.push_back({g, h});
  return compatible_on(l, m, pairs);
}

bool is_good_pair(const LengthOracle& l, const Word& g, const Word& h) {
  Rat n = l(g) + l(h) - l(concat(g, invert(h)));
  return n > Rat(0) && n < 2 * std::min(l(g), l(h));
}

GoodPairCertificate make_good_pair(const LengthOracle& l, const Word& g,
                                   const Word& h,
                                   const std::string& assumption) {
  GoodPairCertificate c;
  c.g = g;
  c.h = h;
  c.lg = l(g);
  c.lh = l(h);
  c.lgh = l(concat(g, h));
  c.lghi = l(concat(g, invert(h)));
  c.slack_lower = c.lg + c.lh - c.lghi;
  c.slack_upper = 2 * std::min(c.lg, c.lh) - c.slack_lower;
  c.provenance = l.provenance();
  c.assumption = assumption;
  if (!(c.slack_lower > Rat(0) && c.slack_upper > Rat(0)))
    throw DomainError("(" + format_word(l.alphabet(), g) + ", " +
                      format_word(l.alphabet(), h) +
                      ") fails the good-pair inequality");
  return c;
}

PowerPair power_good_pair(const LengthOracle& l, const Word& g,
                          const Word& h) {
  OrientationResult o = overlap_orientation(l, g, h);
  if (o.kind != Orientation::Agree)
    throw DomainError("power_good_pair needs an Agree-oriented overlap pair");
  Rat n = o.overlap_length;
  long long a0 = std::max(1LL, rat_ceil(n / l(g)));
  long long b0 = std::max(1LL, rat_ceil(n / l(h)));
  // Escalate exponents beyond the initial overlap bound until strictness holds; the
  // search is over small total increments, smallest totals first.
  for (long long extra = 0; extra <= 32; ++extra)
    for (long long da = 0; da <= extra; ++da) {
      long long db = extra - da;
      Word ga = power(g, static_cast<int>(a0 + da));
      Word hb = power(h, static_cast<int>(b0 + db));
      if (ga != hb && is_good_pair(l, ga, hb))
        return {true, a0 + da, b0 + db, ""};
    }
  return {false, 0, 0, "no good power pair within the escalation cap"};
}

GoodPairCertificate good_pair_from_independent(const LengthOracle& l,
                                               const Word& g, const Word& h) {
  if (!(l(h) < l(g)) || l(g) == Rat(0))
    throw InputError("good_pair_from_independent needs 0 <= l(h) < l(g)");
  Word p = concat(g, h), q = concat(g, invert(h));
  const std::string assumption =
      "T-independence and orientation hypotheses assumed, not derived";
  if (is_good_pair(l, p, q)) return make_good_pair(l, p, q, assumption);
  PowerPair pw = power_good_pair(l, p, q);
  if (!pw.ok)
    throw DomainError("hypothesis violated: no good pair from (" +
                      format_word(l.alphabet(), g) + ", " +
                      format_word(l.alphabet(), h) + ")");
  return make_good_pair(l, power(p, static_cast<int>(pw.a)),
                        power(q, static_cast<int>(pw.b)), assumption);
}

std::optional<SimultaneousGoodPair> simultaneous_good_pair(
    const LengthOracle& l, const LengthOracle& m, int bound) {
  LengthOracle sum = sum_oracle(l, m);
  std::vector<Word> words = enumerate_words(l.alphabet(), bound);
  for (const Word& g : words) {
    if (g.empty()) continue;
    for (const Word& h : words) {
      if (h.empty() || g == h) continue;
      if (is_good_pair(l, g, h) && is_good_pair(m, g, h) &&
          is_good_pair(sum, g, h))
        return SimultaneousGoodPair{g, h, make_good_pair(l, g, h),
                                    make_good_pair(m, g, h),
                                    make_good_pair(sum, g, h)};
    }
  }
  return std::nullopt;
}

Rat based_length_dagger(const LengthOracle& l, const GoodPairCertificate& gp,
                        const Word& k) {
  if (!is_good_pair(l, gp.g, gp.h))
    throw DomainError("certificate is not valid for this oracle");
  std::array<Word, 3> axes = {gp.g, gp.h, concat(gp.g, invert(gp.h))};
  Rat best(0);
  for (const Word& x : axes)
    for (const Word& xp : axes) {
      Rat d = char_distance(l, x, conjugate(xp, invert(k)));
      if (d > best) best = d;
    }
  return best;
}

BasedSumReport based_sum_identity(const LengthOracle& l, const LengthOracle& m,
                                  const SimultaneousGoodPair& gp,
                                  const std::vector<Word>& s) {
  LengthOracle sum = sum_oracle(l, m);
  BasedSumReport rep{true, {}};
  for (const Word& k : s) {
    Rat lhs = based_length_dagger(sum, gp.for_sum, k);
    Rat rhs = based_length_dagger(l, gp.for_l, k) +
              based_length_dagger(m, gp.for_m, k);
    if (lhs != rhs) {
      rep.ok = false;
      rep.violations.push_back(format_word(l.alphabet(), k) + ": " +
                               to_string(lhs) + " != " + to_string(rhs));
    }
  }
  return rep;
}

std::string good_pair_to_json(const Alphabet& a,
                              const GoodPairCertificate& c) {
  nlohmann::json j;
  j["type"] = "good_pair";
  j["g"] = format_word(a, c.g);
  j["h"] = format_word(a, c.h);
  j["lg"] = to_string(c.lg);
  j["lh"] = to_string(c.lh);
  j["lgh"] = to_string(c.lgh);
  j["lghi"] = to_string(c.lghi);
  j["slack_lower"] = to_string(c.slack_lower);
  j["slack_upper"] = to_string(c.slack_upper);
  j["provenance"] = c.provenance;
  j["assumption"] = c.assumption;
  return j.dump(2);
}

GoodPairCertificate good_pair_from_json(const Alphabet& a,
                                        const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("type").get<std::string>() != "good_pair")
    throw InputError("not a good-pair certificate");
  GoodPairCertificate c;
  c.g = parse_word(a, j.at("g").get<std::string>());
  c.h = parse_word(a, j.at("h").get<std::string>());
  c.lg = parse_rat(j.at("lg").get<std::string>());
  c.lh = parse_rat(j.at("lh").get<std::string>());
  c.lgh = parse_rat(j.at("lgh").get<std::string>());
  c.lghi = parse_rat(j.at("lghi").get<std::string>());
  c.slack_lower = parse_rat(j.at("slack_lower").get<std::string>());
  c.slack_upper = parse_rat(j.at("slack_upper").get<std::string>());
  c.provenance = j.value("provenance", "");
  c.assumption = j.value("assumption", "");
  return c;
}

std::string compat_witness_to_json(const Alphabet& a, const CompatVerdict& v) {
  nlohmann::json j;
  j["type"] = "compat_verdict";
  switch (v.kind) {
    case CompatKind::CompatibleUpToBound:
      j["kind"] = "compatible_up_to_bound";
      break;
    case CompatKind::IncompatibleCombinatorics:
      j["kind"] = "incompatible_combinatorics";
      break;
    case CompatKind::IncoherentOrientation:
      j["kind"] = "incoherent_orientation";
      break;
  }
  if (v.witness) {
    j["g"] = format_word(a, v.witness->first);
    j["h"] = format_word(a, v.witness->second);
  }
  return j.dump(2);
}

CompatVerdict compat_witness_from_json(const Alphabet& a,
                                       const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("type").get<std::string>() != "compat_verdict")
    throw InputError("not a compatibility verdict");
  CompatVerdict v;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "compatible_up_to_bound")
    v.kind = CompatKind::CompatibleUpToBound;
  else if (kind == "incompatible_combinatorics")
    v.kind = CompatKind::IncompatibleCombinatorics;
  else if (kind == "incoherent_orientation")
    v.kind = CompatKind::IncoherentOrientation;
  else
    throw InputError("unknown verdict kind: " + kind);
  if (j.contains("g"))
    v.witness = {parse_word(a, j.at("g").get<std::string>()),
                 parse_word(a, j.at("h").get<std::string>())};
  return v;
}

}  // namespace treelen
